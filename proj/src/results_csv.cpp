#include "rmtk/results_csv.hpp"

#include <bit>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "rmtk/errors.hpp"

namespace rmtk {
namespace {

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_value(const std::string& text, const std::string& source, std::size_t line) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && text.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw ValidationError(source + ":" + std::to_string(line) + ": cannot parse number '" + text + "'");
  return v;
}

}  // namespace

bool ResultTable::operator==(const ResultTable& other) const {
  if (columns != other.columns || rows.size() != other.rows.size()) return false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != other.rows[i].size()) return false;
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      if (std::bit_cast<std::uint64_t>(rows[i][j]) != std::bit_cast<std::uint64_t>(other.rows[i][j])) return false;
  }
  return true;
}

void write_results(std::ostream& out, const ResultTable& table) {
  for (std::size_t j = 0; j < table.columns.size(); ++j) out << (j ? "," : "") << table.columns[j];
  out << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) throw ValidationError("row width does not match the header");
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << format_value(row[j]);
    out << '\n';
  }
}

ResultTable read_results(std::istream& in, const std::string& source) {
  ResultTable t;
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(source + ": missing header line");
  t.columns = split_commas(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_commas(line);
    if (cells.size() != t.columns.size())
      throw ValidationError(source + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(t.columns.size()) + " fields, found " + std::to_string(cells.size()));
    std::vector<double> row(cells.size());
    for (std::size_t j = 0; j < cells.size(); ++j) row[j] = parse_value(cells[j], source, lineno);
    t.rows.push_back(std::move(row));
  }
  return t;
}

void persist_results(const ResultTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_results(out, table);
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

ResultTable load_results(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return read_results(in, path);
}

ResultTable tail_table(const TailResult& r) {
  ResultTable t{{"n", "eps", "trials", "prob", "stderr"}, {}};
  for (const auto& row : r.rows)
    t.rows.push_back({static_cast<double>(row.n), row.eps, static_cast<double>(row.trials), row.prob, row.std_err});
  return t;
}

ResultTable comparison_table(const std::vector<ComparisonRecord>& records) {
  ResultTable t{{"trial", "n", "value"}, {}};
  for (const auto& r : records) t.rows.push_back({static_cast<double>(r.trial), static_cast<double>(r.n), r.value});
  return t;
}

ResultTable esd_table(const std::vector<EsdAtom>& atoms) {
  ResultTable t{{"trial", "k", "re", "im"}, {}};
  for (const auto& a : atoms)
    t.rows.push_back({static_cast<double>(a.trial), static_cast<double>(a.k), a.value.real(), a.value.imag()});
  return t;
}

ResultTable extreme_sv_table(const ExtremeSvResult& r) {
  ResultTable t{{"trial", "n", "sigma1", "sigman"}, {}};
  for (const auto& rec : r.records)
    t.rows.push_back({static_cast<double>(rec.trial), static_cast<double>(rec.n), rec.sigma1, rec.sigman});
  return t;
}

}  // namespace rmtk
