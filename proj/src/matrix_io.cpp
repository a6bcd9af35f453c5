#include "rmtk/matrix_io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rmtk/errors.hpp"

namespace rmtk {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool is_imag_unit(char c) { return c == 'i' || c == 'j'; }

// Parses a real literal at the front of `s`; returns false if none is there.
bool take_real(std::string_view& s, double& value) {
  std::string buf(s);
  const char* begin = buf.c_str();
  char* end = nullptr;
  errno = 0;
  value = std::strtod(begin, &end);
  if (end == begin || errno == ERANGE) return false;
  s.remove_prefix(static_cast<std::size_t>(end - begin));
  return true;
}

}  // namespace

cplx parse_complex(std::string_view text) {
  std::string_view s = trim(text);
  const std::string original(s);
  auto fail = [&]() -> cplx { throw ValidationError("malformed complex number: '" + original + "'"); };
  if (s.empty()) return fail();

  // Pure imaginary unit with optional sign: "i", "-i", "+i".
  if (s.size() <= 2 && is_imag_unit(s.back())) {
    if (s.size() == 1) return {0.0, 1.0};
    if (s[0] == '-') return {0.0, -1.0};
    if (s[0] == '+') return {0.0, 1.0};
  }

  double first = 0.0;
  if (!take_real(s, first)) return fail();
  s = trim(s);
  if (s.empty()) return {first, 0.0};
  if (s.size() == 1 && is_imag_unit(s[0])) return {0.0, first};

  if (s[0] != '+' && s[0] != '-') return fail();
  const double sign = s[0] == '-' ? -1.0 : 1.0;
  s.remove_prefix(1);
  s = trim(s);
  if (s.size() == 1 && is_imag_unit(s[0])) return {first, sign};
  double second = 0.0;
  if (s.empty() || s[0] == '+' || s[0] == '-') return fail();
  if (!take_real(s, second)) return fail();
  s = trim(s);
  if (s.size() != 1 || !is_imag_unit(s[0])) return fail();
  return {first, sign * second};
}

std::string format_complex(cplx z) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.17g%+.17gi", z.real(), z.imag());
  return buf;
}

ComplexMatrix read_matrix_csv(std::istream& in) {
  std::vector<cplx> entries;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    std::size_t count = 0;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = view.find(',', start);
      const auto field = view.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                            : comma - start);
      entries.push_back(parse_complex(field));
      ++count;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      throw ValidationError("CSV matrix row " + std::to_string(rows + 1) + " has " +
                            std::to_string(count) + " entries, expected " + std::to_string(cols));
    }
    ++rows;
  }
  return ComplexMatrix(rows, cols, std::move(entries));
}

ComplexMatrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open matrix file '" + path.string() + "'");
  try {
    return read_matrix_csv(in);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_matrix_csv(std::ostream& out, const ComplexMatrix& a) {
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (j) out << ',';
      out << format_complex(a(i, j));
    }
    out << '\n';
  }
}

void write_matrix_csv(const std::filesystem::path& path, const ComplexMatrix& a) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write matrix file '" + path.string() + "'");
  write_matrix_csv(out, a);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace rmtk
