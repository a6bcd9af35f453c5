#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rmtk/experiments.hpp"

namespace rmtk {

/// Numeric table with a fixed column order. Values are written with 17
/// significant digits, so a write/read round trip is bit-exact.
struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  bool operator==(const ResultTable& other) const;
};

void write_results(std::ostream& out, const ResultTable& table);
ResultTable read_results(std::istream& in, const std::string& source = "<stream>");

/// Throws IoError with the path in the message.
void persist_results(const ResultTable& table, const std::string& path);
ResultTable load_results(const std::string& path);

/// n, eps, trials, prob, stderr
ResultTable tail_table(const TailResult& r);
/// trial, n, value
ResultTable comparison_table(const std::vector<ComparisonRecord>& records);
/// trial, k, re, im
ResultTable esd_table(const std::vector<EsdAtom>& atoms);
/// trial, n, sigma1, sigman
ResultTable extreme_sv_table(const ExtremeSvResult& r);

}  // namespace rmtk
