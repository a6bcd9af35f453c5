#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace rmtk::cli {

enum class ExitCode : int { Ok = 0, Flagged = 1, Usage = 2, Numerical = 3 };

struct Invocation {
  std::string subcommand;
  std::string config_path;
  std::string output_path;  ///< empty: data to stdout is refused, reports go to stdout
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  bool json_errors = false;
  bool audit = false;
};

/// Subcommand names, in help order.
const std::vector<std::string>& subcommands();

/// Parses arguments (without the program name). On usage errors or --help,
/// writes the diagnostic and returns the exit status instead.
struct ParseOutcome {
  std::optional<Invocation> invocation;
  int exit_status = 0;
};
ParseOutcome parse_invocation(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Runs a parsed invocation; returns the exit status.
int dispatch(const Invocation& inv, std::ostream& out, std::ostream& err);

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rmtk::cli
