#pragma once

#include "misti/process_spec.hpp"
#include "misti/verify.hpp"

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace misti::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitMismatch = 1;
inline constexpr int kExitConfig = 2;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown for --help; what() holds the usage text.
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  std::string process = "thinning";
  std::string law = "nb";  ///< poisson | nb | levy
  std::string levy;        ///< "j:mass,j:mass" for law = levy
  double theta = 1.0;
  double p = 0.5;
  double rho = 0.5;
  double alpha = 1.0;
  double lambda = 1.0;
  int steps = 1000;
  int t0 = 0;
  double horizon = 100.0;
  int x0 = -1;  ///< CT start; negative draws from the stationary law
  int k = 12;
  int degree = 8;
  std::uint64_t seed = 1;
  std::string out;  ///< empty writes to stdout
  std::string format;  ///< csv | jsonl; empty picks jsonl for verify, csv otherwise
  std::string suite = "all";
  double r0 = 0.5, r1 = 0.4, r2 = 0.08, theta1 = 0.4;
  std::vector<double> thetas, ps, rhos;  ///< table grids; empty means the scalar value

  bool operator==(const RunConfig&) const = default;
};

/// Parses `<command> [flags]`. A `--config file` supplies `key = value`
/// lines; flags on the command line override it. Unknown flags or keys throw
/// ConfigError.
RunConfig parse_args(const std::vector<std::string>& args);

/// Parses `key = value` text for the given command.
RunConfig parse_config_text(const std::string& command, const std::string& text);

/// `key = value` lines that parse back to the same config.
std::string dump_config(const RunConfig& cfg);

/// The format actually used: jsonl for verify reports, csv elsewhere, unless set.
std::string output_format(const RunConfig& cfg);

IdLaw build_law(const RunConfig& cfg);

/// Throws ConfigError when a parameter is out of range.
ProcessSpec build_spec(const RunConfig& cfg);

/// One suite entry: a report plus the polarity the theory predicts.
struct SuiteCheck {
  std::string suite;
  VerifyReport report;
  bool expect_pass;
  bool matches() const { return report.pass == expect_pass; }
};

std::vector<std::string> suite_names();
std::vector<SuiteCheck> run_suite(const RunConfig& cfg);

/// One row of the discriminating-probability table.
struct TableRow {
  double theta, p, rho;
  double thinning_enum, thinning_closed;
  double rm_enum, rm_closed;
};
TableRow discriminating_row(double theta, double p, double rho, int max_value);

int cmd_simulate(const RunConfig& cfg, std::ostream& out);
int cmd_table(const RunConfig& cfg, std::ostream& out);
int cmd_verify(const RunConfig& cfg, std::ostream& out);
int cmd_classify(const RunConfig& cfg, std::ostream& out);

/// Full command-line entry point; returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace misti::cli
