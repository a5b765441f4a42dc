#pragma once

// Command implementations behind the gauge_rig executable. Each returns the
// process exit code; library errors propagate as exceptions.

#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "gauge_rig/io.hpp"
#include "gauge_rig/tolerances.hpp"

namespace gauge_rig::cli {

struct RunConfig {
  std::string input;
  std::string trajectory;
  double omega = 1.0;
  double lambda = 0.0;
  std::vector<std::string> xi;
  double t_end = 2.0 * std::numbers::pi;
  double step = 1e-3;
  std::string out;
  std::string format = "csv";
  std::string fixed_edge;
  double fixed_value = 0.0;
  std::uint64_t seed = 20150109;
  Tolerances tolerances;

  /// Throws ParseError on out-of-range values.
  void validate() const;
};

int cmd_analyze(const RunConfig& config, std::ostream& out);
int cmd_simulate(const RunConfig& config, std::ostream& out);
int cmd_gauge_compare(const RunConfig& config, std::ostream& out);
int cmd_gauge_fix(const RunConfig& config, std::ostream& out);
int cmd_reduce(const RunConfig& config, std::ostream& out);
int cmd_oracle_check(const RunConfig& config, std::ostream& out);

}  // namespace gauge_rig::cli
