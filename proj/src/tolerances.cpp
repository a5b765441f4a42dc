#include "gauge_rig/tolerances.hpp"

#include <charconv>
#include <cstdlib>
#include <string>

#include "gauge_rig/error.hpp"

namespace gauge_rig {

Tolerances parse_tolerance_overrides(std::string_view spec, Tolerances base) {
  while (!spec.empty()) {
    const auto comma = spec.find(',');
    auto item = spec.substr(0, comma);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    spec = comma == std::string_view::npos ? std::string_view{} : spec.substr(comma + 1);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw ParseError("tolerance override '" + std::string(item) + "' needs key=value");
    const auto key = item.substr(0, eq);
    const auto text = item.substr(eq + 1);
    double value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || !(value > 0))
      throw ParseError("tolerance '" + std::string(key) + "' needs a positive number");
    if (key == "rank_epsilon") base.rank_epsilon = value;
    else if (key == "solvability") base.solvability = value;
    else if (key == "tangency") base.tangency = value;
    else if (key == "projection_gate") base.projection_gate = value;
    else if (key == "projection_target") base.projection_target = value;
    else if (key == "projection_max_iterations") base.projection_max_iterations = int(value);
    else if (key == "manifold_warning") base.manifold_warning = value;
    else throw ParseError("unknown tolerance '" + std::string(key) + "'");
  }
  return base;
}

Tolerances tolerances_from_environment(Tolerances base) {
  if (const char* env = std::getenv("GAUGE_RIG_TOL")) return parse_tolerance_overrides(env, base);
  return base;
}

}  // namespace gauge_rig
