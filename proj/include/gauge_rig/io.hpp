#pragma once

// File formats: framework documents (JSON), trajectories (CSV/JSON), gauge
// policy specs. Everything here works in double precision.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gauge_rig/dynamics.hpp"
#include "gauge_rig/framework.hpp"
#include "gauge_rig/reduced_model.hpp"

namespace gauge_rig::io {

/// Framework document:
///   {"dimension": 2,
///    "vertices": [{"id": "1", "mass": 1.0}, ...],
///    "edges": [{"ends": ["1", "2"], "length": 1.0}, ...],
///    "positions": {"1": [0, 0], ...}}
/// "dimension" and "positions" are optional; unknown keys are rejected.
struct FrameworkDocument {
  RodFramework<double> framework;
  /// Present iff the document carries a position for every vertex.
  std::optional<Configuration<double>> configuration;
};

FrameworkDocument parse_framework(std::string_view text);
FrameworkDocument load_framework(const std::filesystem::path& path);
std::string framework_to_json(const RodFramework<double>& fw, const Configuration<double>* config = nullptr);

enum class Format { csv, json };
Format parse_format(std::string_view name);

/// Shortest text that is the same for the same double: printf("%.17g").
std::string format_number(double value);

std::vector<std::string> trajectory_csv_header(const RodFramework<double>& fw);
std::string trajectory_to_csv(const RodFramework<double>& fw, const Trajectory<double>& traj);
std::string trajectory_to_json(const RodFramework<double>& fw, const Trajectory<double>& traj);

struct TrajectorySample {
  double t = 0;
  PhasePoint<double> state;
};

/// Reads a file written by trajectory_to_csv / trajectory_to_json.
std::vector<TrajectorySample> parse_trajectory(const RodFramework<double>& fw, std::string_view text, Format format);

std::string reduced_trajectory_to_csv(const std::vector<double>& times,
                                      const std::vector<ReducedState<double>>& states,
                                      const std::vector<double>& energies);

/// Policy spec: "0", a number, "const:<c>", "cos:<a>,<w>" (a cos wt) or
/// "sin:<a>,<w>". The value applies to every self-stress direction.
GaugePolicy<double> parse_policy(std::string_view spec);

/// Edge reference "a-b" or "a,b" (vertex labels) to a dense edge index.
int parse_edge(const RodFramework<double>& fw, std::string_view spec);

/// Writes to a temporary file next to `path` and renames it into place.
void write_atomically(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

}  // namespace gauge_rig::io
