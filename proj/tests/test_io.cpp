#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "gauge_rig/commands.hpp"
#include "gauge_rig/io.hpp"

using namespace gauge_rig;
namespace fs = std::filesystem;

namespace {

const std::string kData = GAUGE_RIG_DATA_DIR;

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gauge_rig_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string minimal(const std::string& extra = "") {
  return R"({"vertices": [{"id": "a", "mass": 1}, {"id": "b", "mass": 2}],
             "edges": [{"ends": ["a", "b"], "length": 1.5}])" +
         extra + "}";
}

Trajectory<double> short_run(const RodFramework<double>& fw, const Configuration<double>& c) {
  const auto start = prepare_initial_data(fw, c, 1.0, 0.0);
  return integrate(fw, start, io::parse_policy("cos:1,1"), 0.05, 1e-2);
}

}  // namespace

TEST(FrameworkDocument, LoadsTheFixtures) {
  const auto six = io::load_framework(kData + "/four_masses_six_rods.json");
  EXPECT_EQ(six.framework.vertex_count(), 4);
  EXPECT_EQ(six.framework.edge_count(), 6);
  ASSERT_TRUE(six.configuration.has_value());
  EXPECT_LT((six.configuration->positions - reference_framework<double>().configuration.positions).cwiseAbs().maxCoeff(),
            1e-15);
  EXPECT_EQ(io::load_framework(kData + "/four_masses_five_rods.json").framework.edge_count(), 5);
  EXPECT_EQ(io::load_framework(kData + "/triangle.json").framework.edge_count(), 3);
}

TEST(FrameworkDocument, PositionsAndDimensionAreOptional) {
  const auto doc = io::parse_framework(minimal());
  EXPECT_FALSE(doc.configuration.has_value());
  EXPECT_EQ(doc.framework.mass(1), 2.0);
  EXPECT_EQ(doc.framework.rest_length(0), 1.5);
}

TEST(FrameworkDocument, SchemaViolations) {
  EXPECT_THROW(io::parse_framework(minimal(R"(, "colour": "red")")), ParseError);
  EXPECT_THROW(io::parse_framework(R"({"vertices": []})"), ParseError);
  EXPECT_THROW(io::parse_framework(minimal(R"(, "dimension": 2.5)")), ParseError);
  EXPECT_THROW(io::parse_framework(minimal(R"(, "positions": {"a": [0, 0]})")), ParseError);
  EXPECT_THROW(io::parse_framework(minimal(R"(, "positions": {"a": [0, 0], "b": [1]})")), ParseError);
  EXPECT_THROW(io::parse_framework(minimal(R"(, "positions": {"a": [0, 0], "c": [1, 1]})")), ParseError);
  EXPECT_THROW(io::parse_framework("[1, 2]"), ParseError);
  EXPECT_THROW(io::parse_framework(R"({"vertices": [{"id": 1, "mass": 1}], "edges": []})"), ParseError);
  EXPECT_THROW(io::parse_framework(R"({"vertices": [{"id": "a", "mass": "1"}], "edges": []})"), ParseError);
  EXPECT_THROW(io::load_framework("/nonexistent/file.json"), ParseError);
}

TEST(FrameworkDocument, InvariantViolationsAreFrameworkErrors) {
  EXPECT_THROW(io::parse_framework(R"({"vertices": [{"id": "a", "mass": -1}, {"id": "b", "mass": 1}],
                                       "edges": [{"ends": ["a", "b"], "length": 1}]})"),
               InvalidFramework);
  EXPECT_THROW(io::parse_framework(minimal(R"(, "dimension": 3)")), InvalidFramework);
  EXPECT_THROW(io::parse_framework(R"({"vertices": [{"id": "a", "mass": 1}, {"id": "b", "mass": 1}],
                                       "edges": [{"ends": ["a", "c"], "length": 1}]})"),
               InvalidFramework);
}

TEST(FrameworkDocument, MalformedJsonReportsTheLine) {
  try {
    io::parse_framework("{\n  \"vertices\": [\n    {\"id\": \"a\",, }\n  ]\n}");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(FrameworkDocument, RoundTrip) {
  const auto ref = reference_framework<double>();
  const auto again = io::parse_framework(io::framework_to_json(ref.framework, &ref.configuration));
  EXPECT_EQ(again.framework.vertex_ids(), ref.framework.vertex_ids());
  EXPECT_EQ(again.framework.rest_lengths(), ref.framework.rest_lengths());
  EXPECT_EQ(again.configuration->positions, ref.configuration.positions);
}

TEST(Numbers, ExactRoundTrip) {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) EXPECT_EQ(std::stod(io::format_number(x)), x);
  EXPECT_EQ(io::parse_format("csv"), io::Format::csv);
  EXPECT_EQ(io::parse_format("json"), io::Format::json);
  EXPECT_THROW(io::parse_format("xml"), ParseError);
}

TEST(TrajectoryCsv, HeaderLayout) {
  const auto ref = reference_framework<double>();
  const auto header = io::trajectory_csv_header(ref.framework);
  ASSERT_EQ(header.size(), 1u + 8 + 8 + 6 + 4);
  EXPECT_EQ(header[0], "t");
  EXPECT_EQ(header[1], "q_1_x");
  EXPECT_EQ(header[4], "q_2_y");
  EXPECT_EQ(header[9], "p_1_x");
  EXPECT_EQ(header[17], "tension_1-2");
  EXPECT_EQ(header[22], "tension_3-4");
  EXPECT_EQ(header[23], "energy");
  EXPECT_EQ(header[26], "c3_max");
}

TEST(TrajectoryCsv, DeterministicBytes) {
  const auto ref = reference_framework<double>();
  const std::string a = io::trajectory_to_csv(ref.framework, short_run(ref.framework, ref.configuration));
  const std::string b = io::trajectory_to_csv(ref.framework, short_run(ref.framework, ref.configuration));
  EXPECT_EQ(a, b);
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 1 + 6);
}

TEST(Trajectory, CsvAndJsonRoundTrip) {
  const auto ref = reference_framework<double>();
  const auto traj = short_run(ref.framework, ref.configuration);
  for (auto format : {io::Format::csv, io::Format::json}) {
    const std::string text = format == io::Format::csv ? io::trajectory_to_csv(ref.framework, traj)
                                                       : io::trajectory_to_json(ref.framework, traj);
    const auto samples = io::parse_trajectory(ref.framework, text, format);
    ASSERT_EQ(samples.size(), traj.size());
    for (std::size_t s = 0; s < samples.size(); ++s) {
      EXPECT_EQ(samples[s].t, traj.times[s]);
      EXPECT_EQ(samples[s].state.positions(), traj.states[s].positions());
      EXPECT_EQ(samples[s].state.momenta(), traj.states[s].momenta());
      EXPECT_EQ(samples[s].state.tensions(), traj.states[s].tensions());
    }
  }
  EXPECT_THROW(io::parse_trajectory(ref.framework, "t,q_1_x\n0,0\n", io::Format::csv), ParseError);
  EXPECT_THROW(io::parse_trajectory(ref.framework, "", io::Format::csv), ParseError);
  EXPECT_THROW(io::parse_trajectory(ref.framework, "{", io::Format::json), ParseError);
}

TEST(Policy, SpecLanguage) {
  const auto r = reference_framework<double>();
  const auto pt = prepare_initial_data(r.framework, r.configuration, 1.0, 0.0);
  EXPECT_EQ(io::parse_policy("0")(3.0, pt, 1)(0), 0.0);
  EXPECT_EQ(io::parse_policy("1.5")(3.0, pt, 2), VectorX<double>::Constant(2, 1.5));
  EXPECT_EQ(io::parse_policy("const:-2")(0.0, pt, 1)(0), -2.0);
  EXPECT_DOUBLE_EQ(io::parse_policy("cos:2,3")(0.5, pt, 1)(0), 2 * std::cos(1.5));
  EXPECT_DOUBLE_EQ(io::parse_policy("sin:1,1")(0.5, pt, 1)(0), std::sin(0.5));
  for (const char* bad : {"", "cos:1", "const:1,2", "tan:1,1", "abc", "sin:x,1"})
    EXPECT_THROW(io::parse_policy(bad), ParseError) << bad;
}

TEST(Edge, Labels) {
  const auto r = reference_framework<double>();
  EXPECT_EQ(io::parse_edge(r.framework, "1-2"), 0);
  EXPECT_EQ(io::parse_edge(r.framework, "3,4"), 5);
  EXPECT_EQ(io::parse_edge(r.framework, "4-3"), 5);
  EXPECT_THROW(io::parse_edge(r.framework, "1-5"), Error);
  EXPECT_THROW(io::parse_edge(r.framework, "12"), ParseError);
}

TEST(Files, AtomicWriteReplacesContent) {
  const auto dir = scratch_dir("atomic");
  const auto path = dir / "out.csv";
  io::write_atomically(path, "first\n");
  io::write_atomically(path, "second\n");
  EXPECT_EQ(io::read_file(path), "second\n");
  int entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
  EXPECT_EQ(entries, 1);
  EXPECT_THROW(io::write_atomically(dir / "missing" / "x.csv", "x"), Error);
  fs::remove_all(dir);
}

TEST(Tolerances, Overrides) {
  const auto t = parse_tolerance_overrides("rank_epsilon=1e-12, tangency=1e-5");
  EXPECT_EQ(t.rank_epsilon, 1e-12);
  EXPECT_EQ(t.solvability, Tolerances{}.solvability);
  EXPECT_THROW(parse_tolerance_overrides("bogus=1"), ParseError);
  EXPECT_THROW(parse_tolerance_overrides("tangency=-1"), ParseError);
  EXPECT_THROW(parse_tolerance_overrides("tangency"), ParseError);
  ::setenv("GAUGE_RIG_TOL", "projection_gate=0.5", 1);
  EXPECT_EQ(tolerances_from_environment().projection_gate, 0.5);
  ::unsetenv("GAUGE_RIG_TOL");
  EXPECT_EQ(tolerances_from_environment().projection_gate, Tolerances{}.projection_gate);
}

TEST(Commands, SimulateThenReduce) {
  const auto dir = scratch_dir("reduce");
  cli::RunConfig sim;
  sim.input = kData + "/four_masses_six_rods.json";
  sim.t_end = 0.5;
  sim.step = 1e-2;
  sim.out = (dir / "traj.csv").string();
  std::ostringstream log;
  ASSERT_EQ(cli::cmd_simulate(sim, log), 0);
  EXPECT_NE(log.str().find("simulated 50 steps"), std::string::npos) << log.str();

  cli::RunConfig red;
  red.input = sim.input;
  red.trajectory = sim.out;
  std::ostringstream csv;
  ASSERT_EQ(cli::cmd_reduce(red, csv), 0);
  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "t,x,y,theta,p_x,p_y,p_theta,H_R");
  int rows = 0;
  while (std::getline(lines, line)) {
    std::vector<double> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(std::stod(cell));
    ASSERT_EQ(cells.size(), 8u);
    EXPECT_NEAR(cells[6], 3.0, 1e-10);
    EXPECT_NEAR(cells[7], 1.5, 1e-10);
    EXPECT_NEAR(cells[3], std::numbers::pi / 2 + cells[0], 1e-8);
    ++rows;
  }
  EXPECT_EQ(rows, 51);
  fs::remove_all(dir);
}

TEST(Commands, AnalyzeReport) {
  cli::RunConfig cfg;
  cfg.input = kData + "/four_masses_six_rods.json";
  cfg.format = "json";
  std::ostringstream out;
  ASSERT_EQ(cli::cmd_analyze(cfg, out), 0);
  EXPECT_NE(out.str().find("gauge dimension: 1; self-stress: (-3,-3,-3,1,1,1)"), std::string::npos);
  EXPECT_NE(out.str().find("\"gauge_dimension\": 1"), std::string::npos);
}

TEST(Commands, ValidationAndFailures) {
  cli::RunConfig cfg;
  cfg.input = kData + "/four_masses_six_rods.json";
  cfg.step = -1;
  std::ostringstream out;
  EXPECT_THROW(cli::cmd_simulate(cfg, out), ParseError);
  cli::RunConfig fix;
  fix.input = kData + "/four_masses_five_rods.json";
  fix.fixed_edge = "1-2";
  EXPECT_THROW(cli::cmd_gauge_fix(fix, out), GaugeFixingFailure);
  cli::RunConfig red;
  red.input = kData + "/triangle.json";
  red.trajectory = "whatever.csv";
  EXPECT_THROW(cli::cmd_reduce(red, out), InvalidFramework);
}
