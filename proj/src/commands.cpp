#include "gauge_rig/commands.hpp"

#include <json.hpp>

#include <cmath>
#include <iomanip>
#include <iostream>
#include <ostream>
#include <random>
#include <sstream>

#include "gauge_rig/analytic_oracle.hpp"
#include "gauge_rig/constraint_chain.hpp"
#include "gauge_rig/dynamics.hpp"
#include "gauge_rig/gauge_lab.hpp"
#include "gauge_rig/reduced_model.hpp"
#include "gauge_rig/sampling.hpp"

namespace gauge_rig::cli {

using nlohmann::json;

void RunConfig::validate() const {
  if (!(step > 0)) throw ParseError("--step must be positive");
  if (!(t_end > 0)) throw ParseError("--t-end must be positive");
  if (!std::isfinite(omega) || !std::isfinite(lambda)) throw ParseError("--omega and --lambda must be finite");
  io::parse_format(format);
  for (const auto& spec : xi) io::parse_policy(spec);
}

namespace {

json to_json(const VectorX<double>& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json to_json(const MatrixX<double>& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(to_json(VectorX<double>(m.row(i).transpose())));
  return rows;
}

json columns_to_json(const MatrixX<double>& m) {
  json cols = json::array();
  for (Eigen::Index j = 0; j < m.cols(); ++j) cols.push_back(to_json(VectorX<double>(m.col(j))));
  return cols;
}

std::string tuple_text(const Eigen::VectorXi& v) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v(i));
  return s + ")";
}

std::string tuple_text(const VectorX<double>& v) {
  std::ostringstream s;
  s << std::setprecision(6) << "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) s << (i ? "," : "") << v(i);
  s << ")";
  return s.str();
}

struct Loaded {
  io::FrameworkDocument doc;
  const PointSet<double>& positions() const { return doc.configuration->positions; }
};

Loaded load_with_positions(const RunConfig& config) {
  if (config.input.empty()) throw ParseError("--input is required");
  Loaded l{io::load_framework(config.input)};
  if (!l.doc.configuration) throw ParseError(config.input + ": document has no 'positions'");
  return l;
}

GaugePolicy<double> first_policy(const RunConfig& config) {
  return config.xi.empty() ? io::parse_policy("0") : io::parse_policy(config.xi.front());
}

void emit(const RunConfig& config, const std::string& content, std::ostream& out) {
  if (config.out.empty())
    out << content;
  else
    io::write_atomically(config.out, content);
}

std::string export_trajectory(const RunConfig& config, const RodFramework<double>& fw, const Trajectory<double>& traj) {
  return io::parse_format(config.format) == io::Format::json ? io::trajectory_to_json(fw, traj)
                                                             : io::trajectory_to_csv(fw, traj);
}

}  // namespace

int cmd_analyze(const RunConfig& config, std::ostream& out) {
  config.validate();
  const auto loaded = load_with_positions(config);
  const auto& fw = loaded.doc.framework;
  const auto& q = loaded.positions();
  const auto& tol = config.tolerances;

  const auto centre = center_of_mass(fw, q);
  const PointSet<double> p =
      fw.masses().asDiagonal() * (config.omega * rotate_quarter_turn(PointSet<double>(q.rowwise() - centre)));
  const auto system = assemble_tension_system(fw, q, p, tol);

  VectorX<double> tensions = VectorX<double>::Zero(fw.edge_count());
  if (system.solvable) {
    tensions = system.gauge_dimension() == 0
                   ? solve_tensions(system, VectorX<double>(0)).tensions
                   : solve_tensions_with_edge_value(system, 0, config.lambda).tensions;
  }
  const PhasePoint<double> point(q, tensions, p);
  const auto r = residuals(fw, point);

  json report;
  json edges = json::array();
  for (int k = 0; k < fw.edge_count(); ++k) edges.push_back(fw.edge_label(std::size_t(k)));
  report["edges"] = edges;
  report["omega"] = config.omega;
  report["lambda"] = config.lambda;
  report["residuals"] = {{"c0", to_json(r.c0)}, {"c1", to_json(r.c1)}, {"c2", to_json(r.c2)}, {"c3", to_json(r.c3)}};
  json integer_basis = json::array();
  for (Eigen::Index j = 0; j < system.self_stress_basis.cols(); ++j) {
    const Eigen::VectorXi v = integer_direction(VectorX<double>(system.self_stress_basis.col(j)));
    integer_basis.push_back(v.size() ? json(std::vector<int>(v.data(), v.data() + v.size())) : json(nullptr));
  }
  const double m0 = fw.mass(0), l0 = fw.rest_length(0);
  report["tension_system"] = {{"matrix", to_json(system.matrix)},
                              {"normalized_matrix", to_json(normalized_tension_matrix(system.matrix, m0, l0))},
                              {"normalization", m0 / (l0 * l0)},
                              {"rhs", to_json(system.rhs)},
                              {"rank", system.rank},
                              {"singular_values", to_json(system.singular_values)},
                              {"self_stress_basis", columns_to_json(system.self_stress_basis)},
                              {"self_stress_integer", integer_basis},
                              {"gauge_dimension", system.gauge_dimension()},
                              {"solvable", system.solvable},
                              {"max_violation", system.max_violation},
                              {"warnings", system.warnings}};
  report["tensions"] = to_json(tensions);

  out << "edges: " << fw.edge_count() << ", rank: " << system.rank << "\n";
  out << "gauge dimension: " << system.gauge_dimension();
  for (Eigen::Index j = 0; j < system.self_stress_basis.cols(); ++j) {
    const Eigen::VectorXi v = integer_direction(VectorX<double>(system.self_stress_basis.col(j)));
    out << "; self-stress: "
        << (v.size() ? tuple_text(v) : tuple_text(VectorX<double>(system.self_stress_basis.col(j))));
  }
  out << "\nsolvable: " << (system.solvable ? "yes" : "no") << " (max violation " << system.max_violation << ")\n";
  out << "max |c1| " << r.max_c1() << ", max |c2| " << r.max_c2() << ", max |c3| " << r.max_c3() << "\n";
  for (const auto& w : system.warnings) out << "warning: " << w << "\n";
  if (!config.out.empty()) io::write_atomically(config.out, report.dump(2) + "\n");
  else if (config.format == "json") out << report.dump(2) << "\n";
  return 0;
}

int cmd_simulate(const RunConfig& config, std::ostream& out) {
  config.validate();
  const auto loaded = load_with_positions(config);
  const auto& fw = loaded.doc.framework;
  const auto initial = prepare_initial_data(fw, loaded.positions(), config.omega, config.lambda, 0, config.tolerances);
  IntegrationOptions options;
  options.tolerances = config.tolerances;
  const auto traj = integrate(fw, initial, first_policy(config), config.t_end, config.step, options);

  const std::string content = export_trajectory(config, fw, traj);
  if (config.out.empty()) out << content;
  else io::write_atomically(config.out, content);

  double drift = 0, worst = 0;
  for (std::size_t s = 0; s < traj.size(); ++s) {
    drift = std::max(drift, std::abs(traj.energy[s] - traj.energy.front()));
    worst = std::max({worst, traj.c1_max[s], traj.c2_max[s], traj.c3_max[s]});
  }
  std::ostream& summary = config.out.empty() ? std::cerr : out;
  summary << "simulated " << traj.size() - 1 << " steps to t=" << traj.times.back() << " with xi=" << traj.policy_name
          << "; final c1/c2/c3 max " << traj.c1_max.back() << " " << traj.c2_max.back() << " " << traj.c3_max.back()
          << "; max constraint drift " << worst << "; energy drift " << drift << "\n";
  return 0;
}

int cmd_gauge_compare(const RunConfig& config, std::ostream& out) {
  config.validate();
  const auto loaded = load_with_positions(config);
  const auto& fw = loaded.doc.framework;
  const auto initial = prepare_initial_data(fw, loaded.positions(), config.omega, config.lambda, 0, config.tolerances);
  const std::vector<std::string> specs = config.xi.empty() ? std::vector<std::string>{"0", "cos:1,1", "0.5"} : config.xi;
  std::vector<GaugePolicy<double>> policies;
  for (const auto& s : specs) policies.push_back(io::parse_policy(s));
  IntegrationOptions options;
  options.tolerances = config.tolerances;
  const auto cmp = gauge_orbit_sample(fw, initial, policies, config.t_end, config.step, options);

  json report;
  report["policies"] = cmp.policies;
  report["invariant"] = {{"positions", cmp.position_discrepancy},
                         {"momenta", cmp.momentum_discrepancy},
                         {"forces", cmp.force_discrepancy},
                         {"energy", cmp.energy_discrepancy},
                         {"invariant_functionals", cmp.invariant_functional_discrepancy}};
  json spreads = json::object(), finals = json::object();
  for (int k = 0; k < fw.edge_count(); ++k) {
    spreads[fw.edge_label(std::size_t(k))] = cmp.tension_spread[std::size_t(k)];
    finals[fw.edge_label(std::size_t(k))] = cmp.final_tension_spread[std::size_t(k)];
  }
  report["tension_spread"] = spreads;
  report["final_tension_spread"] = finals;
  report["invariant_functional_basis"] = columns_to_json(cmp.functionals.invariant);
  report["gauge_directions"] = columns_to_json(cmp.functionals.pure_gauge);

  // Invariant functional values over time, per policy, thinned to ~200 samples.
  const auto& inv = cmp.functionals.invariant;
  const std::size_t samples = cmp.runs.front().size();
  const std::size_t stride = std::max<std::size_t>(1, samples / 200);
  json series = json::object();
  std::vector<double> times;
  for (std::size_t s = 0; s < samples; s += stride) times.push_back(cmp.runs.front().times[s]);
  series["t"] = times;
  for (const auto& run : cmp.runs) {
    json values = json::array();
    for (std::size_t s = 0; s < samples; s += stride) values.push_back(to_json(VectorX<double>(inv.transpose() * run.states[s].tensions())));
    series[run.policy_name] = values;
  }
  report["invariant_functional_values"] = series;

  out << "policies:";
  for (const auto& p : cmp.policies) out << " " << p;
  out << "\nmax discrepancy positions " << cmp.position_discrepancy << ", momenta " << cmp.momentum_discrepancy
      << ", forces " << cmp.force_discrepancy << "\n";
  out << "final tension spread:";
  for (int k = 0; k < fw.edge_count(); ++k)
    out << " " << fw.edge_label(std::size_t(k)) << "=" << cmp.final_tension_spread[std::size_t(k)];
  out << "\n";
  if (!config.out.empty()) io::write_atomically(config.out, report.dump(2) + "\n");
  else if (config.format == "json") out << report.dump(2) << "\n";
  return 0;
}

int cmd_gauge_fix(const RunConfig& config, std::ostream& out) {
  config.validate();
  const auto loaded = load_with_positions(config);
  const auto& fw = loaded.doc.framework;
  const int edge = config.fixed_edge.empty() ? 0 : io::parse_edge(fw, config.fixed_edge);
  const auto initial = prepare_initial_data(fw, loaded.positions(), config.omega, config.lambda, 0, config.tolerances);
  const auto fixing = gauge_fix(fw, initial, edge, config.fixed_value, config.tolerances);

  IntegrationOptions options;
  options.tolerances = config.tolerances;
  const auto traj = integrate(fw, fixing.point, fixing.induced_policy, config.t_end, config.step, options);
  double deviation = 0;
  for (const auto& s : traj.states) deviation = std::max(deviation, std::abs(s.tensions()(edge) - config.fixed_value));

  // Values below 1e-12 print as 0 so the report does not show roundoff noise.
  VectorX<double> xi = fixing.induced_xi;
  for (Eigen::Index k = 0; k < xi.size(); ++k) {
    if (std::abs(xi(k)) < 1e-12) xi(k) = 0.0;
  }
  out << "fixed edge " << fw.edge_label(std::size_t(edge)) << " at " << config.fixed_value << "\n";
  out << "induced Xi = " << (xi.size() == 1 ? tuple_text(xi).substr(1, tuple_text(xi).size() - 2) : tuple_text(xi))
      << "\n";
  out << "initial tensions " << tuple_text(fixing.point.tensions()) << "\n";
  out << "max |tension(" << fw.edge_label(std::size_t(edge)) << ") - " << config.fixed_value << "| over run: " << deviation
      << "\n";
  if (!config.out.empty()) io::write_atomically(config.out, export_trajectory(config, fw, traj));
  return 0;
}

int cmd_reduce(const RunConfig& config, std::ostream& out) {
  config.validate();
  if (config.input.empty()) throw ParseError("--input is required");
  if (config.trajectory.empty()) throw ParseError("--trajectory is required");
  const auto doc = io::load_framework(config.input);
  const auto& fw = doc.framework;
  const auto [m, ell] = four_mass_parameters(fw);
  const std::string text = io::read_file(config.trajectory);
  const auto format = config.trajectory.size() >= 5 && config.trajectory.ends_with(".json") ? io::Format::json
                                                                                           : io::Format::csv;
  const auto samples = io::parse_trajectory(fw, text, format);
  std::vector<double> times, energies;
  std::vector<ReducedState<double>> states;
  for (const auto& s : samples) {
    times.push_back(s.t);
    states.push_back(reduce(fw, s.state));
    energies.push_back(reduced_hamiltonian(states.back(), m, ell));
  }
  emit(config, io::reduced_trajectory_to_csv(times, states, energies), out);
  return 0;
}

int cmd_oracle_check(const RunConfig& config, std::ostream& out) {
  config.validate();
  struct Row {
    std::string name;
    double value;
    double threshold;
    bool below;  // pass iff value < threshold (or > when false)
  };
  std::vector<Row> rows;
  std::mt19937_64 rng(config.seed);
  const auto& tol = config.tolerances;

  // Closed-form family stays on the constraint manifold.
  {
    double worst = 0;
    for (double omega : {0.0, 1.0, -1.7}) {
      AnalyticSolution<double> sol{omega, 1.0, 1.0, [](double t) { return std::sin(t); }};
      const auto fw = reference_framework<double>(1.0, 1.0).framework;
      for (double t = 0; t < 7; t += 0.37) {
        const auto r = residuals(fw, analytic_state(sol, t));
        worst = std::max({worst, r.max_c1(), r.max_c2(), r.max_c3()});
      }
    }
    rows.push_back({"analytic_state constraint residuals", worst, 1e-12, true});
  }
  {
    AnalyticSolution<double> sol{1.0, 1.0, 1.0, [](double t) { return std::sin(t); }};
    double worst = 0;
    for (double t = 0; t < 7; t += 0.5) worst = std::max(worst, verify_eom(sol, t, 1e-4));
    rows.push_back({"EOM finite-difference residual (f = sin)", worst, 1e-6, true});
    const double corrupt = verify_eom<double>(sol, 0.3, 1e-4, [](double t) {
      VectorX<double> v(6);
      v << std::sin(t), std::sin(t), std::sin(t), 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0;
      return v;
    });
    rows.push_back({"EOM negative control (outer tensions not adjusted)", corrupt, 1e-2, false});
  }
  {
    const auto ref = reference_framework<double>(1.0, 1.0);
    double worst = 0;
    for (int i = 0; i < 20; ++i) {
      const auto sample = random_reference_point(ref.framework, ref.configuration.positions, rng, true);
      const auto& pt = sample.point;
      const MatrixX<double> fd = coefficient_extraction(ref.framework, pt.positions(), pt.momenta());
      const MatrixX<double> a = assemble_tension_system(ref.framework, pt, tol).matrix;
      worst = std::max(worst, (fd - a).norm() / a.norm());
    }
    for (int i = 0; i < 20; ++i) {
      const auto rf = random_framework(6, 5, rng);
      const PointSet<double> p = random_momenta(6, rng);
      const MatrixX<double> fd = coefficient_extraction(rf.framework, rf.configuration.positions, p);
      const MatrixX<double> a = assemble_tension_system(rf.framework, rf.configuration.positions, p, tol).matrix;
      worst = std::max(worst, (fd - a).norm() / a.norm());
    }
    rows.push_back({"coefficient extraction vs assembled matrix (relative)", worst, 1e-6, true});
  }
  {
    const auto ref = reference_framework<double>(1.0, 1.0);
    const auto pt = prepare_initial_data(ref.framework, ref.configuration.positions, 1.0, 0.0);
    const MatrixX<double> fd = coefficient_extraction(ref.framework, pt.positions(), pt.momenta());
    rows.push_back({"extracted matrix vs integer four-mass matrix",
                    (normalized_tension_matrix<double>(fd, 1.0, 1.0) - four_mass_tension_matrix<double>()).cwiseAbs().maxCoeff(),
                    1e-6, true});
    const auto system = assemble_tension_system(ref.framework, pt, tol);
    Eigen::VectorXi expected(6);
    expected << -3, -3, -3, 1, 1, 1;
    const bool kernel_ok = system.rank == 5 && system.gauge_dimension() == 1 &&
                           integer_direction(VectorX<double>(system.self_stress_basis.col(0))) == expected;
    rows.push_back({"rank 5 with self-stress (-3,-3,-3,1,1,1)", kernel_ok ? 0.0 : 1.0, 0.5, true});
  }

  bool all = true;
  out << std::left << std::setw(56) << "check" << std::setw(14) << "value" << std::setw(12) << "threshold" << "result\n";
  for (const auto& r : rows) {
    const bool pass = r.below ? r.value < r.threshold : r.value > r.threshold;
    all = all && pass;
    std::ostringstream v, t;
    v << std::setprecision(3) << r.value;
    t << (r.below ? "< " : "> ") << std::setprecision(3) << r.threshold;
    out << std::setw(56) << r.name << std::setw(14) << v.str() << std::setw(12) << t.str() << (pass ? "PASS" : "FAIL")
        << "\n";
  }
  return all ? 0 : 1;
}

}  // namespace gauge_rig::cli
