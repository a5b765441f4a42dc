// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gauge_rig/analytic_oracle.hpp"
#include "gauge_rig/constraint_chain.hpp"
#include "gauge_rig/dynamics.hpp"
#include "gauge_rig/gauge_lab.hpp"
#include "gauge_rig/reduced_model.hpp"
#include "gauge_rig/sampling.hpp"

using namespace gauge_rig;

namespace {

const double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what, double value) {
    if (!ok) pass = false;
    detail << (detail.tellp() > 0 ? "; " : "") << what << "=" << value << (ok ? "" : " (!)");
  }
};

struct Criterion {
  int id;
  std::string name;
  double time_limit;  // seconds; 0 for none
  std::function<void(Outcome&)> body;
};

double max_abs(const MatrixX<double>& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

FrameworkWithConfiguration<double> ref() { return reference_framework<double>(); }

void matrix_reproduction(Outcome& o) {
  const auto r = ref();
  const auto pt = prepare_initial_data(r.framework, r.configuration, 1.0, 0.0);
  const auto sys = assemble_tension_system(r.framework, pt);
  const MatrixX<double> m = normalized_tension_matrix(sys.matrix, 1.0, 1.0);
  o.check(max_abs(m - four_mass_tension_matrix<double>()) < 1e-10, "max|M-M26|",
          max_abs(m - four_mass_tension_matrix<double>()));
  o.check(sys.rank == 5, "rank", sys.rank);
  o.check(sys.gauge_dimension() == 1, "gauge_dim", sys.gauge_dimension());
  if (sys.gauge_dimension() == 1) {
    VectorX<double> u(6);
    u << -3, -3, -3, 1, 1, 1;
    const VectorX<double> k = sys.self_stress_basis.col(0);
    const double cosine = std::abs(k.dot(u)) / (k.norm() * u.norm());
    o.check(cosine > 1 - 1e-10, "1-cos", 1 - cosine);
  }
}

void removed_rod(Outcome& o) {
  const auto r = ref();
  const auto five = r.framework.without_edge(r.framework.find_edge("3", "4"));
  const auto pt = prepare_initial_data(five, r.configuration, 1.0, 0.0);
  const auto sys = assemble_tension_system(five, pt);
  o.check(sys.edge_count() == 5, "unknowns", sys.edge_count());
  o.check(sys.rank == 5, "rank", sys.rank);
  o.check(sys.gauge_dimension() == 0, "gauge_dim", sys.gauge_dimension());
  const auto sol = solve_tensions(sys, VectorX<double>(0));
  o.check((sys.matrix * sol.tensions - sys.rhs).norm() < 1e-12, "|A q - rhs|",
          (sys.matrix * sol.tensions - sys.rhs).norm());
  // Uniqueness: the designated value is ignored.
  const auto other = prepare_initial_data(five, r.configuration, 1.0, 5.0);
  o.check(max_abs(other.tensions() - pt.tensions()) == 0.0, "lambda effect", max_abs(other.tensions() - pt.tensions()));
}

void analytic_regression(Outcome& o) {
  const auto r = ref();
  const auto start = prepare_initial_data(r.framework, r.configuration, 1.0, 0.0);
  const auto traj = integrate(r.framework, start, GaugePolicy<double>::zero(), 2 * kPi, 1e-3);
  const AnalyticSolution<double> sol;
  VectorX<double> expected(6);
  expected << 0, 0, 0, 1.0 / 3, 1.0 / 3, 1.0 / 3;
  double pos = 0, ten = 0;
  for (std::size_t s = 0; s < traj.size(); ++s) {
    pos = std::max(pos, max_abs(traj.states[s].positions() - analytic_state(sol, traj.times[s]).positions()));
    ten = std::max(ten, max_abs(traj.states[s].tensions() - expected));
  }
  o.check(pos < 1e-6, "pos err", pos);
  o.check(ten < 1e-8, "tension err", ten);
}

void gauge_invariance(Outcome& o) {
  const auto r = ref();
  const auto start = prepare_initial_data(r.framework, r.configuration, 1.0, 0.0);
  const std::vector<GaugePolicy<double>> policies = {
      GaugePolicy<double>::zero(), GaugePolicy<double>::of_time("cos t", [](double t) { return std::cos(t); })};
  const auto cmp = gauge_orbit_sample(r.framework, start, policies, 2 * kPi, 1e-3);
  o.check(cmp.position_discrepancy < 1e-6, "dq", cmp.position_discrepancy);
  o.check(cmp.momentum_discrepancy < 1e-6, "dp", cmp.momentum_discrepancy);
  o.check(cmp.force_discrepancy < 1e-6, "dF", cmp.force_discrepancy);
  const auto& run = cmp.runs[1];
  double sine = 0, functional = 0;
  for (std::size_t s = 0; s < run.size(); ++s) {
    const auto& t = run.states[s].tensions();
    sine = std::max(sine, std::abs(t(0) - std::sin(run.times[s])));
    functional = std::max(functional, std::abs(t(0) + 3 * t(3) - 1.0));
  }
  o.check(sine < 1e-6, "|q12-sin t|", sine);
  o.check(functional < 1e-8, "|q12+3q23-1|", functional);
}

void gauge_fixing(Outcome& o) {
  const auto r = ref();
  const auto start = prepare_initial_data(r.framework, r.configuration, 1.0, 0.7);
  const int e12 = r.framework.find_edge("1", "2"), e23 = r.framework.find_edge("2", "3");
  const auto fix = gauge_fix(r.framework, start, e12, 0.0);
  o.check(std::abs(fix.induced_xi(0)) < 1e-10, "induced xi", std::abs(fix.induced_xi(0)));
  const auto traj = integrate(r.framework, fix.point, fix.induced_policy, 2 * kPi, 1e-3);
  double q12 = 0, q23 = 0;
  for (const auto& s : traj.states) {
    q12 = std::max(q12, std::abs(s.tensions()(e12)));
    q23 = std::max(q23, std::abs(s.tensions()(e23) - 1.0 / 3));
  }
  o.check(q12 < 1e-8, "max|q12|", q12);
  o.check(q23 < 1e-8, "max|q23-1/3|", q23);
}

void tangency_compatibility(Outcome& o) {
  const auto r = ref();
  std::mt19937_64 rng(20150109);
  std::uniform_real_distribution<double> xi(-1, 1);
  double orth = 0, pattern = 0;
  for (int i = 0; i < 100; ++i) {
    const auto sample = random_reference_point(r.framework, r.configuration.positions, rng);
    const auto rates = tangency_solve_multiplier_rates(r.framework, sample.point);
    if (rates.kernel.cols() != 1) {
      o.check(false, "gauge_dim", double(rates.kernel.cols()));
      return;
    }
    const VectorX<double> u = rates.kernel.col(0).normalized();
    orth = std::max(orth, std::abs(u.dot(rates.rhs)));
    const VectorX<double> dq = rates.particular + rates.kernel * xi(rng);
    for (int k = 1; k < 3; ++k) pattern = std::max(pattern, std::abs(dq(k) - dq(0)));
    for (int k = 3; k < 6; ++k) pattern = std::max(pattern, std::abs(dq(k) + dq(0) / 3));
  }
  o.check(orth < 1e-9, "max|u.b|", orth);
  o.check(pattern < 1e-8, "pattern err", pattern);
}

void reduction_consistency(Outcome& o) {
  const auto r = ref();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  auto boosted = [&](const PhasePoint<double>& pt) {
    PointSet<double> p = pt.momenta();
    p.col(0).array() += u(rng);
    p.col(1).array() += u(rng);
    return PhasePoint<double>(pt.positions(), pt.tensions(), p);
  };

  double commute = 0;
  for (int i = 0; i < 3; ++i) {
    const auto start = boosted(random_reference_point(r.framework, r.configuration.positions, rng, true).point);
    const auto traj = integrate(r.framework, start, GaugePolicy<double>::constant(u(rng)), 2 * kPi, 1e-3);
    const auto a = reduce(r.framework, traj.back());
    const auto b = reduced_flow(reduce(r.framework, start), 1.0, 1.0, 2 * kPi);
    commute = std::max({commute, std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(angle_difference(a.theta, b.theta)),
                        std::abs(a.p_x - b.p_x), std::abs(a.p_y - b.p_y), std::abs(a.p_theta - b.p_theta)});
  }
  o.check(commute < 1e-6, "commute err", commute);

  double energy = 0;
  for (int i = 0; i < 100; ++i) {
    const auto pt = boosted(random_reference_point(r.framework, r.configuration.positions, rng, true).point);
    energy = std::max(energy, std::abs(reduced_hamiltonian(reduce(r.framework, pt), 1.0, 1.0) - hamiltonian(r.framework, pt)));
  }
  o.check(energy < 1e-10, "|H_R-H|", energy);

  double rotating = 0;
  for (double m : {1.0, 0.5}) {
    for (double ell : {1.0, 2.0}) {
      for (double omega : {1.0, -1.5}) {
        const auto fw = reference_framework<double>(ell, m);
        const auto pt = prepare_initial_data(fw.framework, fw.configuration, omega, 0.0);
        const double expected = 1.5 * m * ell * ell * omega * omega;
        rotating = std::max(rotating, std::abs(hamiltonian(fw.framework, pt) - expected) / expected);
      }
    }
  }
  o.check(rotating < 1e-12, "|H-3/2 m l^2 w^2|/H", rotating);
}

void oracle_suite(Outcome& o) {
  const AnalyticSolution<double> sol{1.0, 1.0, 1.0, [](double t) { return std::sin(t); }};
  double eom = 0;
  for (double t = 0; t < 2 * kPi; t += 0.25) eom = std::max(eom, verify_eom(sol, t, 1e-4));
  o.check(eom < 1e-6, "EOM residual", eom);

  const auto r = ref();
  std::mt19937_64 rng(11);
  double rel = 0;
  for (int i = 0; i < 20; ++i) {
    const auto sample = random_reference_point(r.framework, r.configuration.positions, rng, true);
    const auto& pt = sample.point;
    const auto sys = assemble_tension_system(r.framework, pt);
    const MatrixX<double> extracted = coefficient_extraction(r.framework, pt.positions(), pt.momenta());
    rel = std::max(rel, max_abs(extracted - sys.matrix) / max_abs(sys.matrix));
  }
  o.check(rel < 1e-6, "extraction rel err", rel);
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "matrix reproduction", 1.0, matrix_reproduction},
      {2, "removed-rod exercise", 1.0, removed_rod},
      {3, "analytic-solution regression", 10.0, analytic_regression},
      {4, "gauge invariance", 10.0, gauge_invariance},
      {5, "gauge fixing", 0.0, gauge_fixing},
      {6, "tangency compatibility", 0.0, tangency_compatibility},
      {7, "reduction consistency", 0.0, reduction_consistency},
      {8, "oracle suite", 0.0, oracle_suite},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.body(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << (o.detail.tellp() > 0 ? "; " : "") << "exception: " << e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.time_limit > 0) o.check(seconds < c.time_limit, "runtime limit", c.time_limit);
    if (!o.pass) ++failures;
    std::printf("%s  [%d] %-30s %7.3f s  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), seconds,
                o.detail.str().c_str());
  }
  std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
