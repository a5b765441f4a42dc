#pragma once

// Gauge experiments: evolving identical initial data under several policies,
// separating gauge-invariant tension functionals from pure-gauge directions,
// and fixing the gauge by pinning one rod's tension.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <future>
#include <string>
#include <vector>

#include "gauge_rig/constraint_chain.hpp"
#include "gauge_rig/dynamics.hpp"

namespace gauge_rig {

template <typename Scalar>
struct TensionFunctionals {
  /// Orthonormal columns: linear functionals c with c.u = 0 for every self-stress u.
  MatrixX<Scalar> invariant;
  /// The self-stress space itself (canonical basis).
  MatrixX<Scalar> pure_gauge;
};

template <typename Scalar>
TensionFunctionals<Scalar> classify_tension_functionals(const TensionSystem<Scalar>& system) {
  TensionFunctionals<Scalar> out;
  out.pure_gauge = system.self_stress_basis;
  const int ne = system.edge_count();
  if (system.gauge_dimension() == 0) {
    out.invariant = MatrixX<Scalar>::Identity(ne, ne);
    return out;
  }
  // Left singular vectors of the kernel basis beyond its rank span the complement.
  Eigen::JacobiSVD<MatrixX<Scalar>> svd(system.self_stress_basis, Eigen::ComputeFullU);
  out.invariant = svd.matrixU().rightCols(ne - system.gauge_dimension());
  return out;
}

/// True when the tension functional c annihilates every self-stress.
template <typename Scalar>
bool is_gauge_invariant(const TensionSystem<Scalar>& system, const VectorX<Scalar>& c, double tol = 1e-9) {
  using std::abs;
  for (Eigen::Index k = 0; k < system.self_stress_basis.cols(); ++k) {
    const auto u = system.self_stress_basis.col(k);
    if (double(abs(c.dot(u))) > tol * double(c.norm() * u.norm())) return false;
  }
  return true;
}

template <typename Scalar>
struct GaugeComparison {
  std::vector<std::string> policies;
  std::vector<Trajectory<Scalar>> runs;
  std::vector<PhasePoint<Scalar>> end_states;

  // Max-abs discrepancy against the first policy, over components and samples.
  double position_discrepancy = 0.0;
  double momentum_discrepancy = 0.0;
  double force_discrepancy = 0.0;
  double energy_discrepancy = 0.0;
  /// Per invariant functional (columns of `functionals.invariant`).
  std::vector<double> invariant_functional_discrepancy;

  /// Per edge: max over samples of (max - min across policies).
  std::vector<double> tension_spread;
  /// Per edge: spread at the common final time.
  std::vector<double> final_tension_spread;

  TensionFunctionals<Scalar> functionals;
};

/// Integrates `initial` once per policy (in parallel) and compares the runs.
template <typename Scalar>
GaugeComparison<Scalar> gauge_orbit_sample(const RodFramework<Scalar>& fw, const PhasePoint<Scalar>& initial,
                                           const std::vector<GaugePolicy<Scalar>>& policies, Scalar t_end,
                                           Scalar step, const IntegrationOptions& options = {}) {
  using std::abs;
  if (policies.empty()) throw Error("gauge comparison needs at least one policy");
  GaugeComparison<Scalar> out;

  std::vector<std::future<Trajectory<Scalar>>> jobs;
  jobs.reserve(policies.size());
  for (const auto& policy : policies) {
    out.policies.push_back(policy.name());
    jobs.push_back(std::async(std::launch::async, [&fw, &initial, policy, t_end, step, &options] {
      return integrate(fw, initial, policy, t_end, step, options);
    }));
  }
  for (auto& job : jobs) out.runs.push_back(job.get());
  for (const auto& run : out.runs) out.end_states.push_back(run.back());

  out.functionals = classify_tension_functionals(assemble_tension_system(fw, out.runs.front().states.front(),
                                                                         options.tolerances));
  const auto& inv = out.functionals.invariant;
  const int ne = fw.edge_count();
  out.invariant_functional_discrepancy.assign(std::size_t(inv.cols()), 0.0);
  out.tension_spread.assign(std::size_t(ne), 0.0);
  out.final_tension_spread.assign(std::size_t(ne), 0.0);

  const auto& ref = out.runs.front();
  const std::size_t samples = ref.size();
  for (const auto& run : out.runs) {
    if (run.size() != samples) throw Error("gauge runs produced different sample counts");
  }
  for (std::size_t s = 0; s < samples; ++s) {
    const auto& a = ref.states[s];
    const VectorX<Scalar> ref_invariants = inv.transpose() * a.tensions();
    VectorX<Scalar> lo = a.tensions(), hi = a.tensions();
    for (std::size_t r = 1; r < out.runs.size(); ++r) {
      const auto& run = out.runs[r];
      const auto& b = run.states[s];
      out.position_discrepancy =
          std::max(out.position_discrepancy, double((a.positions() - b.positions()).cwiseAbs().maxCoeff()));
      out.momentum_discrepancy =
          std::max(out.momentum_discrepancy, double((a.momenta() - b.momenta()).cwiseAbs().maxCoeff()));
      out.force_discrepancy =
          std::max(out.force_discrepancy, double((ref.forces[s] - run.forces[s]).cwiseAbs().maxCoeff()));
      out.energy_discrepancy = std::max(out.energy_discrepancy, double(abs(ref.energy[s] - run.energy[s])));
      const VectorX<Scalar> inv_b = inv.transpose() * b.tensions();
      for (Eigen::Index j = 0; j < inv.cols(); ++j) {
        auto& slot = out.invariant_functional_discrepancy[std::size_t(j)];
        slot = std::max(slot, double(abs(ref_invariants(j) - inv_b(j))));
      }
      lo = lo.cwiseMin(b.tensions());
      hi = hi.cwiseMax(b.tensions());
    }
    for (int k = 0; k < ne; ++k) {
      const double spread = double(hi(k) - lo(k));
      out.tension_spread[std::size_t(k)] = std::max(out.tension_spread[std::size_t(k)], spread);
      if (s + 1 == samples) out.final_tension_spread[std::size_t(k)] = spread;
    }
  }
  return out;
}

template <typename Scalar>
struct GaugeFixing {
  int fixed_edge = 0;
  Scalar fixed_value = 0;
  /// Kernel coefficients of the induced policy at `point`.
  VectorX<Scalar> induced_xi;
  /// Input point with the fixed edge's tension set to fixed_value.
  PhasePoint<Scalar> point;
  /// Keeps d(tension on fixed_edge)/dt = 0 along the flow.
  GaugePolicy<Scalar> induced_policy;
};

namespace detail {

template <typename Scalar>
VectorX<Scalar> fixing_coefficients(const MultiplierRates<Scalar>& rates, int edge) {
  // Minimum-norm xi with particular(edge) + sum_k xi_k u_k(edge) = 0.
  return coefficients_for_edge_value(rates.kernel, rates.particular, edge, Scalar(0));
}

}  // namespace detail

/// Gauge fixing surface "tension on fixed_edge = fixed_value".
template <typename Scalar>
GaugeFixing<Scalar> gauge_fix(const RodFramework<Scalar>& fw, const PhasePoint<Scalar>& point, int fixed_edge,
                              Scalar fixed_value, const Tolerances& tol = {}) {
  point.check_against(fw);
  if (fixed_edge < 0 || fixed_edge >= fw.edge_count()) throw GaugeFixingFailure("fixed edge out of range");
  const auto system = assemble_tension_system(fw, point, tol);
  if (system.gauge_dimension() == 0)
    throw GaugeFixingFailure("framework has no self-stress: gauge dimension 0, nothing to fix");

  GaugeFixing<Scalar> out;
  out.fixed_edge = fixed_edge;
  out.fixed_value = fixed_value;
  const auto current = kernel_coordinates(system, point.tensions());
  const VectorX<Scalar> particular = point.tensions() - system.self_stress_basis * current;
  const VectorX<Scalar> coeffs =
      coefficients_for_edge_value(system.self_stress_basis, particular, fixed_edge, fixed_value);
  out.point = PhasePoint<Scalar>(point.positions(), particular + system.self_stress_basis * coeffs, point.momenta());

  out.induced_xi = detail::fixing_coefficients(tangency_solve_multiplier_rates(fw, out.point, tol), fixed_edge);
  out.induced_policy = GaugePolicy<Scalar>(
      "fix:" + fw.edge_label(std::size_t(fixed_edge)),
      [fw, fixed_edge, tol](Scalar, const PhasePoint<Scalar>& state, int) {
        return detail::fixing_coefficients(detail::multiplier_rates(fw, state, tol, false), fixed_edge);
      });
  return out;
}

}  // namespace gauge_rig
