#pragma once

// Gauge-parameterized Hamiltonian dynamics on the final constraint manifold.
//
// The vector field is
//   dq_i/dt = p_i / m_i
//   dp_i/dt = -sum_{j~i} q_ij (q_i - q_j)
//   dq_t/dt = pinv(A) b + U xi
// where A q_t' = b is the tangency condition d(c3)/dt = 0, U is the
// self-stress basis and xi the policy's kernel coefficients. Along the
// flow, with a_i the accelerations and a'_i = -(1/m_i) sum q_ij (v_i - v_j),
//   b_ij = 6 (v_i - v_j).(a_i - a_j) + 2 (q_i - q_j).(a'_i - a'_j).

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "gauge_rig/constraint_chain.hpp"
#include "gauge_rig/framework.hpp"
#include "gauge_rig/linalg.hpp"
#include "gauge_rig/tolerances.hpp"

namespace gauge_rig {

/// Kinetic energy plus the tension-weighted length constraints.
template <typename Scalar>
Scalar hamiltonian(const RodFramework<Scalar>& fw, const PhasePoint<Scalar>& point) {
  point.check_against(fw);
  const auto& q = point.positions();
  Scalar kinetic = 0;
  for (int i = 0; i < fw.vertex_count(); ++i)
    kinetic += point.momenta().row(i).squaredNorm() / (Scalar(2) * fw.mass(i));
  Scalar constraint = 0;
  for (int k = 0; k < fw.edge_count(); ++k) {
    const Edge& e = fw.edge(k);
    const Scalar ell = fw.rest_length(k);
    constraint += point.tensions()(k) * ((q.row(e.first) - q.row(e.second)).squaredNorm() - ell * ell);
  }
  return kinetic + constraint / Scalar(2);
}

/// The arbitrary part of the dynamics: kernel coefficients as a function of
/// time and state. The evaluator receives the current gauge dimension and
/// must return that many coefficients.
template <typename Scalar>
class GaugePolicy {
 public:
  using Evaluator = std::function<VectorX<Scalar>(Scalar, const PhasePoint<Scalar>&, int)>;

  GaugePolicy() : GaugePolicy(zero()) {}
  GaugePolicy(std::string name, Evaluator evaluator) : name_(std::move(name)), eval_(std::move(evaluator)) {}

  /// Same scalar xi(t) on every kernel direction.
  static GaugePolicy of_time(std::string name, std::function<Scalar(Scalar)> xi) {
    return GaugePolicy(std::move(name), [xi = std::move(xi)](Scalar t, const PhasePoint<Scalar>&, int dim) {
      return VectorX<Scalar>::Constant(dim, xi(t)).eval();
    });
  }
  static GaugePolicy zero() {
    return of_time("0", [](Scalar) { return Scalar(0); });
  }
  static GaugePolicy constant(Scalar c) {
    return of_time("const:" + std::to_string(double(c)), [c](Scalar) { return c; });
  }

  VectorX<Scalar> operator()(Scalar t, const PhasePoint<Scalar>& point, int gauge_dimension) const {
    VectorX<Scalar> xi = eval_(t, point, gauge_dimension);
    if (xi.size() != gauge_dimension)
      throw Error("gauge policy '" + name_ + "' returned " + std::to_string(xi.size()) +
                  " coefficients for gauge dimension " + std::to_string(gauge_dimension));
    return xi;
  }

  const std::string& name() const { return name_; }

 private:
  std::string name_;
  Evaluator eval_;
};

template <typename Scalar>
struct VectorFieldValue {
  PointSet<Scalar> dq;
  PointSet<Scalar> dp;
  VectorX<Scalar> dtension;
  /// Identically zero: the primary constraints are preserved.
  VectorX<Scalar> dmultiplier_momenta;
};

/// Affine space of admissible tension rates: particular + span(kernel).
template <typename Scalar>
struct MultiplierRates {
  VectorX<Scalar> particular;
  MatrixX<Scalar> kernel;
  VectorX<Scalar> rhs;
  /// Worst |u.b| / (|u| * scale); scale bounds the terms of b by Cauchy-Schwarz.
  double compatibility_residual = 0.0;
  TensionSystem<Scalar> system;
};

namespace detail {

template <typename Scalar>
MultiplierRates<Scalar> multiplier_rates(const RodFramework<Scalar>& fw, const PhasePoint<Scalar>& point,
                                         const Tolerances& tol, bool enforce) {
  using std::abs;
  const auto& q = point.positions();
  const PointSet<Scalar> v = velocities(fw, point.momenta());
  const PointSet<Scalar> a = accelerations(fw, q, point.tensions());
  const PointSet<Scalar> a_rate = accelerations(fw, v, point.tensions());

  MultiplierRates<Scalar> out;
  out.system = assemble_tension_system(fw, q, point.momenta(), tol);
  const int ne = fw.edge_count();
  out.rhs.resize(ne);
  VectorX<Scalar> magnitude(ne);
  for (int k = 0; k < ne; ++k) {
    const Edge& e = fw.edge(k);
    const auto dq = (q.row(e.first) - q.row(e.second)).eval();
    const auto dv = (v.row(e.first) - v.row(e.second)).eval();
    const auto da = (a.row(e.first) - a.row(e.second)).eval();
    const auto da_rate = (a_rate.row(e.first) - a_rate.row(e.second)).eval();
    out.rhs(k) = Scalar(6) * dv.dot(da) + Scalar(2) * dq.dot(da_rate);
    magnitude(k) = Scalar(6) * dv.norm() * da.norm() + Scalar(2) * dq.norm() * da_rate.norm();
  }
  out.kernel = out.system.self_stress_basis;
  const Scalar scale = magnitude.norm();
  if (scale > Scalar(0)) {
    for (Eigen::Index j = 0; j < out.kernel.cols(); ++j) {
      const auto u = out.kernel.col(j);
      out.compatibility_residual =
          std::max(out.compatibility_residual, double(abs(u.dot(out.rhs)) / (u.norm() * scale)));
    }
  }
  if (enforce && out.compatibility_residual > tol.tangency)
    throw Unsolvable("tension-rate system incompatible (residual " + std::to_string(out.compatibility_residual) +
                         "); point is off the constraint manifold",
                     out.compatibility_residual);
  out.particular = out.system.pseudo_inverse * out.rhs;
  return out;
}

template <typename Scalar>
VectorFieldValue<Scalar> evaluate_field(const RodFramework<Scalar>& fw, const PhasePoint<Scalar>& point,
                                        const GaugePolicy<Scalar>& policy, Scalar t, const Tolerances& tol,
                                        bool enforce) {
  const auto rates = multiplier_rates(fw, point, tol, enforce);
  VectorFieldValue<Scalar> x;
  x.dq = velocities(fw, point.momenta());
  x.dp = particle_forces(fw, point.positions(), point.tensions());
  x.dtension = rates.particular + rates.kernel * policy(t, point, int(rates.kernel.cols()));
  x.dmultiplier_momenta = VectorX<Scalar>::Zero(fw.edge_count());
  return x;
}

}  // namespace detail

/// Affine solution of the tangency condition for the tension rates. Throws
/// Unsolvable if the compatibility residual exceeds tol.tangency.
template <typename Scalar>
MultiplierRates<Scalar> tangency_solve_multiplier_rates(const RodFramework<Scalar>& fw,
                                                        const PhasePoint<Scalar>& point,
                                                        const Tolerances& tol = {}) {
  point.check_against(fw);
  return detail::multiplier_rates(fw, point, tol, true);
}

template <typename Scalar>
VectorFieldValue<Scalar> vector_field(const RodFramework<Scalar>& fw, const PhasePoint<Scalar>& point,
                                      const GaugePolicy<Scalar>& policy, Scalar t, const Tolerances& tol = {}) {
  point.check_against(fw);
  return detail::evaluate_field(fw, point, policy, t, tol, true);
}

/// Least-squares angular velocity: v_i - v_j ~ omega * R90 (q_i - q_j).
template <typename Scalar>
Scalar fit_angular_velocity(const RodFramework<Scalar>& fw, const PhasePoint<Scalar>& point) {
  const auto& q = point.positions();
  const PointSet<Scalar> v = velocities(fw, point.momenta());
  Scalar num = 0, den = 0;
  for (const Edge& e : fw.edges()) {
    const Eigen::Matrix<Scalar, 1, 2> dq = q.row(e.first) - q.row(e.second);
    const Eigen::Matrix<Scalar, 1, 2> dv = v.row(e.first) - v.row(e.second);
    const Eigen::Matrix<Scalar, 1, 2> turned(-dq(1), dq(0));
    num += turned.dot(dv);
    den += dq.squaredNorm();
  }
  return den > Scalar(0) ? num / den : Scalar(0);
}

/// Newton/least-squares projection onto the final constraint manifold:
/// positions onto c1 = 0 (Gauss-Newton), momenta orthogonally onto c2 = 0,
/// tensions onto the c3 = 0 affine space keeping their self-stress component.
template <typename Scalar>
PhasePoint<Scalar> project_to_constraint_manifold(const RodFramework<Scalar>& fw, const PhasePoint<Scalar>& point,
                                                  const Tolerances& tol = {}) {
  using std::abs;
  point.check_against(fw);
  const int ne = fw.edge_count();
  const VectorX<Scalar> ell2 = fw.rest_lengths().cwiseAbs2();
  PointSet<Scalar> q = point.positions();

  auto length_residual = [&](const PointSet<Scalar>& x) {
    VectorX<Scalar> c(ne);
    for (int k = 0; k < ne; ++k) {
      const Edge& e = fw.edge(k);
      c(k) = (x.row(e.first) - x.row(e.second)).squaredNorm() - ell2(k);
    }
    return c;
  };

  VectorX<Scalar> c = length_residual(q);
  const auto relative = [&](const VectorX<Scalar>& r) {
    return ne ? double(r.cwiseQuotient(ell2).cwiseAbs().maxCoeff()) : 0.0;
  };
  if (relative(c) > tol.projection_gate)
    throw ProjectionFailure("point is outside the projection basin (relative length residual " +
                            std::to_string(relative(c)) + ")");
  const Scalar roundoff = Scalar(8) * Eigen::NumTraits<Scalar>::epsilon() *
                          std::max(Scalar(1), q.cwiseAbs().maxCoeff());
  int iterations = 0;
  while (relative(c) > tol.projection_target) {
    if (iterations++ >= tol.projection_max_iterations)
      throw ProjectionFailure("position projection did not converge in " +
                              std::to_string(tol.projection_max_iterations) + " iterations");
    const auto rr = rank_reveal(rigidity_matrix(fw, q), tol.rank_epsilon);
    const VectorX<Scalar> step = rr.pseudo_inverse * c;
    flat(q) -= step;
    c = length_residual(q);
    if (step.cwiseAbs().maxCoeff() <= roundoff) break;
  }

  const MatrixX<Scalar> b = rigidity_matrix(fw, q) * fw.inverse_mass_diagonal().asDiagonal();
  PointSet<Scalar> p = point.momenta();
  const auto rb = rank_reveal(b, tol.rank_epsilon);
  const VectorX<Scalar> correction = rb.pseudo_inverse * (b * flat(p));
  flat(p) -= correction;

  const auto system = assemble_tension_system(fw, q, p, tol);
  VectorX<Scalar> tension = point.tensions();
  tension += system.pseudo_inverse * (system.rhs - system.matrix * tension);
  return PhasePoint<Scalar>(std::move(q), std::move(tension), std::move(p));
}

/// Rigid rotation about the centre of mass with angular velocity omega, and
/// tensions whose value on `designated_edge` is lambda. With no self-stress
/// the tensions are unique and lambda is ignored.
template <typename Scalar>
PhasePoint<Scalar> prepare_initial_data(const RodFramework<Scalar>& fw, const PointSet<Scalar>& q, Scalar omega,
                                        Scalar lambda, int designated_edge = 0, const Tolerances& tol = {}) {
  using std::abs;
  check_shape(fw, q);
  for (int k = 0; k < fw.edge_count(); ++k) {
    const Edge& e = fw.edge(k);
    const Scalar ell2 = fw.rest_length(k) * fw.rest_length(k);
    const Scalar rel = abs((q.row(e.first) - q.row(e.second)).squaredNorm() - ell2) / ell2;
    if (double(rel) > tol.manifold_warning)
      throw InvalidFramework("configuration violates the length of edge " + fw.edge_label(std::size_t(k)));
  }
  const auto centre = center_of_mass(fw, q);
  const PointSet<Scalar> offsets = q.rowwise() - centre;
  PointSet<Scalar> p = fw.masses().asDiagonal() * (omega * rotate_quarter_turn(offsets));
  const auto system = assemble_tension_system(fw, q, p, tol);
  VectorX<Scalar> tensions;
  if (system.gauge_dimension() == 0) {
    tensions = solve_tensions(system, VectorX<Scalar>(0)).tensions;
  } else {
    tensions = solve_tensions_with_edge_value(system, designated_edge, lambda).tensions;
  }
  return PhasePoint<Scalar>(q, std::move(tensions), std::move(p));
}

template <typename Scalar>
PhasePoint<Scalar> prepare_initial_data(const RodFramework<Scalar>& fw, const Configuration<Scalar>& config,
                                        Scalar omega, Scalar lambda, int designated_edge = 0,
                                        const Tolerances& tol = {}) {
  return prepare_initial_data(fw, config.positions, omega, lambda, designated_edge, tol);
}

/// Time samples with observables.
template <typename Scalar>
struct Trajectory {
  std::string policy_name;
  std::vector<Scalar> times;
  std::vector<PhasePoint<Scalar>> states;
  std::vector<Scalar> energy;
  std::vector<Scalar> c1_max;
  std::vector<Scalar> c2_max;
  std::vector<Scalar> c3_max;
  std::vector<PointSet<Scalar>> forces;

  std::size_t size() const { return times.size(); }
  const PhasePoint<Scalar>& back() const { return states.back(); }
};

struct IntegrationOptions {
  Tolerances tolerances;
  // Record every n-th step (the final state is always recorded).
  std::size_t sample_every = 1;
};

template <typename Scalar>
void record_sample(const RodFramework<Scalar>& fw, Trajectory<Scalar>& traj, Scalar t, PhasePoint<Scalar> state) {
  const auto r = residuals(fw, state);
  traj.times.push_back(t);
  traj.energy.push_back(hamiltonian(fw, state));
  traj.c1_max.push_back(r.max_c1());
  traj.c2_max.push_back(r.max_c2());
  traj.c3_max.push_back(r.max_c3());
  traj.forces.push_back(particle_forces(fw, state.positions(), state.tensions()));
  traj.states.push_back(std::move(state));
}

/// Classical fourth-order Runge-Kutta on (q, p, tensions), policy evaluated
/// at each stage, followed by projection onto the constraint manifold after
/// every step. The step is shrunk so that t_end is hit exactly.
template <typename Scalar>
Trajectory<Scalar> integrate(const RodFramework<Scalar>& fw, const PhasePoint<Scalar>& initial,
                             const GaugePolicy<Scalar>& policy, Scalar t_end, Scalar step,
                             const IntegrationOptions& options = {}) {
  using std::ceil;
  if (!(step > Scalar(0))) throw Error("step must be positive");
  if (!(t_end > Scalar(0))) throw Error("t_end must be positive");
  const auto& tol = options.tolerances;
  const auto n_steps = std::size_t(std::max(Scalar(1), ceil(t_end / step - Scalar(1e-9))));
  const Scalar h = t_end / Scalar(n_steps);

  Trajectory<Scalar> traj;
  traj.policy_name = policy.name();
  PhasePoint<Scalar> y;
  try {
    y = project_to_constraint_manifold(fw, initial, tol);
  } catch (const Error& e) {
    throw IntegrationFailure(std::string("initial data: ") + e.what(), 0);
  }
  record_sample(fw, traj, Scalar(0), y);

  auto advance = [](const PhasePoint<Scalar>& base, const VectorFieldValue<Scalar>& k, Scalar dt) {
    return PhasePoint<Scalar>(base.positions() + dt * k.dq, base.tensions() + dt * k.dtension,
                              base.momenta() + dt * k.dp);
  };

  for (std::size_t n = 0; n < n_steps; ++n) {
    const Scalar t = h * Scalar(n);
    try {
      const auto k1 = detail::evaluate_field(fw, y, policy, t, tol, true);
      const auto k2 = detail::evaluate_field(fw, advance(y, k1, h / 2), policy, t + h / 2, tol, false);
      const auto k3 = detail::evaluate_field(fw, advance(y, k2, h / 2), policy, t + h / 2, tol, false);
      const auto k4 = detail::evaluate_field(fw, advance(y, k3, h), policy, t + h, tol, false);
      PhasePoint<Scalar> next(
          y.positions() + (h / 6) * (k1.dq + 2 * k2.dq + 2 * k3.dq + k4.dq),
          y.tensions() + (h / 6) * (k1.dtension + 2 * k2.dtension + 2 * k3.dtension + k4.dtension),
          y.momenta() + (h / 6) * (k1.dp + 2 * k2.dp + 2 * k3.dp + k4.dp));
      y = project_to_constraint_manifold(fw, next, tol);
    } catch (const IntegrationFailure&) {
      throw;
    } catch (const Error& e) {
      throw IntegrationFailure(e.what(), n + 1);
    }
    if ((n + 1) % options.sample_every == 0 || n + 1 == n_steps)
      record_sample(fw, traj, n + 1 == n_steps ? t_end : h * Scalar(n + 1), y);
  }
  return traj;
}

}  // namespace gauge_rig
