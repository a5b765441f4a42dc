#pragma once

// Constraint hierarchy for rod-mass systems and the linear system that the
// acceleration-level constraints impose on the rod tensions.
//
// Conventions. With v_i = p_i / m_i and a_i = -(1/m_i) sum_{j~i} q_ij (q_i - q_j):
//   c0_ij = p_ij
//   c1_ij = |q_i - q_j|^2 - l_ij^2
//   c2_ij = 2 (q_i - q_j).(v_i - v_j)                       = d/dt c1
//   c3_ij = 2 |v_i - v_j|^2 + 2 (q_i - q_j).(a_i - a_j)     = d^2/dt^2 c1
// c3 is affine in the tensions: c3 = rhs - A q_t with
//   A   = (1/2) R diag(1/m) R^T   (R the rigidity matrix)
//   rhs = 2 |v_i - v_j|^2.
// For equal masses m and reference length l, (m / l^2) * A is the classical
// 4-mass tension matrix with entries 4, -1, 3, 12, ...; see
// normalized_tension_matrix().

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "gauge_rig/framework.hpp"
#include "gauge_rig/linalg.hpp"
#include "gauge_rig/tolerances.hpp"

namespace gauge_rig {

template <typename Scalar>
struct ConstraintResiduals {
  VectorX<Scalar> c0;
  VectorX<Scalar> c1;
  VectorX<Scalar> c2;
  VectorX<Scalar> c3;

  Scalar max_c1() const { return c1.size() ? c1.cwiseAbs().maxCoeff() : Scalar(0); }
  Scalar max_c2() const { return c2.size() ? c2.cwiseAbs().maxCoeff() : Scalar(0); }
  Scalar max_c3() const { return c3.size() ? c3.cwiseAbs().maxCoeff() : Scalar(0); }
};

template <typename Scalar>
PointSet<Scalar> velocities(const RodFramework<Scalar>& fw, const PointSet<Scalar>& p) {
  return fw.masses().cwiseInverse().asDiagonal() * p;
}

/// Net rod force on every vertex, -sum_{j~i} q_ij (q_i - q_j).
template <typename Scalar>
PointSet<Scalar> particle_forces(const RodFramework<Scalar>& fw, const PointSet<Scalar>& q,
                                 const VectorX<Scalar>& tensions) {
  PointSet<Scalar> f = PointSet<Scalar>::Zero(q.rows(), q.cols());
  for (int k = 0; k < fw.edge_count(); ++k) {
    const Edge& e = fw.edge(k);
    const auto push = (tensions(k) * (q.row(e.first) - q.row(e.second))).eval();
    f.row(e.first) -= push;
    f.row(e.second) += push;
  }
  return f;
}

template <typename Scalar>
PointSet<Scalar> accelerations(const RodFramework<Scalar>& fw, const PointSet<Scalar>& q,
                               const VectorX<Scalar>& tensions) {
  return fw.masses().cwiseInverse().asDiagonal() * particle_forces(fw, q, tensions);
}

template <typename Scalar>
ConstraintResiduals<Scalar> residuals(const RodFramework<Scalar>& fw, const PhasePoint<Scalar>& point) {
  point.check_against(fw);
  const auto& q = point.positions();
  const PointSet<Scalar> v = velocities(fw, point.momenta());
  const PointSet<Scalar> a = accelerations(fw, q, point.tensions());
  const int ne = fw.edge_count();
  ConstraintResiduals<Scalar> r;
  r.c0 = point.multiplier_momenta();
  r.c1.resize(ne);
  r.c2.resize(ne);
  r.c3.resize(ne);
  for (int k = 0; k < ne; ++k) {
    const Edge& e = fw.edge(k);
    const auto dq = (q.row(e.first) - q.row(e.second)).eval();
    const auto dv = (v.row(e.first) - v.row(e.second)).eval();
    const auto da = (a.row(e.first) - a.row(e.second)).eval();
    const Scalar ell = fw.rest_length(k);
    r.c1(k) = dq.squaredNorm() - ell * ell;
    r.c2(k) = Scalar(2) * dq.dot(dv);
    r.c3(k) = Scalar(2) * dv.squaredNorm() + Scalar(2) * dq.dot(da);
  }
  return r;
}

/// Linear system A q_t = rhs for the rod tensions at fixed (q, p).
template <typename Scalar>
struct TensionSystem {
  MatrixX<Scalar> matrix;
  VectorX<Scalar> rhs;
  int rank = 0;
  VectorX<Scalar> singular_values;
  MatrixX<Scalar> pseudo_inverse;
  /// Columns span the self-stress space; canonical scaling (see canonical_basis).
  MatrixX<Scalar> self_stress_basis;
  bool solvable = true;
  double max_violation = 0.0;
  /// Non-fatal diagnostics, e.g. input point not on the velocity manifold.
  std::vector<std::string> warnings;

  int edge_count() const { return int(matrix.rows()); }
  int gauge_dimension() const { return int(self_stress_basis.cols()); }
};

template <typename Scalar>
struct SolvabilityReport {
  bool solvable = true;
  double max_violation = 0.0;
};

/// Worst |u.b| / (|u| |b|) over the self-stress basis.
template <typename Scalar>
SolvabilityReport<Scalar> solvability_check(const MatrixX<Scalar>& self_stress_basis,
                                            const VectorX<Scalar>& b, double tol) {
  using std::abs;
  SolvabilityReport<Scalar> out;
  const Scalar bn = b.norm();
  if (!(bn > Scalar(0))) return out;
  for (Eigen::Index k = 0; k < self_stress_basis.cols(); ++k) {
    const auto u = self_stress_basis.col(k);
    const double violation = double(abs(u.dot(b)) / (u.norm() * bn));
    out.max_violation = std::max(out.max_violation, violation);
  }
  out.solvable = out.max_violation <= tol;
  return out;
}

template <typename Scalar>
SolvabilityReport<Scalar> solvability_check(const TensionSystem<Scalar>& system, double tol = 1e-9) {
  return solvability_check(system.self_stress_basis, system.rhs, tol);
}

/// Assembles A and rhs at (q, p) and analyzes A. Off-manifold inputs are
/// accepted with a warning; a zero-length rod throws DegenerateConfiguration.
template <typename Scalar>
TensionSystem<Scalar> assemble_tension_system(const RodFramework<Scalar>& fw, const PointSet<Scalar>& q,
                                              const PointSet<Scalar>& p, const Tolerances& tol = {}) {
  using std::abs;
  check_shape(fw, q);
  check_shape(fw, p, "momenta");
  const int ne = fw.edge_count();
  TensionSystem<Scalar> sys;

  const PointSet<Scalar> v = velocities(fw, p);
  sys.rhs.resize(ne);
  Scalar worst_c1 = 0, worst_c2 = 0;
  for (int k = 0; k < ne; ++k) {
    const Edge& e = fw.edge(k);
    const auto dq = (q.row(e.first) - q.row(e.second)).eval();
    const auto dv = (v.row(e.first) - v.row(e.second)).eval();
    const Scalar ell2 = fw.rest_length(k) * fw.rest_length(k);
    if (!(dq.squaredNorm() > Scalar(1e-24) * ell2))
      throw DegenerateConfiguration("edge " + fw.edge_label(std::size_t(k)) + " has zero length");
    sys.rhs(k) = Scalar(2) * dv.squaredNorm();
    worst_c1 = std::max(worst_c1, abs(dq.squaredNorm() - ell2) / ell2);
    worst_c2 = std::max(worst_c2, abs(dq.dot(dv)) / (dq.norm() * std::max(dv.norm(), Scalar(1))));
  }
  if (double(worst_c1) > tol.manifold_warning)
    sys.warnings.push_back("positions violate rod lengths (max relative c1 " + std::to_string(double(worst_c1)) + ")");
  if (double(worst_c2) > tol.manifold_warning)
    sys.warnings.push_back("momenta are not rigid along rods (max c2 " + std::to_string(double(worst_c2)) + ")");

  const MatrixX<Scalar> r = rigidity_matrix(fw, q);
  sys.matrix = Scalar(0.5) * r * fw.inverse_mass_diagonal().asDiagonal() * r.transpose();
  sys.matrix = (Scalar(0.5) * (sys.matrix + sys.matrix.transpose())).eval();

  auto rr = rank_reveal(sys.matrix, tol.rank_epsilon);
  sys.rank = rr.rank;
  sys.singular_values = std::move(rr.singular_values);
  sys.pseudo_inverse = std::move(rr.pseudo_inverse);
  sys.self_stress_basis = canonical_basis(rr.kernel);

  const auto report = solvability_check(sys, tol.solvability);
  sys.solvable = report.solvable;
  sys.max_violation = report.max_violation;
  return sys;
}

template <typename Scalar>
TensionSystem<Scalar> assemble_tension_system(const RodFramework<Scalar>& fw, const PhasePoint<Scalar>& point,
                                              const Tolerances& tol = {}) {
  return assemble_tension_system(fw, point.positions(), point.momenta(), tol);
}

/// A scaled by m / l^2; with equal masses m and inner rod length l this is
/// the integer tension matrix of the 4-mass example.
template <typename Scalar>
MatrixX<Scalar> normalized_tension_matrix(const MatrixX<Scalar>& matrix, Scalar m, Scalar ell) {
  return matrix * (m / (ell * ell));
}

template <typename Scalar>
struct TensionSolution {
  /// Minimum-norm solution, orthogonal to the self-stress space.
  VectorX<Scalar> particular;
  VectorX<Scalar> kernel_coefficients;
  VectorX<Scalar> tensions;
};

/// tensions = pinv(A) rhs + sum_k coefficients_k u_k. Throws Unsolvable when
/// rhs has a self-stress component.
template <typename Scalar>
TensionSolution<Scalar> solve_tensions(const TensionSystem<Scalar>& system,
                                       const VectorX<Scalar>& kernel_coefficients) {
  if (!system.solvable)
    throw Unsolvable("tension system is incompatible (self-stress violation " +
                         std::to_string(system.max_violation) + ")",
                     system.max_violation);
  if (kernel_coefficients.size() != system.gauge_dimension())
    throw Error("expected " + std::to_string(system.gauge_dimension()) + " kernel coefficients, got " +
                std::to_string(kernel_coefficients.size()));
  TensionSolution<Scalar> s;
  s.particular = system.pseudo_inverse * system.rhs;
  s.kernel_coefficients = kernel_coefficients;
  s.tensions = s.particular + system.self_stress_basis * kernel_coefficients;
  return s;
}

/// Minimum-norm kernel coefficients that put `value` on edge `edge` given a
/// particular solution. Throws GaugeFixingFailure when no self-stress loads
/// the edge.
template <typename Scalar>
VectorX<Scalar> coefficients_for_edge_value(const MatrixX<Scalar>& self_stress_basis,
                                            const VectorX<Scalar>& particular, int edge, Scalar value) {
  const VectorX<Scalar> w = self_stress_basis.row(edge).transpose();
  const Scalar w2 = w.squaredNorm();
  if (!(w2 > Scalar(1e-20)))
    throw GaugeFixingFailure("no self-stress acts on the designated edge; its tension is not free");
  return w * ((value - particular(edge)) / w2);
}

/// Solution whose tension on `edge` equals `value` (the one-parameter
/// "designated edge" form of the affine solution set).
template <typename Scalar>
TensionSolution<Scalar> solve_tensions_with_edge_value(const TensionSystem<Scalar>& system, int edge,
                                                       Scalar value) {
  const VectorX<Scalar> zero = VectorX<Scalar>::Zero(system.gauge_dimension());
  const TensionSolution<Scalar> base = solve_tensions(system, zero);
  return solve_tensions(system, coefficients_for_edge_value(system.self_stress_basis, base.particular, edge, value));
}

/// Least-squares coordinates of `tensions` in the self-stress basis.
template <typename Scalar>
VectorX<Scalar> kernel_coordinates(const TensionSystem<Scalar>& system, const VectorX<Scalar>& tensions) {
  if (system.gauge_dimension() == 0) return VectorX<Scalar>(0);
  const auto& u = system.self_stress_basis;
  return (u.transpose() * u).ldlt().solve(u.transpose() * tensions);
}

}  // namespace gauge_rig
