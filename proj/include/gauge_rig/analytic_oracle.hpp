#pragma once

// Independent ground truth for the test suite: the closed-form rotating
// solution family of the four-mass system and brute-force finite-difference
// checks. Nothing here reuses the assembly code in constraint_chain.hpp.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

#include "gauge_rig/framework.hpp"

namespace gauge_rig {

/// Rigid rotation about the central mass with angular velocity omega; inner
/// rod tensions follow the free function f(t), outer ones (m omega^2 - f)/3.
template <typename Scalar>
struct AnalyticSolution {
  Scalar omega = 1;
  Scalar ell = 1;
  Scalar m = 1;
  std::function<Scalar(Scalar)> f = [](Scalar) { return Scalar(0); };
};

/// Integer tension matrix of the four-mass system in edge order 1-2, 1-3,
/// 1-4, 2-3, 2-4, 3-4, in the m / l^2 normalization.
template <typename Scalar>
MatrixX<Scalar> four_mass_tension_matrix() {
  MatrixX<Scalar> m(6, 6);
  m << 4, -1, -1, 3, 3, 0,  //
      -1, 4, -1, 3, 0, 3,   //
      -1, -1, 4, 0, 3, 3,   //
      3, 3, 0, 12, 3, 3,    //
      3, 0, 3, 3, 12, 3,    //
      0, 3, 3, 3, 3, 12;
  return m;
}

namespace detail {

template <typename Scalar>
PointSet<Scalar> analytic_positions(const AnalyticSolution<Scalar>& sol, Scalar t) {
  using std::cos;
  using std::sin;
  const Scalar third = Scalar(2) * std::numbers::pi_v<Scalar> / Scalar(3);
  const Scalar phase[3] = {sol.omega * t, sol.omega * t - third, sol.omega * t + third};
  PointSet<Scalar> q = PointSet<Scalar>::Zero(4, 2);
  for (int k = 0; k < 3; ++k) {
    q(k + 1, 0) = -sol.ell * sin(phase[k]);
    q(k + 1, 1) = sol.ell * cos(phase[k]);
  }
  return q;
}

}  // namespace detail

/// Edge order 1-2, 1-3, 1-4, 2-3, 2-4, 3-4 (the reference framework's order).
template <typename Scalar>
PhasePoint<Scalar> analytic_state(const AnalyticSolution<Scalar>& sol, Scalar t) {
  using std::cos;
  using std::sin;
  PointSet<Scalar> q = detail::analytic_positions(sol, t);
  const Scalar third = Scalar(2) * std::numbers::pi_v<Scalar> / Scalar(3);
  const Scalar phase[3] = {sol.omega * t, sol.omega * t - third, sol.omega * t + third};
  PointSet<Scalar> p = PointSet<Scalar>::Zero(4, 2);
  for (int k = 0; k < 3; ++k) {
    p(k + 1, 0) = -sol.m * sol.ell * sol.omega * cos(phase[k]);
    p(k + 1, 1) = -sol.m * sol.ell * sol.omega * sin(phase[k]);
  }
  const Scalar inner = sol.f(t);
  const Scalar outer = (sol.m * sol.omega * sol.omega - inner) / Scalar(3);
  VectorX<Scalar> tensions(6);
  tensions << inner, inner, inner, outer, outer, outer;
  return PhasePoint<Scalar>(std::move(q), std::move(tensions), std::move(p));
}

/// Max |m q'' + sum q_ij (q_i - q_j)| over particles and components, with q''
/// from central differences of step h. The tensions may be overridden to
/// build negative controls.
template <typename Scalar>
Scalar verify_eom(const AnalyticSolution<Scalar>& sol, Scalar t, Scalar h,
                  const std::function<VectorX<Scalar>(Scalar)>& tension_override = {}) {
  using std::abs;
  const PointSet<Scalar> before = detail::analytic_positions(sol, t - h);
  const PointSet<Scalar> now = detail::analytic_positions(sol, t);
  const PointSet<Scalar> after = detail::analytic_positions(sol, t + h);
  const PointSet<Scalar> accel = (after - Scalar(2) * now + before) / (h * h);
  const VectorX<Scalar> tensions = tension_override ? tension_override(t) : analytic_state(sol, t).tensions();

  static constexpr int ends[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  PointSet<Scalar> force = PointSet<Scalar>::Zero(4, 2);
  for (int k = 0; k < 6; ++k) {
    const int i = ends[k][0], j = ends[k][1];
    for (int c = 0; c < 2; ++c) {
      const Scalar push = tensions(k) * (now(i, c) - now(j, c));
      force(i, c) -= push;
      force(j, c) += push;
    }
  }
  Scalar worst = 0;
  for (int i = 0; i < 4; ++i)
    for (int c = 0; c < 2; ++c) worst = std::max(worst, abs(sol.m * accel(i, c) - force(i, c)));
  return worst;
}

namespace detail {

// Acceleration-level length residual evaluated from scratch, loop by loop:
// 2 |v_i - v_j|^2 + 2 (q_i - q_j).(a_i - a_j).
template <typename Scalar>
VectorX<Scalar> brute_force_c3(const RodFramework<Scalar>& fw, const PointSet<Scalar>& q, const PointSet<Scalar>& p,
                               const VectorX<Scalar>& tensions) {
  const int n = fw.vertex_count();
  const int d = fw.dimension();
  const int ne = fw.edge_count();
  std::vector<std::vector<Scalar>> v_rows(std::size_t(n), std::vector<Scalar>(std::size_t(d), Scalar(0)));
  std::vector<std::vector<Scalar>> a_rows(std::size_t(n), std::vector<Scalar>(std::size_t(d), Scalar(0)));
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < d; ++c) v_rows[std::size_t(i)][std::size_t(c)] = p(i, c) / fw.mass(i);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < ne; ++k) {
      const Edge& e = fw.edge(k);
      if (!e.touches(i)) continue;
      const int j = e.other(i);
      for (int c = 0; c < d; ++c)
        a_rows[std::size_t(i)][std::size_t(c)] -= tensions(k) * (q(i, c) - q(j, c)) / fw.mass(i);
    }
  }
  VectorX<Scalar> out(ne);
  for (int k = 0; k < ne; ++k) {
    const int i = fw.edge(k).first, j = fw.edge(k).second;
    Scalar value = 0;
    for (int c = 0; c < d; ++c) {
      const Scalar dv = v_rows[std::size_t(i)][std::size_t(c)] - v_rows[std::size_t(j)][std::size_t(c)];
      const Scalar da = a_rows[std::size_t(i)][std::size_t(c)] - a_rows[std::size_t(j)][std::size_t(c)];
      value += Scalar(2) * dv * dv + Scalar(2) * (q(i, c) - q(j, c)) * da;
    }
    out(k) = value;
  }
  return out;
}

}  // namespace detail

/// Tension matrix by central differences: column e' is
/// -(c3(q_t + delta e_e') - c3(q_t - delta e_e')) / (2 delta).
/// Unnormalized, same convention as assemble_tension_system().
template <typename Scalar>
MatrixX<Scalar> coefficient_extraction(const RodFramework<Scalar>& fw, const PointSet<Scalar>& q,
                                       const PointSet<Scalar>& p, Scalar delta = Scalar(1e-5)) {
  const int ne = fw.edge_count();
  MatrixX<Scalar> out(ne, ne);
  const VectorX<Scalar> base = VectorX<Scalar>::Zero(ne);
  for (int col = 0; col < ne; ++col) {
    VectorX<Scalar> plus = base, minus = base;
    plus(col) += delta;
    minus(col) -= delta;
    out.col(col) = -(detail::brute_force_c3(fw, q, p, plus) - detail::brute_force_c3(fw, q, p, minus)) /
                   (Scalar(2) * delta);
  }
  return out;
}

}  // namespace gauge_rig
