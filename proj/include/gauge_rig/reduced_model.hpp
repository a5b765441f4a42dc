#pragma once

// Reduced phase space of the four-mass, six-rod system: centre of mass,
// orientation angle and their conjugate momenta.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

#include "gauge_rig/framework.hpp"

namespace gauge_rig {

template <typename Scalar>
struct ReducedState {
  Scalar x = 0;
  Scalar y = 0;
  /// In (-pi, pi].
  Scalar theta = 0;
  Scalar p_x = 0;
  Scalar p_y = 0;
  Scalar p_theta = 0;
};

/// Maps an angle to (-pi, pi].
template <typename Scalar>
Scalar wrap_angle(Scalar a) {
  using std::floor;
  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  a -= two_pi * floor(a / two_pi);  // [0, 2pi)
  if (a > std::numbers::pi_v<Scalar>) a -= two_pi;
  return a;
}

/// Parameters (m, l) of a framework with the four-mass shape: complete graph
/// on four vertices, equal masses, first vertex joined to the others by rods
/// of length l, outer rods of length l*sqrt(3). Throws InvalidFramework otherwise.
template <typename Scalar>
std::pair<Scalar, Scalar> four_mass_parameters(const RodFramework<Scalar>& fw) {
  using std::abs;
  using std::sqrt;
  if (fw.vertex_count() != 4 || fw.edge_count() != 6)
    throw InvalidFramework("reduction needs the four-mass, six-rod framework");
  const Scalar m = fw.mass(0);
  const Scalar ell = fw.rest_length(0);
  const Scalar rel = Scalar(1e-9);
  for (int i = 1; i < 4; ++i) {
    if (abs(fw.mass(i) - m) > rel * m) throw InvalidFramework("reduction needs equal masses");
  }
  for (int k = 0; k < 6; ++k) {
    const Edge& e = fw.edge(k);
    const Scalar expected = e.first == 0 ? ell : ell * sqrt(Scalar(3));
    if (abs(fw.rest_length(k) - expected) > rel * expected)
      throw InvalidFramework("reduction needs inner rods of length l and outer rods of length l*sqrt(3)");
  }
  return {m, ell};
}

/// theta is the polar angle of the second vertex seen from the centroid.
template <typename Scalar>
ReducedState<Scalar> reduce(const RodFramework<Scalar>& fw, const PhasePoint<Scalar>& point) {
  using std::atan2;
  four_mass_parameters(fw);
  point.check_against(fw);
  const auto& q = point.positions();
  const auto& p = point.momenta();
  const auto c = center_of_mass(fw, q);
  ReducedState<Scalar> s;
  s.x = c(0);
  s.y = c(1);
  const auto arm = (q.row(1) - c).eval();
  s.theta = wrap_angle(atan2(arm(1), arm(0)));
  s.p_x = p.col(0).sum();
  s.p_y = p.col(1).sum();
  for (int i = 0; i < 4; ++i) {
    const auto r = (q.row(i) - c).eval();
    s.p_theta += r(0) * p(i, 1) - r(1) * p(i, 0);
  }
  return s;
}

/// (p_x^2 + p_y^2) / (8m) + p_theta^2 / (6 m l^2): total mass 4m, moment of
/// inertia 3 m l^2.
template <typename Scalar>
Scalar reduced_hamiltonian(const ReducedState<Scalar>& s, Scalar m, Scalar ell) {
  return (s.p_x * s.p_x + s.p_y * s.p_y) / (Scalar(8) * m) + s.p_theta * s.p_theta / (Scalar(6) * m * ell * ell);
}

/// Exact flow of the reduced Hamiltonian for time t.
template <typename Scalar>
ReducedState<Scalar> reduced_flow(const ReducedState<Scalar>& s, Scalar m, Scalar ell, Scalar t) {
  ReducedState<Scalar> out = s;
  out.x += t * s.p_x / (Scalar(4) * m);
  out.y += t * s.p_y / (Scalar(4) * m);
  out.theta = wrap_angle(s.theta + t * s.p_theta / (Scalar(3) * m * ell * ell));
  return out;
}

/// Difference of two angles mapped to (-pi, pi].
template <typename Scalar>
Scalar angle_difference(Scalar a, Scalar b) {
  return wrap_angle(a - b);
}

}  // namespace gauge_rig
