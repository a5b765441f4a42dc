#pragma once

// Random generators for property checks.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "gauge_rig/dynamics.hpp"
#include "gauge_rig/framework.hpp"

namespace gauge_rig {

/// Rotates every row of a planar point set by `angle` about the origin.
template <typename Scalar>
PointSet<Scalar> rotated(const PointSet<Scalar>& q, Scalar angle) {
  using std::cos;
  using std::sin;
  Eigen::Matrix<Scalar, 2, 2> r;
  r << cos(angle), -sin(angle), sin(angle), cos(angle);
  return q * r.transpose();
}

/// A point of the final constraint manifold of the four-mass system:
/// reference positions rigidly rotated by a random angle (and optionally
/// translated), random omega in [-2, 2], random lambda in [-1, 1].
struct ReferenceSample {
  PhasePoint<double> point;
  double omega = 0;
  double lambda = 0;
  double angle = 0;
};

template <typename Rng>
ReferenceSample random_reference_point(const RodFramework<double>& fw, const PointSet<double>& reference, Rng& rng,
                                       bool translate = false) {
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  std::uniform_real_distribution<double> omega(-2.0, 2.0);
  std::uniform_real_distribution<double> lambda(-1.0, 1.0);
  std::uniform_real_distribution<double> shift(-3.0, 3.0);
  ReferenceSample s;
  s.angle = angle(rng);
  s.omega = omega(rng);
  s.lambda = lambda(rng);
  PointSet<double> q = rotated(reference, s.angle);
  if (translate) {
    const double dx = shift(rng), dy = shift(rng);
    q.col(0).array() += dx;
    q.col(1).array() += dy;
  }
  s.point = prepare_initial_data(fw, q, s.omega, s.lambda);
  return s;
}

/// Random framework on `n` vertices in general position: a spanning path
/// plus random extra edges, random masses in [0.5, 2], rest lengths equal to
/// the sampled distances. Returns framework and positions.
template <typename Rng>
FrameworkWithConfiguration<double> random_framework(int n, int extra_edges, Rng& rng) {
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  std::uniform_real_distribution<double> mass(0.5, 2.0);
  PointSet<double> q(n, 2);
  for (int i = 0; i < n; ++i) q.row(i) << coord(rng), coord(rng);
  std::vector<std::string> ids;
  std::vector<double> masses;
  for (int i = 0; i < n; ++i) {
    ids.push_back("v" + std::to_string(i));
    masses.push_back(mass(rng));
  }
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i + 1 < n; ++i) pairs.emplace_back(i, i + 1);
  std::vector<std::pair<int, int>> rest;
  for (int i = 0; i < n; ++i)
    for (int j = i + 2; j < n; ++j) rest.emplace_back(i, j);
  std::shuffle(rest.begin(), rest.end(), rng);
  for (int k = 0; k < extra_edges && k < int(rest.size()); ++k) pairs.push_back(rest[std::size_t(k)]);
  std::vector<RodFramework<double>::EdgeSpec> specs;
  for (auto [i, j] : pairs)
    specs.push_back({ids[std::size_t(i)], ids[std::size_t(j)], (q.row(i) - q.row(j)).norm()});
  return {RodFramework<double>(ids, masses, specs), {q}};
}

/// Random momenta with entries in [-scale, scale].
template <typename Rng>
PointSet<double> random_momenta(int n, Rng& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  PointSet<double> p(n, 2);
  for (int i = 0; i < n; ++i) p.row(i) << u(rng), u(rng);
  return p;
}

}  // namespace gauge_rig
