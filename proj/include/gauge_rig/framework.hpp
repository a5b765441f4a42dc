#pragma once

// Rod-mass frameworks: vertices carrying point masses, edges carrying ideal
// rods of fixed rest length. Positions are stored one row per vertex in a
// row-major matrix so that the flat vertex-major coordinate vector
// (x_1, y_1, x_2, y_2, ...) is a plain Map over the same storage.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gauge_rig/error.hpp"

namespace gauge_rig {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// One row per vertex, one column per spatial coordinate.
template <typename Scalar>
using PointSet = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Unordered vertex pair stored with first < second (dense indices).
struct Edge {
  int first = 0;
  int second = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;

  bool touches(int v) const { return first == v || second == v; }
  int other(int v) const { return v == first ? second : first; }
};

template <typename Scalar>
class RodFramework {
 public:
  struct EdgeSpec {
    std::string a;
    std::string b;
    Scalar length;
  };

  RodFramework() = default;

  /// Builds and validates. Edges are reordered lexicographically on their
  /// sorted dense endpoint indices; vertex order is input order.
  RodFramework(std::vector<std::string> vertex_ids, std::vector<Scalar> masses,
               const std::vector<EdgeSpec>& edges, int dimension = 2)
      : ids_(std::move(vertex_ids)), dimension_(dimension) {
    if (masses.size() != ids_.size())
      throw InvalidFramework("mass count does not match vertex count");
    mass_ = Eigen::Map<const VectorX<Scalar>>(masses.data(), Eigen::Index(masses.size()));
    for (std::size_t i = 0; i < ids_.size(); ++i) {
      if (!index_.emplace(ids_[i], int(i)).second)
        throw InvalidFramework("duplicate vertex id '" + ids_[i] + "'");
    }

    std::vector<std::pair<Edge, Scalar>> sorted;
    std::set<Edge> seen;
    for (const auto& spec : edges) {
      auto ia = index_.find(spec.a);
      auto ib = index_.find(spec.b);
      if (ia == index_.end() || ib == index_.end())
        throw InvalidFramework("edge {" + spec.a + "," + spec.b + "} references an unknown vertex");
      if (ia->second == ib->second)
        throw InvalidFramework("edge {" + spec.a + "," + spec.b + "} is a self-loop");
      Edge e{std::min(ia->second, ib->second), std::max(ia->second, ib->second)};
      if (!seen.insert(e).second)
        throw InvalidFramework("duplicate edge {" + spec.a + "," + spec.b + "}");
      sorted.emplace_back(e, spec.length);
    }
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& l, const auto& r) { return l.first < r.first; });
    edges_.reserve(sorted.size());
    rest_length_.resize(Eigen::Index(sorted.size()));
    for (std::size_t k = 0; k < sorted.size(); ++k) {
      edges_.push_back(sorted[k].first);
      rest_length_(Eigen::Index(k)) = sorted[k].second;
    }
    validate();
  }

  /// Throws InvalidFramework naming the first violated invariant.
  void validate() const {
    if (dimension_ != 2) throw InvalidFramework("only planar frameworks (dimension 2) are supported");
    if (ids_.empty()) throw InvalidFramework("framework has no vertices");
    for (Eigen::Index i = 0; i < mass_.size(); ++i) {
      if (!(mass_(i) > Scalar(0)))
        throw InvalidFramework("vertex '" + ids_[std::size_t(i)] + "' has non-positive mass");
    }
    for (std::size_t k = 0; k < edges_.size(); ++k) {
      if (!(rest_length_(Eigen::Index(k)) > Scalar(0)))
        throw InvalidFramework("edge " + edge_label(k) + " has non-positive length");
    }
    // Connectivity by union-find.
    std::vector<int> parent(ids_.size());
    for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = int(i);
    auto find = [&](int v) {
      while (parent[std::size_t(v)] != v) v = parent[std::size_t(v)] = parent[std::size_t(parent[std::size_t(v)])];
      return v;
    };
    for (const auto& e : edges_) parent[std::size_t(find(e.first))] = find(e.second);
    for (std::size_t i = 1; i < parent.size(); ++i) {
      if (find(int(i)) != find(0)) throw InvalidFramework("framework graph is disconnected");
    }
  }

  int vertex_count() const { return int(ids_.size()); }
  int edge_count() const { return int(edges_.size()); }
  int dimension() const { return dimension_; }
  int coordinate_count() const { return vertex_count() * dimension_; }

  const std::vector<std::string>& vertex_ids() const { return ids_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int k) const { return edges_[std::size_t(k)]; }
  const VectorX<Scalar>& masses() const { return mass_; }
  Scalar mass(int v) const { return mass_(v); }
  const VectorX<Scalar>& rest_lengths() const { return rest_length_; }
  Scalar rest_length(int k) const { return rest_length_(k); }

  int vertex_index(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw InvalidFramework("unknown vertex '" + id + "'");
    return it->second;
  }

  /// Dense index of the edge joining two labelled vertices, or -1.
  int find_edge(const std::string& a, const std::string& b) const {
    auto ia = index_.find(a);
    auto ib = index_.find(b);
    if (ia == index_.end() || ib == index_.end()) return -1;
    Edge e{std::min(ia->second, ib->second), std::max(ia->second, ib->second)};
    auto it = std::lower_bound(edges_.begin(), edges_.end(), e);
    return (it != edges_.end() && *it == e) ? int(it - edges_.begin()) : -1;
  }

  /// "a-b" using vertex labels.
  std::string edge_label(std::size_t k) const {
    const auto& e = edges_[k];
    return ids_[std::size_t(e.first)] + "-" + ids_[std::size_t(e.second)];
  }

  Scalar total_mass() const { return mass_.sum(); }

  /// Per-coordinate inverse masses, vertex-major.
  VectorX<Scalar> inverse_mass_diagonal() const {
    VectorX<Scalar> w(coordinate_count());
    for (int i = 0; i < vertex_count(); ++i)
      w.segment(i * dimension_, dimension_).setConstant(Scalar(1) / mass_(i));
    return w;
  }

  /// Copy without one edge (the removed-rod variant).
  RodFramework without_edge(int k) const {
    std::vector<EdgeSpec> specs;
    for (int j = 0; j < edge_count(); ++j) {
      if (j == k) continue;
      specs.push_back({ids_[std::size_t(edges_[std::size_t(j)].first)],
                       ids_[std::size_t(edges_[std::size_t(j)].second)], rest_length_(j)});
    }
    return RodFramework(ids_, std::vector<Scalar>(mass_.data(), mass_.data() + mass_.size()), specs,
                        dimension_);
  }

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, int> index_;
  VectorX<Scalar> mass_;
  std::vector<Edge> edges_;
  VectorX<Scalar> rest_length_;
  int dimension_ = 2;
};

template <typename Scalar>
struct Configuration {
  PointSet<Scalar> positions;

  const PointSet<Scalar>& q() const { return positions; }
};

/// Checks that `positions` has one row per vertex and `d` columns.
template <typename Scalar, typename Derived>
void check_shape(const RodFramework<Scalar>& fw, const Eigen::MatrixBase<Derived>& positions,
                 const char* what = "positions") {
  if (positions.rows() != fw.vertex_count() || positions.cols() != fw.dimension())
    throw InvalidFramework(std::string(what) + " shape does not match the framework");
}

/// Full phase-space point restricted to the primary constraint surface:
/// multiplier momenta are identically zero.
template <typename Scalar>
class PhasePoint {
 public:
  PhasePoint() = default;
  PhasePoint(PointSet<Scalar> positions, VectorX<Scalar> tensions, PointSet<Scalar> momenta)
      : positions_(std::move(positions)),
        momenta_(std::move(momenta)),
        tensions_(std::move(tensions)),
        multiplier_momenta_(VectorX<Scalar>::Zero(tensions_.size())) {
    if (positions_.rows() != momenta_.rows() || positions_.cols() != momenta_.cols())
      throw InvalidFramework("positions and momenta differ in shape");
  }

  /// Zero momenta and tensions.
  static PhasePoint at_rest(const PointSet<Scalar>& positions, int edge_count) {
    return PhasePoint(positions, VectorX<Scalar>::Zero(edge_count),
                      PointSet<Scalar>::Zero(positions.rows(), positions.cols()));
  }

  const PointSet<Scalar>& positions() const { return positions_; }
  const PointSet<Scalar>& momenta() const { return momenta_; }
  const VectorX<Scalar>& tensions() const { return tensions_; }
  const VectorX<Scalar>& multiplier_momenta() const { return multiplier_momenta_; }

  PointSet<Scalar>& positions() { return positions_; }
  PointSet<Scalar>& momenta() { return momenta_; }
  VectorX<Scalar>& tensions() { return tensions_; }

  void check_against(const RodFramework<Scalar>& fw) const {
    check_shape(fw, positions_);
    check_shape(fw, momenta_, "momenta");
    if (tensions_.size() != fw.edge_count())
      throw InvalidFramework("tension count does not match the framework");
  }

 private:
  PointSet<Scalar> positions_;
  PointSet<Scalar> momenta_;
  VectorX<Scalar> tensions_;
  VectorX<Scalar> multiplier_momenta_;
};

/// Flat vertex-major view of a point set.
template <typename Scalar>
Eigen::Map<const VectorX<Scalar>> flat(const PointSet<Scalar>& points) {
  return {points.data(), points.size()};
}

template <typename Scalar>
Eigen::Map<VectorX<Scalar>> flat(PointSet<Scalar>& points) {
  return {points.data(), points.size()};
}

template <typename Scalar>
PointSet<Scalar> unflatten(const VectorX<Scalar>& v, int dimension) {
  return Eigen::Map<const PointSet<Scalar>>(v.data(), v.size() / dimension, dimension);
}

/// Mass-weighted centroid.
template <typename Scalar>
Eigen::Matrix<Scalar, 1, Eigen::Dynamic> center_of_mass(const RodFramework<Scalar>& fw,
                                                        const PointSet<Scalar>& q) {
  return (fw.masses().transpose() * q) / fw.total_mass();
}

/// Counterclockwise quarter turn applied to each row of a planar point set.
template <typename Scalar>
PointSet<Scalar> rotate_quarter_turn(const PointSet<Scalar>& v) {
  PointSet<Scalar> out(v.rows(), 2);
  out.col(0) = -v.col(1);
  out.col(1) = v.col(0);
  return out;
}

/// Row for edge {i,j}: +2(q_i - q_j) in vertex-i columns, -2(q_i - q_j) in
/// vertex-j columns. R * velocities is the time derivative of the squared
/// edge lengths.
template <typename Scalar>
MatrixX<Scalar> rigidity_matrix(const RodFramework<Scalar>& fw, const PointSet<Scalar>& q) {
  check_shape(fw, q);
  const int d = fw.dimension();
  MatrixX<Scalar> r = MatrixX<Scalar>::Zero(fw.edge_count(), fw.coordinate_count());
  for (int k = 0; k < fw.edge_count(); ++k) {
    const Edge& e = fw.edge(k);
    const auto delta = (q.row(e.first) - q.row(e.second)).eval();
    r.block(k, e.first * d, 1, d) = Scalar(2) * delta;
    r.block(k, e.second * d, 1, d) = Scalar(-2) * delta;
  }
  return r;
}

/// Framework plus positions, as read from an input document.
template <typename Scalar>
struct FrameworkWithConfiguration {
  RodFramework<Scalar> framework;
  Configuration<Scalar> configuration;
};

/// Four masses: a central vertex "1" at the origin joined by rods of length
/// ell to "2", "3", "4" on an equilateral triangle of side ell*sqrt(3).
template <typename Scalar>
FrameworkWithConfiguration<Scalar> reference_framework(Scalar ell = Scalar(1), Scalar m = Scalar(1)) {
  using std::sqrt;
  if (!(ell > Scalar(0)) || !(m > Scalar(0)))
    throw InvalidFramework("reference framework needs positive length and mass");
  const Scalar outer = ell * sqrt(Scalar(3));
  RodFramework<Scalar> fw({"1", "2", "3", "4"}, {m, m, m, m},
                          {{"1", "2", ell},
                           {"1", "3", ell},
                           {"1", "4", ell},
                           {"2", "3", outer},
                           {"2", "4", outer},
                           {"3", "4", outer}});
  PointSet<Scalar> q(4, 2);
  const Scalar h = sqrt(Scalar(3)) / Scalar(2) * ell;
  q << Scalar(0), Scalar(0),  //
      Scalar(0), ell,         //
      h, -ell / Scalar(2),    //
      -h, -ell / Scalar(2);
  return {std::move(fw), {std::move(q)}};
}

/// Three masses on an equilateral triangle of side ell: statically
/// determinate, no self-stress.
template <typename Scalar>
FrameworkWithConfiguration<Scalar> triangle_framework(Scalar ell = Scalar(1), Scalar m = Scalar(1)) {
  using std::sqrt;
  RodFramework<Scalar> fw({"1", "2", "3"}, {m, m, m}, {{"1", "2", ell}, {"1", "3", ell}, {"2", "3", ell}});
  PointSet<Scalar> q(3, 2);
  q << Scalar(0), Scalar(0), ell, Scalar(0), ell / Scalar(2), sqrt(Scalar(3)) / Scalar(2) * ell;
  return {std::move(fw), {std::move(q)}};
}

}  // namespace gauge_rig
