#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gauge_rig/framework.hpp"

namespace gauge_rig {

/// Rank, pseudo-inverse and kernel of a (small, dense) matrix from one SVD.
template <typename Scalar>
struct RankRevealed {
  int rank = 0;
  VectorX<Scalar> singular_values;
  MatrixX<Scalar> pseudo_inverse;
  /// Orthonormal columns spanning the right kernel.
  MatrixX<Scalar> kernel;
};

/// Singular values below epsilon * sigma_max * max(rows, cols) are treated as zero.
template <typename Scalar>
RankRevealed<Scalar> rank_reveal(const MatrixX<Scalar>& a, double epsilon) {
  RankRevealed<Scalar> out;
  const Eigen::Index n = a.cols();
  if (a.size() == 0) {
    out.pseudo_inverse = MatrixX<Scalar>::Zero(n, a.rows());
    out.kernel = MatrixX<Scalar>::Identity(n, n);
    return out;
  }
  Eigen::JacobiSVD<MatrixX<Scalar>> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  out.singular_values = svd.singularValues();
  const Scalar sigma_max = out.singular_values.size() ? out.singular_values(0) : Scalar(0);
  const Scalar threshold = Scalar(epsilon) * sigma_max * Scalar(std::max(a.rows(), a.cols()));
  int rank = 0;
  for (Eigen::Index i = 0; i < out.singular_values.size(); ++i) {
    if (out.singular_values(i) > threshold) ++rank;
  }
  out.rank = rank;

  const auto& u = svd.matrixU();
  const auto& v = svd.matrixV();
  out.pseudo_inverse = MatrixX<Scalar>::Zero(n, a.rows());
  for (int i = 0; i < rank; ++i)
    out.pseudo_inverse.noalias() += v.col(i) * (u.col(i).transpose() / out.singular_values(i));
  out.kernel = v.rightCols(n - rank);
  return out;
}

namespace detail {

// Smallest multiplier k in [1, max_den] making every entry of k*v an integer
// to within tol*k, or 0 if none exists.
template <typename Derived>
int common_denominator(const Eigen::MatrixBase<Derived>& v, int max_den, double tol) {
  using std::abs;
  using std::round;
  for (int k = 1; k <= max_den; ++k) {
    bool ok = true;
    for (Eigen::Index i = 0; i < v.size() && ok; ++i) {
      const auto x = v(i) * decltype(v(i))(k);
      ok = abs(x - round(x)) <= decltype(x)(tol * k);
    }
    if (ok) return k;
  }
  return 0;
}

}  // namespace detail

inline constexpr int kMaxRationalDenominator = 60;
inline constexpr double kRationalTolerance = 1e-9;

/// Reproducible basis for the span of the columns of `basis`: reduced row
/// echelon form of the transposed basis, then each vector scaled so its
/// largest-magnitude entry is +-1 with the first nonzero entry positive.
/// Entries that are all within 1e-9 of a common small-denominator rational
/// are snapped to it.
template <typename Scalar>
MatrixX<Scalar> canonical_basis(const MatrixX<Scalar>& basis) {
  using std::abs;
  using std::round;
  const Eigen::Index n = basis.rows();
  const Eigen::Index k = basis.cols();
  MatrixX<Scalar> rows = basis.transpose();
  if (k == 0) return MatrixX<Scalar>(n, 0);

  const Scalar scale = rows.cwiseAbs().maxCoeff();
  const Scalar pivot_floor = Scalar(1e-8) * scale;
  Eigen::Index lead = 0;
  for (Eigen::Index r = 0; r < k && lead < n; ++r, ++lead) {
    Eigen::Index best = r;
    while (lead < n) {
      rows.col(lead).segment(r, k - r).cwiseAbs().maxCoeff(&best);
      best += r;
      if (abs(rows(best, lead)) > pivot_floor) break;
      ++lead;
    }
    if (lead >= n) break;
    rows.row(r).swap(rows.row(best));
    rows.row(r) /= rows(r, lead);
    for (Eigen::Index o = 0; o < k; ++o) {
      if (o != r) rows.row(o) -= rows(o, lead) * rows.row(r);
    }
  }

  MatrixX<Scalar> out(n, k);
  for (Eigen::Index r = 0; r < k; ++r) {
    VectorX<Scalar> v = rows.row(r).transpose();
    Eigen::Index at = 0;
    const Scalar peak = v.cwiseAbs().maxCoeff(&at);
    v /= peak;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (abs(v(i)) > Scalar(kRationalTolerance)) {
        if (v(i) < Scalar(0)) v = -v;
        break;
      }
    }
    if (int den = detail::common_denominator(v, kMaxRationalDenominator, kRationalTolerance)) {
      for (Eigen::Index i = 0; i < n; ++i) v(i) = round(v(i) * Scalar(den)) / Scalar(den);
    }
    out.col(r) = v;
  }
  return out;
}

/// Integer representative of a rational direction: entries coprime, last
/// nonzero entry positive. Returns an empty vector when `v` is not within
/// 1e-9 of a small-denominator rational direction.
template <typename Scalar>
Eigen::VectorXi integer_direction(const VectorX<Scalar>& v) {
  using std::abs;
  using std::round;
  if (v.size() == 0) return {};
  const Scalar peak = v.cwiseAbs().maxCoeff();
  if (!(peak > Scalar(0))) return {};
  const VectorX<Scalar> unit = v / peak;
  const int den = detail::common_denominator(unit, kMaxRationalDenominator, kRationalTolerance);
  if (den == 0) return {};
  Eigen::VectorXi out(v.size());
  int g = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out(i) = int(round(unit(i) * Scalar(den)));
    g = std::gcd(g, std::abs(out(i)));
  }
  if (g > 1) out /= g;
  for (Eigen::Index i = v.size() - 1; i >= 0; --i) {
    if (out(i) != 0) {
      if (out(i) < 0) out = -out;
      break;
    }
  }
  return out;
}

}  // namespace gauge_rig
