#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "dgm/types.hpp"

namespace dgm {

/// Entrywise soft threshold: sign(a_ij) * max(|a_ij| - mu, 0).
template <class Derived>
MatrixX<typename Derived::Scalar> shrink(const Eigen::MatrixBase<Derived>& a,
                                         typename Derived::Scalar mu) {
  using Scalar = typename Derived::Scalar;
  if (mu < Scalar(0)) {
    throw std::invalid_argument("shrink: threshold must be nonnegative");
  }
  return (a.derived().array().sign() *
          (a.derived().array().abs() - mu).cwiseMax(Scalar(0)))
      .matrix();
}

/// Thin SVD factors with values(i) nonincreasing and nonnegative.
/// Reconstruction is left * values.asDiagonal() * right, i.e. `right`
/// is already the transposed right factor.
template <class Scalar>
struct SvdTriple {
  MatrixX<Scalar> left;    // rows x k, orthonormal columns
  VectorX<Scalar> values;  // k = min(rows, cols)
  MatrixX<Scalar> right;   // k x cols, orthonormal rows
};

namespace detail {

// Fill columns [filled, k) of a factor with unit vectors orthogonal
// to the columns already present. Canonical vectors are tried in order, with
// two Gram-Schmidt passes, so the completion is deterministic.
template <class Scalar>
void complete_orthonormal_columns(MatrixX<Scalar>& factor, Index filled) {
  const Index dim = factor.rows();
  const Index k = factor.cols();
  for (Index col = filled; col < k; ++col) {
    for (Index j = 0; j < dim; ++j) {
      VectorX<Scalar> v = VectorX<Scalar>::Unit(dim, j);
      for (int pass = 0; pass < 2; ++pass) {
        v -= factor.leftCols(col) * (factor.leftCols(col).transpose() * v);
      }
      const Scalar norm = v.norm();
      if (norm > Scalar(1e-4)) {
        factor.col(col) = v / norm;
        break;
      }
    }
  }
}

}  // namespace detail

/// Thin SVD through the Gram matrix of the shorter side. Videos are tall
/// (pixels x frames with few frames), so the eigendecomposition runs on the
/// small frames-by-frames matrix. Singular values below sqrt(eps) * sigma_max
/// are treated as rank deficiency: they are zeroed and the matching factor
/// columns are completed to an orthonormal set.
template <class Derived>
SvdTriple<typename Derived::Scalar> thin_svd(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  const MatrixX<Scalar> a = m.derived();
  if (!a.allFinite()) {
    throw std::runtime_error("thin_svd: matrix has non-finite entries");
  }
  const Index rows = a.rows();
  const Index cols = a.cols();
  const Index k = std::min(rows, cols);
  if (k == 0) {
    throw std::invalid_argument("thin_svd: empty matrix");
  }
  const bool tall = rows >= cols;

  const MatrixX<Scalar> gram = tall ? MatrixX<Scalar>(a.transpose() * a)
                                    : MatrixX<Scalar>(a * a.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> eig(gram);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("thin_svd: eigendecomposition failed");
  }

  SvdTriple<Scalar> out;
  out.values.resize(k);
  MatrixX<Scalar> small(k, k);  // eigenvectors of the Gram matrix, descending
  for (Index i = 0; i < k; ++i) {
    const Index src = k - 1 - i;  // eigenvalues come back ascending
    out.values(i) = std::sqrt(std::max(eig.eigenvalues()(src), Scalar(0)));
    small.col(i) = eig.eigenvectors().col(src);
  }

  const Scalar cutoff =
      out.values(0) * std::sqrt(std::numeric_limits<Scalar>::epsilon());
  Index rank = 0;
  while (rank < k && out.values(rank) > cutoff) ++rank;
  out.values.tail(k - rank).setZero();

  if (tall) {
    out.right = small.transpose();
    out.left.resize(rows, k);
    for (Index i = 0; i < rank; ++i) {
      out.left.col(i) = a * small.col(i) / out.values(i);
    }
    detail::complete_orthonormal_columns(out.left, rank);
  } else {
    out.left = small;
    MatrixX<Scalar> right_t(cols, k);
    for (Index i = 0; i < rank; ++i) {
      right_t.col(i) = a.transpose() * small.col(i) / out.values(i);
    }
    detail::complete_orthonormal_columns(right_t, rank);
    out.right = right_t.transpose();
  }
  return out;
}

/// ERF weights from singular values: w_i = exp(-sigma_i^2 / scale^2).
/// Nonincreasing singular values give nondecreasing weights in [0, 1].
template <class Scalar>
VectorX<Scalar> erf_weights(const VectorX<Scalar>& singular_values, Scalar scale) {
  if (!(scale > Scalar(0))) {
    throw std::invalid_argument("erf_weights: scale must be positive");
  }
  return (-singular_values.array().square() / (scale * scale)).exp().matrix();
}

namespace detail {

template <class Scalar>
void validate_weights(const VectorX<Scalar>& weights, Index expected) {
  if (weights.size() != expected) {
    throw std::invalid_argument("weight vector has length " +
                                std::to_string(weights.size()) + ", expected " +
                                std::to_string(expected));
  }
  for (Index i = 0; i < weights.size(); ++i) {
    if (!(weights(i) >= Scalar(0) && weights(i) <= Scalar(1))) {
      throw std::invalid_argument("weights must lie in [0, 1]");
    }
    if (i > 0 && weights(i) < weights(i - 1)) {
      // Nondecreasing weights against nonincreasing singular values is the
      // validity condition for the closed-form prox below.
      throw std::invalid_argument("weights must be nondecreasing");
    }
  }
}

}  // namespace detail

/// Weighted singular value thresholding: soft-threshold singular value i by
/// weights(i) * tau and reconstruct with the original singular vectors.
template <class Derived>
MatrixX<typename Derived::Scalar> weighted_svt(
    const Eigen::MatrixBase<Derived>& m,
    const VectorX<typename Derived::Scalar>& weights,
    typename Derived::Scalar tau) {
  using Scalar = typename Derived::Scalar;
  if (!(tau > Scalar(0))) {
    throw std::invalid_argument("weighted_svt: tau must be positive");
  }
  detail::validate_weights(weights, std::min(m.rows(), m.cols()));
  if (!m.derived().allFinite()) {
    throw std::runtime_error("weighted_svt: non-finite entries");
  }
  const SvdTriple<Scalar> svd = thin_svd(m);
  const VectorX<Scalar> thresholded =
      (svd.values.array() - weights.array() * tau).cwiseMax(Scalar(0)).matrix();
  return svd.left * thresholded.asDiagonal() * svd.right;
}

/// Weighted nuclear norm: sum_i weights(i) * sigma_i(m).
template <class Derived>
typename Derived::Scalar weighted_nuclear_norm(
    const Eigen::MatrixBase<Derived>& m,
    const VectorX<typename Derived::Scalar>& weights) {
  detail::validate_weights(weights, std::min(m.rows(), m.cols()));
  return thin_svd(m).values.dot(weights);
}

}  // namespace dgm
