#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "dgm/types.hpp"
#include "dgm/video.hpp"

namespace dgm {

enum class KernelKind { exponential, cosine };

/// Pairwise similarity rule. The filtering parameter h applies to the
/// exponential kernel only.
template <class Scalar = double>
struct SimilarityKernel {
  KernelKind kind = KernelKind::exponential;
  Scalar h = Scalar(1);
};

/// Neighborhood selection shared by both graphs: `half_width` neighbors on
/// each side (temporal line graph and the 4-neighborhood on the pixel grid
/// both come from half_width = 2), patches of odd side `patch_side` for the
/// spatial similarity. Boundaries use mirror extension; a mirrored offset
/// that lands back on the center vertex is dropped, never summed, so rows
/// stay hollow and may hold fewer than 2 * half_width entries.
struct NeighborhoodPolicy {
  int half_width = 2;
  int patch_side = 3;
};

/// Symmetrically normalized graph Laplacian with the degree vector of the
/// adjacency it was built from.
template <class Scalar = double>
struct SparseLaplacian {
  SparseMatrixX<Scalar> matrix;
  VectorX<Scalar> degrees;

  Index dimension() const { return matrix.rows(); }
};

/// Cosine similarity of two vectors or patches (flattened), clamped below at
/// zero so graph degrees stay positive.
template <class DerivedA, class DerivedB>
typename DerivedA::Scalar cosine_similarity(const Eigen::MatrixBase<DerivedA>& u,
                                            const Eigen::MatrixBase<DerivedB>& v) {
  using Scalar = typename DerivedA::Scalar;
  const Scalar nu = u.derived().reshaped().norm();
  const Scalar nv = v.derived().reshaped().norm();
  if (nu == Scalar(0) || nv == Scalar(0)) {
    throw std::invalid_argument("cosine_similarity: zero-norm input");
  }
  const Scalar cosine =
      u.derived().reshaped().dot(v.derived().reshaped()) / (nu * nv);
  return std::max(cosine, Scalar(0));
}

namespace detail {

/// Mirror extension of an index into [0, size): ..., 2, 1, 0 | 0, 1, 2, ...
/// Out-of-range offsets of magnitude <= size map back inside; at a border the
/// reflected index can coincide with the center pixel itself.
inline Index mirror_index(Index i, Index size) {
  if (i < 0) return -i - 1;
  if (i >= size) return 2 * size - i - 1;
  return i;
}

/// Distinct mirrored neighbors of `center` on a line of `size` vertices,
/// self excluded, ascending.
inline std::vector<Index> line_neighbors(Index center, Index size, int half_width) {
  std::vector<Index> out;
  for (int off = -half_width; off <= half_width; ++off) {
    if (off == 0) continue;
    const Index j = mirror_index(center + off, size);
    if (j != center) out.push_back(j);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

template <class Scalar>
Scalar exponential_similarity(Scalar squared_distance, Scalar h) {
  return std::exp(-squared_distance / (h * h));
}

/// Squared Frobenius distance between the spatiotemporal patches around two
/// pixels: the patch stacks the mirrored patch_side x patch_side window
/// across every frame.
template <class Scalar>
Scalar patch_squared_distance(const VideoMatrix<Scalar>& video, Index ra, Index ca,
                              Index rb, Index cb, int patch_side) {
  const Index n1 = video.frame_rows;
  const Index n2 = video.frame_cols;
  const int half = patch_side / 2;
  Scalar dist2 = 0;
  for (int dr = -half; dr <= half; ++dr) {
    for (int dc = -half; dc <= half; ++dc) {
      const Index ia = mirror_index(ra + dr, n1) + mirror_index(ca + dc, n2) * n1;
      const Index ib = mirror_index(rb + dr, n1) + mirror_index(cb + dc, n2) * n1;
      dist2 += (video.values.row(ia) - video.values.row(ib)).squaredNorm();
    }
  }
  return dist2;
}

template <class Scalar>
MatrixX<Scalar> extract_patch(const VideoMatrix<Scalar>& video, Index r, Index c,
                              int patch_side) {
  const int half = patch_side / 2;
  MatrixX<Scalar> patch(static_cast<Index>(patch_side) * patch_side,
                        video.frame_count());
  Index row = 0;
  for (int dc = -half; dc <= half; ++dc) {
    for (int dr = -half; dr <= half; ++dr) {
      const Index i = mirror_index(r + dr, video.frame_rows) +
                      mirror_index(c + dc, video.frame_cols) * video.frame_rows;
      patch.row(row++) = video.values.row(i);
    }
  }
  return patch;
}

template <class Scalar>
void validate_kernel(const SimilarityKernel<Scalar>& kernel) {
  if (kernel.kind == KernelKind::exponential && !(kernel.h > Scalar(0))) {
    throw std::invalid_argument("similarity kernel: filtering parameter must be positive");
  }
}

}  // namespace detail

/// Temporal adjacency over the frame line graph: frames i, j are connected
/// when j lies among the 2 * half_width mirrored temporal neighbors of i, with
/// similarity computed between the full frame columns.
template <class Scalar>
SparseMatrixX<Scalar> temporal_adjacency(const VideoMatrix<Scalar>& video,
                                         const SimilarityKernel<Scalar>& kernel,
                                         const NeighborhoodPolicy& policy) {
  detail::validate_kernel(kernel);
  const Index m = video.frame_count();
  if (m < 2) {
    throw std::invalid_argument("temporal_adjacency: need at least 2 frames");
  }
  if (policy.half_width < 1) {
    throw std::invalid_argument("temporal_adjacency: half width must be positive");
  }
  if (policy.half_width > m) {
    // Mirror extension only reaches one reflection deep.
    throw std::invalid_argument("temporal_adjacency: half width exceeds frame count");
  }

  std::vector<Eigen::Triplet<Scalar>> entries;
  entries.reserve(static_cast<std::size_t>(m) * 2 * policy.half_width);
  for (Index i = 0; i < m; ++i) {
    for (Index j : detail::line_neighbors(i, m, policy.half_width)) {
      Scalar sim;
      if (kernel.kind == KernelKind::exponential) {
        const Scalar d2 = (video.values.col(i) - video.values.col(j)).squaredNorm();
        sim = detail::exponential_similarity(d2, kernel.h);
      } else {
        sim = cosine_similarity(video.values.col(i), video.values.col(j));
      }
      entries.emplace_back(static_cast<int>(i), static_cast<int>(j), sim);
    }
  }
  SparseMatrixX<Scalar> adjacency(m, m);
  adjacency.setFromTriplets(entries.begin(), entries.end());
  return adjacency;
}

/// Spatial adjacency over the pixel grid: each pixel connects to its mirrored
/// up/down/left/right neighbors (half_width steps each way), with patchwise
/// similarity over patch_side x patch_side windows stacked across frames.
template <class Scalar>
SparseMatrixX<Scalar> spatial_adjacency(const VideoMatrix<Scalar>& video,
                                        const SimilarityKernel<Scalar>& kernel,
                                        const NeighborhoodPolicy& policy) {
  detail::validate_kernel(kernel);
  const Index n1 = video.frame_rows;
  const Index n2 = video.frame_cols;
  if (n1 <= 0 || n2 <= 0 || video.pixel_count() != n1 * n2) {
    throw std::invalid_argument("spatial_adjacency: bad frame shape");
  }
  if (policy.patch_side % 2 == 0 || policy.patch_side <= 0) {
    throw std::invalid_argument("spatial_adjacency: patch side must be odd");
  }
  if (policy.patch_side > std::min(n1, n2)) {
    throw std::invalid_argument("spatial_adjacency: patch side exceeds frame");
  }

  if (policy.half_width < 2 || policy.half_width % 2 != 0) {
    throw std::invalid_argument(
        "spatial_adjacency: half width must be even (neighbors split over 4 directions)");
  }

  const int steps = policy.half_width / 2;  // steps per axis; 4-neighborhood
                                            // for the default half_width = 2
  if (steps > std::min(n1, n2)) {
    // Mirror extension only reaches one reflection deep.
    throw std::invalid_argument("spatial_adjacency: half width exceeds frame size");
  }
  std::vector<Eigen::Triplet<Scalar>> entries;
  entries.reserve(static_cast<std::size_t>(video.pixel_count()) * 4 * steps);
  std::vector<Index> neighbors;
  for (Index c = 0; c < n2; ++c) {
    for (Index r = 0; r < n1; ++r) {
      const Index i = r + c * n1;
      // Mirrored axis-aligned offsets. Reflections landing on the pixel
      // itself are dropped and repeated indices kept once, never summed.
      neighbors.clear();
      for (int s = 1; s <= steps; ++s) {
        neighbors.push_back(detail::mirror_index(r - s, n1) + c * n1);
        neighbors.push_back(detail::mirror_index(r + s, n1) + c * n1);
        neighbors.push_back(r + detail::mirror_index(c - s, n2) * n1);
        neighbors.push_back(r + detail::mirror_index(c + s, n2) * n1);
      }
      std::sort(neighbors.begin(), neighbors.end());
      neighbors.erase(std::unique(neighbors.begin(), neighbors.end()),
                      neighbors.end());
      for (Index j : neighbors) {
        if (j == i) continue;
        const Index rb = j % n1;
        const Index cb = j / n1;
        Scalar sim;
        if (kernel.kind == KernelKind::exponential) {
          const Scalar d2 = detail::patch_squared_distance(video, r, c, rb, cb,
                                                           policy.patch_side);
          sim = detail::exponential_similarity(d2, kernel.h);
        } else {
          sim = cosine_similarity(
              detail::extract_patch(video, r, c, policy.patch_side),
              detail::extract_patch(video, rb, cb, policy.patch_side));
        }
        entries.emplace_back(static_cast<int>(i), static_cast<int>(j), sim);
      }
    }
  }
  SparseMatrixX<Scalar> adjacency(n1 * n2, n1 * n2);
  adjacency.setFromTriplets(entries.begin(), entries.end());
  return adjacency;
}

/// Symmetrically normalized Laplacian I - D^{-1/2} A D^{-1/2} of a symmetric
/// nonnegative adjacency with strictly positive degrees.
template <class Scalar>
SparseLaplacian<Scalar> normalized_laplacian(const SparseMatrixX<Scalar>& adjacency) {
  if (adjacency.rows() != adjacency.cols()) {
    throw std::invalid_argument("normalized_laplacian: adjacency must be square");
  }
  const Index dim = adjacency.rows();
  VectorX<Scalar> degrees = VectorX<Scalar>::Zero(dim);
  for (Index k = 0; k < adjacency.outerSize(); ++k) {
    for (typename SparseMatrixX<Scalar>::InnerIterator it(adjacency, k); it; ++it) {
      if (it.value() < Scalar(0)) {
        throw std::invalid_argument("normalized_laplacian: negative adjacency entry");
      }
      degrees(it.row()) += it.value();
    }
  }
  for (Index i = 0; i < dim; ++i) {
    if (!(degrees(i) > Scalar(0))) {
      throw std::invalid_argument("normalized_laplacian: isolated vertex " +
                                  std::to_string(i) + " has zero degree");
    }
  }

  const VectorX<Scalar> inv_sqrt = degrees.array().rsqrt().matrix();
  std::vector<Eigen::Triplet<Scalar>> entries;
  entries.reserve(static_cast<std::size_t>(adjacency.nonZeros()) + dim);
  for (Index i = 0; i < dim; ++i) {
    entries.emplace_back(static_cast<int>(i), static_cast<int>(i), Scalar(1));
  }
  for (Index k = 0; k < adjacency.outerSize(); ++k) {
    for (typename SparseMatrixX<Scalar>::InnerIterator it(adjacency, k); it; ++it) {
      // The degree product is grouped first so the (i,j) and (j,i) entries
      // round identically and the stored matrix is bitwise symmetric.
      entries.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                           -it.value() * (inv_sqrt(it.row()) * inv_sqrt(it.col())));
    }
  }
  SparseLaplacian<Scalar> out;
  out.degrees = std::move(degrees);
  out.matrix.resize(dim, dim);
  out.matrix.setFromTriplets(entries.begin(), entries.end());
  return out;
}

}  // namespace dgm
