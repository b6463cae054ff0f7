#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dgm/types.hpp"

namespace dgm {

/// Ordered grayscale frames, all of one shape, intensities in [0, 1].
template <class Scalar = double>
struct VideoFrames {
  std::vector<MatrixX<Scalar>> frames;

  Index frame_rows() const { return frames.empty() ? 0 : frames.front().rows(); }
  Index frame_cols() const { return frames.empty() ? 0 : frames.front().cols(); }
  Index frame_count() const { return static_cast<Index>(frames.size()); }
};

/// Video as a dense pixels-by-frames matrix. Column j is the column-major
/// vectorization of frame j, so entry (r + c * frame_rows, j) is pixel (r, c).
template <class Scalar = double>
struct VideoMatrix {
  MatrixX<Scalar> values;  // (frame_rows * frame_cols) x frame_count
  Index frame_rows = 0;
  Index frame_cols = 0;

  Index pixel_count() const { return values.rows(); }
  Index frame_count() const { return values.cols(); }
};

template <class Scalar>
VideoMatrix<Scalar> to_matrix(const VideoFrames<Scalar>& video) {
  const Index n1 = video.frame_rows();
  const Index n2 = video.frame_cols();
  VideoMatrix<Scalar> out;
  out.frame_rows = n1;
  out.frame_cols = n2;
  out.values.resize(n1 * n2, video.frame_count());
  for (Index j = 0; j < video.frame_count(); ++j) {
    const auto& frame = video.frames[static_cast<std::size_t>(j)];
    if (frame.rows() != n1 || frame.cols() != n2) {
      throw std::invalid_argument("to_matrix: frames differ in shape");
    }
    out.values.col(j) = frame.reshaped();
  }
  return out;
}

template <class Scalar>
VideoFrames<Scalar> from_matrix(const VideoMatrix<Scalar>& matrix) {
  if (matrix.values.rows() != matrix.frame_rows * matrix.frame_cols) {
    throw std::invalid_argument("from_matrix: row count does not match shape");
  }
  VideoFrames<Scalar> out;
  out.frames.reserve(static_cast<std::size_t>(matrix.frame_count()));
  for (Index j = 0; j < matrix.frame_count(); ++j) {
    out.frames.push_back(
        matrix.values.col(j).reshaped(matrix.frame_rows, matrix.frame_cols));
  }
  return out;
}

/// Reshape one column-major pixel vector back into a frame.
template <class Scalar>
MatrixX<Scalar> to_frame(const VectorX<Scalar>& pixels, Index frame_rows,
                         Index frame_cols) {
  if (pixels.size() != frame_rows * frame_cols) {
    throw std::invalid_argument("to_frame: size does not match shape");
  }
  return pixels.reshaped(frame_rows, frame_cols);
}

/// Drop frames whose l1 distance to the last kept frame falls below
/// `threshold` (strict inequality; threshold 0 keeps everything). The first
/// frame is always kept. Returns the reduced matrix plus the kept column
/// indices into the input.
template <class Scalar>
std::pair<VideoMatrix<Scalar>, std::vector<Index>> remove_motionless_frames(
    const VideoMatrix<Scalar>& video, Scalar threshold) {
  if (threshold < Scalar(0)) {
    throw std::invalid_argument("remove_motionless_frames: negative threshold");
  }
  if (video.frame_count() < 2) {
    throw std::invalid_argument("remove_motionless_frames: need at least 2 frames");
  }
  std::vector<Index> kept;
  kept.push_back(0);
  for (Index j = 1; j < video.frame_count(); ++j) {
    const Scalar change =
        (video.values.col(j) - video.values.col(kept.back())).template lpNorm<1>();
    if (!(change < threshold)) kept.push_back(j);
  }
  if (kept.size() < 2) {
    throw std::runtime_error(
        "remove_motionless_frames: insufficient motion, only one frame left");
  }
  VideoMatrix<Scalar> out;
  out.frame_rows = video.frame_rows;
  out.frame_cols = video.frame_cols;
  out.values.resize(video.pixel_count(), static_cast<Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) {
    out.values.col(static_cast<Index>(j)) = video.values.col(kept[j]);
  }
  return {std::move(out), std::move(kept)};
}

/// Add i.i.d. zero-mean Gaussian noise. The result is not clipped back to
/// [0, 1]; the additive model is kept exact so error metrics stay unbiased.
template <class Scalar>
VideoMatrix<Scalar> add_gaussian_noise(const VideoMatrix<Scalar>& video,
                                       Scalar sigma, std::uint64_t seed) {
  if (sigma < Scalar(0)) {
    throw std::invalid_argument("add_gaussian_noise: negative sigma");
  }
  VideoMatrix<Scalar> out = video;
  if (sigma == Scalar(0)) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<Scalar> gauss(Scalar(0), sigma);
  for (Index j = 0; j < out.values.cols(); ++j) {
    for (Index i = 0; i < out.values.rows(); ++i) {
      out.values(i, j) += gauss(rng);
    }
  }
  return out;
}

/// Column mean of the background matrix reshaped to a frame.
template <class Scalar>
MatrixX<Scalar> mean_background_image(const VideoMatrix<Scalar>& background) {
  if (background.frame_count() == 0) {
    throw std::invalid_argument("mean_background_image: empty matrix");
  }
  const VectorX<Scalar> mean = background.values.rowwise().mean();
  return to_frame(mean, background.frame_rows, background.frame_cols);
}

enum class BackgroundKind { constant, gradient, image };
enum class ObjectKind { none, square, disk };

/// Recipe for a synthetic static-camera clip: a fixed background, one moving
/// object painted over it, optional additive Gaussian noise.
struct SyntheticSpec {
  Index frame_rows = 40;
  Index frame_cols = 50;
  BackgroundKind background = BackgroundKind::gradient;
  double background_value = 0.5;     // constant background intensity
  double gradient_low = 0.2;         // gradient endpoints
  double gradient_high = 0.5;
  MatrixX<double> background_image;  // used when background == image
  ObjectKind object = ObjectKind::square;
  double object_intensity = 0.9;
  Index object_size = 8;                            // square side / disk diameter
  std::vector<std::pair<Index, Index>> trajectory;  // object center per frame
  double noise_sigma = 0.0;
};

/// Straight-line trajectory helper: center starts at (row0, col0) and moves
/// (d_row, d_col) pixels per frame.
inline std::vector<std::pair<Index, Index>> linear_trajectory(Index row0, Index col0,
                                                              Index d_row, Index d_col,
                                                              Index frames) {
  std::vector<std::pair<Index, Index>> traj;
  traj.reserve(static_cast<std::size_t>(frames));
  for (Index j = 0; j < frames; ++j) {
    traj.emplace_back(row0 + j * d_row, col0 + j * d_col);
  }
  return traj;
}

template <class Scalar = double>
struct SyntheticVideo {
  VideoFrames<Scalar> frames;
  MatrixX<Scalar> background;  // ground-truth background frame
  MaskMatrix masks;            // pixels x frames, true where the object was painted
};

namespace detail {

inline MatrixX<double> make_background(const SyntheticSpec& spec) {
  switch (spec.background) {
    case BackgroundKind::constant:
      return MatrixX<double>::Constant(spec.frame_rows, spec.frame_cols,
                                       spec.background_value);
    case BackgroundKind::gradient: {
      // Diagonal ramp from gradient_low at the top-left corner to
      // gradient_high at the bottom-right one.
      MatrixX<double> bg(spec.frame_rows, spec.frame_cols);
      const double span = static_cast<double>(spec.frame_rows + spec.frame_cols - 2);
      for (Index r = 0; r < spec.frame_rows; ++r) {
        for (Index c = 0; c < spec.frame_cols; ++c) {
          const double t = span > 0 ? static_cast<double>(r + c) / span : 0.0;
          bg(r, c) = spec.gradient_low + t * (spec.gradient_high - spec.gradient_low);
        }
      }
      return bg;
    }
    case BackgroundKind::image:
      if (spec.background_image.rows() != spec.frame_rows ||
          spec.background_image.cols() != spec.frame_cols) {
        throw std::invalid_argument("synthesize: background image shape mismatch");
      }
      return spec.background_image;
  }
  throw std::invalid_argument("synthesize: unknown background kind");
}

// Paint the object centered at (row, col), clipped at the borders. Marks
// painted pixels in the mask column.
inline void paint_object(const SyntheticSpec& spec, Index row, Index col,
                         MatrixX<double>& frame, MaskMatrix& masks, Index frame_idx) {
  if (spec.object == ObjectKind::none || spec.object_size <= 0) return;
  const Index n1 = spec.frame_rows;
  const Index n2 = spec.frame_cols;
  const Index half = spec.object_size / 2;
  const Index lo_r = row - half;
  const Index lo_c = col - half;
  const double radius = static_cast<double>(spec.object_size) / 2.0;
  // Even sizes center the object between pixels; shift by half a pixel so the
  // painted disk stays symmetric.
  const double center_shift = spec.object_size % 2 == 0 ? 0.5 : 0.0;
  for (Index r = std::max<Index>(lo_r, 0);
       r < std::min(lo_r + spec.object_size, n1); ++r) {
    for (Index c = std::max<Index>(lo_c, 0);
         c < std::min(lo_c + spec.object_size, n2); ++c) {
      if (spec.object == ObjectKind::disk) {
        const double dr = static_cast<double>(r - row) + center_shift;
        const double dc = static_cast<double>(c - col) + center_shift;
        if (dr * dr + dc * dc > radius * radius) continue;
      }
      frame(r, c) = spec.object_intensity;
      masks(r + c * n1, frame_idx) = true;
    }
  }
}

}  // namespace detail

/// Render the synthetic clip together with its exact ground truth. The same
/// spec and seed always reproduce the same bytes.
inline SyntheticVideo<double> synthesize(const SyntheticSpec& spec, std::uint64_t seed) {
  if (spec.trajectory.empty()) {
    throw std::invalid_argument("synthesize: empty trajectory");
  }
  if (spec.frame_rows <= 0 || spec.frame_cols <= 0) {
    throw std::invalid_argument("synthesize: frame shape must be positive");
  }
  if (spec.object_intensity < 0.0 || spec.object_intensity > 1.0) {
    throw std::invalid_argument("synthesize: object intensity outside [0, 1]");
  }
  if (spec.noise_sigma < 0.0) {
    throw std::invalid_argument("synthesize: negative noise sigma");
  }

  const Index m = static_cast<Index>(spec.trajectory.size());
  SyntheticVideo<double> out;
  out.background = detail::make_background(spec);
  out.masks = MaskMatrix::Constant(spec.frame_rows * spec.frame_cols, m, false);
  out.frames.frames.reserve(static_cast<std::size_t>(m));

  for (Index j = 0; j < m; ++j) {
    MatrixX<double> frame = out.background;
    const auto [row, col] = spec.trajectory[static_cast<std::size_t>(j)];
    detail::paint_object(spec, row, col, frame, out.masks, j);
    if (spec.object != ObjectKind::none && spec.object_size > 0 &&
        out.masks.col(j).count() == 0) {
      throw std::invalid_argument(
          "synthesize: trajectory leaves the object entirely outside frame " +
          std::to_string(j));
    }
    out.frames.frames.push_back(std::move(frame));
  }

  if (spec.noise_sigma > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, spec.noise_sigma);
    for (auto& frame : out.frames.frames) {
      for (Index c = 0; c < frame.cols(); ++c) {
        for (Index r = 0; r < frame.rows(); ++r) {
          frame(r, c) += gauss(rng);
        }
      }
    }
  }
  return out;
}

}  // namespace dgm
