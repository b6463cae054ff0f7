#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "dgm/types.hpp"

namespace dgm {

/// PSNR value reported when the error is exactly zero.
inline constexpr double kPsnrCap = 99.0;

/// Relative Frobenius error ||truth - estimate||_F / ||truth||_F.
template <class DerivedA, class DerivedB>
typename DerivedA::Scalar relative_error(const Eigen::MatrixBase<DerivedA>& estimate,
                                         const Eigen::MatrixBase<DerivedB>& truth) {
  using Scalar = typename DerivedA::Scalar;
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols()) {
    throw std::invalid_argument("relative_error: shape mismatch");
  }
  const Scalar base = truth.norm();
  if (base == Scalar(0)) {
    throw std::invalid_argument("relative_error: zero truth norm");
  }
  return (truth.derived() - estimate.derived()).norm() / base;
}

/// Peak signal-to-noise ratio in decibels, 20 log10(i_max / rms error), with
/// the mean squared error taken over all entries. Zero error returns the
/// 99 dB cap.
template <class DerivedA, class DerivedB>
typename DerivedA::Scalar psnr(const Eigen::MatrixBase<DerivedA>& estimate,
                               const Eigen::MatrixBase<DerivedB>& truth,
                               typename DerivedA::Scalar i_max = 1) {
  using Scalar = typename DerivedA::Scalar;
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols()) {
    throw std::invalid_argument("psnr: shape mismatch");
  }
  const Scalar mse = (estimate.derived() - truth.derived()).squaredNorm() /
                     static_cast<Scalar>(estimate.size());
  if (mse == Scalar(0)) return Scalar(kPsnrCap);
  return Scalar(20) * std::log10(i_max / std::sqrt(mse));
}

/// Hard threshold on the foreground magnitude: pixel marked iff |s| > t.
template <class Derived>
MaskMatrix threshold_foreground(const Eigen::MatrixBase<Derived>& foreground,
                                typename Derived::Scalar threshold) {
  if (threshold < typename Derived::Scalar(0)) {
    throw std::invalid_argument("threshold_foreground: negative threshold");
  }
  return foreground.derived().array().abs() > threshold;
}

/// Precision/recall/F-measure of a predicted mask volume against ground
/// truth. Degenerate 0/0 ratios are reported as 0 and flagged rather than
/// thrown.
struct PrReFm {
  double precision = 0;
  double recall = 0;
  double f_measure = 0;
  bool degenerate = false;
};

inline PrReFm pr_re_fm(const MaskMatrix& predicted, const MaskMatrix& truth) {
  if (predicted.rows() != truth.rows() || predicted.cols() != truth.cols()) {
    throw std::invalid_argument("pr_re_fm: shape mismatch");
  }
  const auto tp = static_cast<double>((predicted && truth).count());
  const auto fp = static_cast<double>((predicted && !truth).count());
  const auto fn = static_cast<double>((!predicted && truth).count());

  PrReFm out;
  if (tp + fp == 0) {
    out.degenerate = true;
  } else {
    out.precision = tp / (tp + fp);
  }
  if (tp + fn == 0) {
    out.degenerate = true;
  } else {
    out.recall = tp / (tp + fn);
  }
  if (out.precision + out.recall == 0) {
    out.degenerate = true;
    out.f_measure = 0;
  } else {
    out.f_measure =
        2 * out.precision * out.recall / (out.precision + out.recall);
  }
  return out;
}

/// Flat record of one evaluation run, mirrored by the key=value report the
/// CLI emits.
struct EvalReport {
  double re_mean_image = 0;    // relative error of the mean background image
  double psnr_mean_image = 0;  // PSNR of the mean background image
  double re_matrix = 0;        // same metrics on full matrices when available
  double psnr_matrix = 0;
  bool has_matrix_metrics = false;
  double precision = 0;
  double recall = 0;
  double f_measure = 0;
  bool degenerate_masks = false;
  bool has_mask_metrics = false;
  double fg_threshold = 0;
  double runtime_seconds = 0;
};

}  // namespace dgm
