#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dgm/types.hpp"
#include "dgm/video.hpp"

namespace dgm {

/// How raw sample values are mapped to intensities on ingest.
enum class ScalingMode {
  unit_interval,  // divide by the file's declared maximum value
  none,           // keep raw sample values
};

/// Read one PGM (P5) or PPM (P6) frame as a grayscale matrix. Color samples
/// are reduced with the BT.601 luma weights 0.299/0.587/0.114. Only 8-bit
/// files (maxval <= 255) are supported.
MatrixX<double> read_frame(const std::filesystem::path& path,
                           ScalingMode scaling = ScalingMode::unit_interval);

/// Write a [0,1] grayscale image as binary PGM (P5, maxval 255). Values are
/// clamped to [0,1] and rounded.
void write_pgm(const std::filesystem::path& path, const MatrixX<double>& image);

/// Binary {0,255} mask images.
void write_mask_pgm(const std::filesystem::path& path,
                    const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>& mask);
Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> read_mask_pgm(
    const std::filesystem::path& path);

/// Load every frame of a directory, lexicographically by filename. A
/// `frames.txt` manifest (one filename per line) overrides the ordering.
/// All frames must agree in shape and at least two are required.
VideoFrames<double> ingest_frames(const std::filesystem::path& directory,
                                  ScalingMode scaling = ScalingMode::unit_interval);

/// Video matrix container: "DGM1" magic, three little-endian u64 fields
/// (frame rows, frame cols, frame count), then the pixels-by-frames matrix
/// as row-major little-endian f64.
void write_matrix(const std::filesystem::path& path, const VideoMatrix<double>& matrix);
VideoMatrix<double> read_matrix(const std::filesystem::path& path);

/// Sparse matrix text export: header "DGL1 dim nnz", then one "row col value"
/// triplet per line in row-major order.
void write_triplets(const std::filesystem::path& path,
                    const SparseMatrixX<double>& matrix);
SparseMatrixX<double> read_triplets(const std::filesystem::path& path);

}  // namespace dgm
