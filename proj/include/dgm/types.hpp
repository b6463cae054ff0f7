#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace dgm {

template <class Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <class Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <class Scalar>
using SparseMatrixX = Eigen::SparseMatrix<Scalar>;

/// Binary pixel volume stored like a data matrix: one column per frame,
/// rows in the same column-major vectorization as the video matrix.
using MaskMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

using Index = Eigen::Index;

}  // namespace dgm
