#pragma once

// Lowest eigenpairs of a real symmetric matrix.
//
// Dense matrices up to `dense_threshold` are diagonalized completely; larger
// ones use shift-invert block Lanczos with full reorthogonalization.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>

namespace metaqed {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct EigenOptions {
    Eigen::Index dense_threshold = 4096;
    int krylov_blocks = 8;         ///< block steps between Rayleigh-Ritz restarts
    int max_restarts = 30;
    double tolerance = 1e-10;      ///< residual norm |H x - l x|, same units as H
    std::uint64_t seed = 0x5eed;
};

struct EigenPairs {
    Eigen::VectorXd values;   ///< ascending
    Eigen::MatrixXd vectors;  ///< one column per value
    bool dense = true;
};

/// `count` lowest eigenpairs of the symmetric matrix `h` (only the full
/// matrix is read; it must be stored symmetric).
EigenPairs lowest_eigenpairs(const SparseMatrix& h, Eigen::Index count,
                             const EigenOptions& options = {});

}  // namespace metaqed
