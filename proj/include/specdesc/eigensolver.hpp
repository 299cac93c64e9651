#pragma once

#include "specdesc/common.hpp"

namespace specdesc {

struct LanczosOptions {
  /// Vectors per block. Blocks larger than the largest exactly repeated
  /// eigenvalue let the iteration resolve symmetric multiplets.
  Index block_size = 6;
  /// Krylov subspace dimension; 0 picks one from the requested count.
  Index krylov_dim = 0;
  /// Relative Ritz residual in the shift-inverted operator.
  Scalar tolerance = 1e-11;
  int max_restarts = 500;
  std::uint64_t seed = 0x5eedULL;
};

struct EigenpairResult {
  Vector values;   // ascending
  Matrix vectors;  // B-orthonormal columns
  int restarts = 0;
  Index operator_applications = 0;
};

/// The `count` eigenpairs of A x = lambda B x nearest above `shift`, for
/// symmetric A and symmetric positive definite B, via thick-restart block
/// Lanczos on (A - shift B)^{-1} B in the B inner product. A - shift B must be
/// positive definite.
EigenpairResult shift_invert_lanczos(const SparseMatrix& a, const SparseMatrix& b, Index count, Scalar shift,
                                     const LanczosOptions& options = {});

/// Dense generalized solver for small problems; returns the `count` smallest pairs.
EigenpairResult dense_generalized_eigenpairs(const SparseMatrix& a, const SparseMatrix& b, Index count);

}  // namespace specdesc
