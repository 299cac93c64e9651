#pragma once

#include "specdesc/mesh.hpp"

namespace specdesc {

enum class MassMode { Lumped, Consistent };

std::string to_string(MassMode mode);
MassMode mass_mode_from_string(std::string_view name);

/// Linear-FEM discretisation of the Laplace-Beltrami operator with Neumann
/// boundary conditions: stiffness S (cotangent weights, positive
/// semi-definite) and mass M. Eigenpairs solve S phi = nu M phi.
struct FemOperator {
  SparseMatrix stiffness;
  SparseMatrix mass;
  MassMode mass_mode = MassMode::Lumped;
  Warnings warnings;

  Index size() const { return stiffness.rows(); }
};

/// Cotangent magnitudes above this are clamped and reported as warnings.
inline constexpr Scalar kMaxCotangent = 1e8;

FemOperator assemble_fem(const TriangleMesh& mesh, MassMode mass_mode = MassMode::Lumped);

}  // namespace specdesc
