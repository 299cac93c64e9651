#pragma once

#include "specdesc/eigensolver.hpp"
#include "specdesc/laplacian.hpp"

#include <filesystem>
#include <optional>

namespace specdesc {

/// Truncated Laplace-Beltrami spectrum: ascending eigenvalues and
/// mass-orthonormal eigenfunctions sampled at the vertices.
struct Spectrum {
  Vector eigenvalues;   // s
  Matrix eigenvectors;  // V x s, columns phi_k
  MassMode mass_mode = MassMode::Lumped;
  /// Row sums of the mass matrix (the lumped vertex areas).
  Vector vertex_mass;
  Warnings warnings;

  Index size() const { return eigenvalues.size(); }
  Index num_vertices() const { return eigenvectors.rows(); }
  Scalar largest() const { return eigenvalues[eigenvalues.size() - 1]; }
  /// phi_k(x)^2 for every vertex and eigenfunction.
  Matrix squared_eigenvectors() const { return eigenvectors.array().square().matrix(); }
};

struct SpectrumOptions {
  Index count = 300;
  /// Extra pairs computed so a numerically degenerate cluster is never split
  /// at the truncation boundary.
  Index cluster_extension = 5;
  Scalar cluster_gap = 1e-8;
  /// Meshes below this size use the dense generalized solver.
  Index dense_below = 600;
  LanczosOptions lanczos;
};

Spectrum compute_spectrum(const FemOperator& op, const SpectrumOptions& options);
Spectrum compute_spectrum(const FemOperator& op, Index count);

/// Largest ||S phi - nu M phi|| / ||S phi|| over the retained pairs; pairs with
/// ||S phi|| below `floor` use the absolute residual.
Scalar max_relative_residual(const FemOperator& op, const Spectrum& spectrum, Scalar floor = 1e-12);

/// The first n eigenvalues ("shape DNA").
Vector shape_dna(const Spectrum& spectrum, Index n);

// Spectrum cache container: header, eigenvalues, eigenvectors, vertex mass and
// the content hash of the inputs it was computed from.
inline constexpr std::uint32_t kSpectrumCacheVersion = 1;

std::uint64_t spectrum_cache_hash(std::string_view mesh_bytes, Index count, MassMode mode);
void save_spectrum(const Spectrum& spectrum, std::uint64_t content_hash, const std::filesystem::path& path);

struct CachedSpectrum {
  Spectrum spectrum;
  std::uint64_t content_hash = 0;
};
/// Throws DataError when the file is missing, truncated or fails its checksum.
CachedSpectrum load_spectrum(const std::filesystem::path& path);

}  // namespace specdesc
