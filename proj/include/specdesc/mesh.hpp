#pragma once

#include "specdesc/common.hpp"

#include <array>
#include <filesystem>
#include <span>
#include <string_view>

namespace specdesc {

/// Undirected edge graph in compressed-row form. Neighbours of each vertex are
/// sorted by index, so the graph does not depend on face order.
struct EdgeGraph {
  std::vector<Index> offsets;    // V + 1
  std::vector<Index> neighbors;  // 2E
  std::vector<Scalar> lengths;   // 2E, Euclidean edge length

  Index num_vertices() const { return static_cast<Index>(offsets.size()) - 1; }
  Index num_edges() const { return static_cast<Index>(neighbors.size()) / 2; }
};

/// A validated triangle mesh: a connected, edge-manifold surface without
/// degenerate faces. Construction throws ValidationError otherwise.
class TriangleMesh {
 public:
  TriangleMesh(VertexMatrix vertices, FaceMatrix faces);

  Index num_vertices() const { return vertices_.rows(); }
  Index num_faces() const { return faces_.rows(); }
  Index num_edges() const { return graph_.num_edges(); }
  Index euler_characteristic() const { return num_vertices() - num_edges() + num_faces(); }

  const VertexMatrix& vertices() const { return vertices_; }
  const FaceMatrix& faces() const { return faces_; }
  const EdgeGraph& edge_graph() const { return graph_; }

  /// True for vertices on an edge shared by a single face.
  const std::vector<bool>& boundary() const { return boundary_; }
  bool has_boundary() const;

  Vector face_areas() const;
  Scalar area() const;
  Scalar mean_edge_length() const;

 private:
  VertexMatrix vertices_;
  FaceMatrix faces_;
  EdgeGraph graph_;
  std::vector<bool> boundary_;
};

/// Returns a rigidly moved copy: x -> R x + t.
TriangleMesh transformed(const TriangleMesh& mesh, const Eigen::Matrix3d& rotation,
                         const Vector3& translation);
TriangleMesh scaled(const TriangleMesh& mesh, Scalar factor);

enum class MeshFormat { Off, Obj };

MeshFormat format_from_extension(const std::filesystem::path& path);

TriangleMesh load_mesh(const std::filesystem::path& path, MeshFormat format);
TriangleMesh load_mesh(const std::filesystem::path& path);
TriangleMesh parse_off(std::string_view text);
TriangleMesh parse_obj(std::string_view text);

std::string to_off(const TriangleMesh& mesh);
void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path);

/// Writes an OFF file carrying per-vertex RGBA colours ("COFF").
void save_colored_off(const TriangleMesh& mesh, std::span<const std::array<float, 4>> colors,
                      const std::filesystem::path& path);

/// Vertex-to-vertex map from a shape X onto a shape X+. Entries equal to
/// kNone mark source vertices without a counterpart (holes, decimation).
struct CorrespondenceMap {
  static constexpr std::int64_t kNone = -1;

  std::vector<std::int64_t> target;
  /// Optional image of the intrinsic-symmetric counterpart; empty when the
  /// map carries no symmetry information.
  std::vector<std::int64_t> symmetric;

  static CorrespondenceMap identity(Index vertices);

  Index size() const { return static_cast<Index>(target.size()); }
  bool has_symmetric() const { return !symmetric.empty(); }
  std::int64_t operator[](Index i) const { return target[static_cast<std::size_t>(i)]; }

  /// Throws ValidationError when a target index falls outside [0, target_vertices).
  void validate(Index source_vertices, Index target_vertices) const;
};

/// Composition: first `a`, then `b`.
CorrespondenceMap compose(const CorrespondenceMap& a, const CorrespondenceMap& b);

CorrespondenceMap load_correspondence(const std::filesystem::path& path);
void save_correspondence(const CorrespondenceMap& map, const std::filesystem::path& path);

}  // namespace specdesc
