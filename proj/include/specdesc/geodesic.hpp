#pragma once

#include "specdesc/mesh.hpp"

namespace specdesc {

/// Single-source distances along the mesh edge graph.
struct GeodesicField {
  Index source = 0;
  Vector distances;
};

GeodesicField geodesic_distances(const TriangleMesh& mesh, Index source);

/// Distance from every vertex to the nearest of `sources`.
Vector geodesic_distances(const TriangleMesh& mesh, std::span<const Index> sources);

/// Vertices closer than `radius` to the nearest source, ascending by index.
struct GeodesicBall {
  std::vector<Index> vertices;
  std::vector<Scalar> distances;
};
/// Dijkstra stopped at `radius`.
GeodesicBall geodesic_ball(const TriangleMesh& mesh, std::span<const Index> sources, Scalar radius);

/// Maximum pairwise geodesic distance within a farthest-point sample of
/// `samples` vertices seeded at vertex 0.
Scalar intrinsic_diameter(const TriangleMesh& mesh, Index samples);

/// Greedy farthest-point sampling in the geodesic metric. Starts at vertex 0;
/// ties go to the smallest vertex index.
std::vector<Index> farthest_point_sample(const TriangleMesh& mesh, Index k);

/// Farthest-point sampling in descriptor space; `field` holds one row per
/// vertex and distances are Euclidean between rows.
std::vector<Index> farthest_point_sample(const Matrix& field, Index k);

}  // namespace specdesc
