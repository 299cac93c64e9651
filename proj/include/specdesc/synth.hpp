#pragma once

#include "specdesc/mesh.hpp"

#include <optional>

namespace specdesc::synth {

// Parametric test shapes. Every generator is deterministic.

/// Icosahedron refined by `subdivisions` rounds of 4-1 splitting and projected
/// onto the sphere. Vertices of coarser levels form a prefix of finer ones.
TriangleMesh icosphere(int subdivisions, Scalar radius = 1.0);

/// Flat grid of nx x ny cells over [0, width] x [0, height], each cell split
/// along the same diagonal. Vertex (i, j) has index j * (nx + 1) + i.
TriangleMesh grid(Index nx, Index ny, Scalar width = 1.0, Scalar height = 1.0);

TriangleMesh torus(Index major_segments, Index minor_segments, Scalar major_radius = 1.0,
                   Scalar minor_radius = 0.4);

/// Flat ring between two radii; has two boundary loops.
TriangleMesh annulus(Index radial_segments, Index angular_segments, Scalar inner_radius = 0.5,
                     Scalar outer_radius = 1.5);

/// Sphere elongated along z into a pill shape.
TriangleMesh capsule(int subdivisions, Scalar elongation = 0.8);

/// A protrusion grown radially out of the unit sphere around `direction`.
struct Limb {
  Vector3 direction;
  Scalar length = 1.0;
  Scalar half_angle = 0.4;  // radians
};

/// Sphere with limbs ("articulated multi-sphere"). Keeps the unit-sphere
/// direction of every vertex so joints can be bent afterwards.
struct ArticulatedShape {
  TriangleMesh mesh;
  std::vector<Limb> limbs;
  VertexMatrix directions;  // unit-sphere position of each vertex
  /// Mirror map x -> -x when the limb layout is bilaterally symmetric.
  std::optional<CorrespondenceMap> symmetry;
};

ArticulatedShape articulated(int subdivisions, std::vector<Limb> limbs);

/// Two-armed, two-legged layout with a head; mirror symmetric in x.
std::vector<Limb> biped_limbs();
/// Four legs, head and tail; mirror symmetric in x.
std::vector<Limb> quadruped_limbs();

/// Mirror map x -> -x found by matching coordinates; kNone where no vertex
/// lies within `tolerance` of the mirrored position.
CorrespondenceMap mirror_map(const TriangleMesh& mesh, Scalar tolerance = 1e-9);

enum class Deformation { Identity, Rigid, Bend, Jitter, Holes, Decimate };

std::string to_string(Deformation kind);
Deformation deformation_from_string(std::string_view name);

/// Number of strengths per transformation, mirroring the benchmark taxonomy.
inline constexpr int kStrengths = 5;

struct DeformedShape {
  TriangleMesh mesh;
  /// Vertex map from the null shape onto the deformed one.
  CorrespondenceMap from_null;
};

/// Jitter standard deviation per coordinate, as a fraction of the diameter,
/// for each unit of strength.
inline constexpr Scalar kJitterPerStrength = 0.001;

/// Applies one transformation at strength 0..kStrengths. Strength 0 returns
/// the null mesh unchanged. `diameter` sets the scale of the jitter, hole and
/// translation magnitudes. Bending needs the articulated description.
DeformedShape deform(const TriangleMesh& null_shape, Deformation kind, int strength, std::uint64_t seed,
                     Scalar diameter, const ArticulatedShape* articulation = nullptr);

/// Removes roughly `fraction` of the vertices by half-edge collapses. Removed
/// vertices map to the vertex they were collapsed into.
DeformedShape decimate(const TriangleMesh& mesh, Scalar fraction, std::uint64_t seed);

/// Deletes the faces touching `holes` geodesic discs of radius `radius` and
/// keeps the largest remaining component.
DeformedShape punch_holes(const TriangleMesh& mesh, int holes, Scalar radius, std::uint64_t seed);

}  // namespace specdesc::synth
