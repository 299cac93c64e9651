#include "specdesc/synth.hpp"

#include "specdesc/geodesic.hpp"
#include "specdesc/random.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <unordered_map>

namespace specdesc::synth {

namespace {

TriangleMesh from_lists(const std::vector<Vector3>& vertices, const std::vector<std::array<std::int32_t, 3>>& faces) {
  VertexMatrix v(static_cast<Index>(vertices.size()), 3);
  for (std::size_t i = 0; i < vertices.size(); ++i) v.row(static_cast<Index>(i)) = vertices[i].transpose();
  FaceMatrix f(static_cast<Index>(faces.size()), 3);
  for (std::size_t i = 0; i < faces.size(); ++i) {
    f.row(static_cast<Index>(i)) << faces[i][0], faces[i][1], faces[i][2];
  }
  return TriangleMesh(std::move(v), std::move(f));
}

Scalar smoothstep(Scalar t) {
  t = std::clamp(t, Scalar{0}, Scalar{1});
  return t * t * (3 - 2 * t);
}

// Normalised position along a limb: 0 outside the limb cap, 1 at its axis.
Scalar limb_coordinate(const Vector3& direction, const Limb& limb) {
  const Scalar c = std::cos(limb.half_angle);
  return std::clamp((direction.dot(limb.direction.normalized()) - c) / (1 - c), Scalar{0}, Scalar{1});
}

// Subset of `mesh` made of faces with keep_face set; returns the mesh restricted
// to its largest face-connected component and the old -> new vertex map.
DeformedShape restrict_faces(const TriangleMesh& mesh, const std::vector<bool>& keep_face) {
  const Index nv = mesh.num_vertices();
  const auto& faces = mesh.faces();
  std::vector<Index> parent(static_cast<std::size_t>(nv));
  std::iota(parent.begin(), parent.end(), Index{0});
  auto find = [&](Index x) {
    while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    return x;
  };
  for (Index f = 0; f < faces.rows(); ++f) {
    if (!keep_face[static_cast<std::size_t>(f)]) continue;
    for (int k = 0; k < 2; ++k) {
      const Index a = find(faces(f, k)), b = find(faces(f, k + 1));
      if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    }
  }
  std::map<Index, Index> component_faces;
  for (Index f = 0; f < faces.rows(); ++f) {
    if (keep_face[static_cast<std::size_t>(f)]) ++component_faces[find(faces(f, 0))];
  }
  if (component_faces.empty()) throw UsageError("deformation removed every face");
  Index best = component_faces.begin()->first;
  for (const auto& [root, count] : component_faces) {
    if (count > component_faces[best]) best = root;
  }

  DeformedShape out{mesh, {}};
  out.from_null.target.assign(static_cast<std::size_t>(nv), CorrespondenceMap::kNone);
  std::vector<Vector3> vertices;
  std::vector<std::array<std::int32_t, 3>> kept;
  for (Index f = 0; f < faces.rows(); ++f) {
    if (!keep_face[static_cast<std::size_t>(f)] || find(faces(f, 0)) != best) continue;
    std::array<std::int32_t, 3> tri{};
    for (int k = 0; k < 3; ++k) {
      auto& slot = out.from_null.target[static_cast<std::size_t>(faces(f, k))];
      if (slot == CorrespondenceMap::kNone) {
        slot = static_cast<std::int64_t>(vertices.size());
        vertices.push_back(mesh.vertices().row(faces(f, k)).transpose());
      }
      tri[static_cast<std::size_t>(k)] = static_cast<std::int32_t>(slot);
    }
    kept.push_back(tri);
  }
  // Renumber so surviving vertices keep their relative order.
  std::vector<std::pair<Index, Index>> order;
  for (Index v = 0; v < nv; ++v) {
    if (out.from_null.target[static_cast<std::size_t>(v)] != CorrespondenceMap::kNone) {
      order.emplace_back(v, out.from_null.target[static_cast<std::size_t>(v)]);
    }
  }
  std::vector<std::int32_t> renumber(vertices.size());
  std::vector<Vector3> sorted(vertices.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    renumber[static_cast<std::size_t>(order[i].second)] = static_cast<std::int32_t>(i);
    sorted[i] = vertices[static_cast<std::size_t>(order[i].second)];
    out.from_null.target[static_cast<std::size_t>(order[i].first)] = static_cast<std::int64_t>(i);
  }
  for (auto& tri : kept) {
    for (auto& i : tri) i = renumber[static_cast<std::size_t>(i)];
  }
  out.mesh = from_lists(sorted, kept);
  return out;
}

}  // namespace

TriangleMesh icosphere(int subdivisions, Scalar radius) {
  const Scalar phi = (1 + std::sqrt(5.0)) / 2;
  std::vector<Vector3> v = {{-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
                            {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
                            {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& p : v) p.normalize();
  std::vector<std::array<std::int32_t, 3>> f = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
      {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int level = 0; level < subdivisions; ++level) {
    std::unordered_map<std::uint64_t, std::int32_t> midpoint;
    auto mid = [&](std::int32_t a, std::int32_t b) {
      const auto key = (static_cast<std::uint64_t>(std::min(a, b)) << 32) | static_cast<std::uint64_t>(std::max(a, b));
      if (auto it = midpoint.find(key); it != midpoint.end()) return it->second;
      const auto idx = static_cast<std::int32_t>(v.size());
      v.push_back((v[static_cast<std::size_t>(a)] + v[static_cast<std::size_t>(b)]).normalized());
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<std::int32_t, 3>> next;
    next.reserve(4 * f.size());
    for (const auto& t : f) {
      const auto ab = mid(t[0], t[1]), bc = mid(t[1], t[2]), ca = mid(t[2], t[0]);
      next.push_back({t[0], ab, ca});
      next.push_back({t[1], bc, ab});
      next.push_back({t[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    f = std::move(next);
  }
  for (auto& p : v) p *= radius;
  return from_lists(v, f);
}

TriangleMesh grid(Index nx, Index ny, Scalar width, Scalar height) {
  if (nx < 1 || ny < 1) throw UsageError("grid needs at least one cell per side");
  std::vector<Vector3> v;
  for (Index j = 0; j <= ny; ++j) {
    for (Index i = 0; i <= nx; ++i) {
      v.emplace_back(width * static_cast<Scalar>(i) / static_cast<Scalar>(nx),
                     height * static_cast<Scalar>(j) / static_cast<Scalar>(ny), 0);
    }
  }
  std::vector<std::array<std::int32_t, 3>> f;
  auto id = [&](Index i, Index j) { return static_cast<std::int32_t>(j * (nx + 1) + i); };
  for (Index j = 0; j < ny; ++j) {
    for (Index i = 0; i < nx; ++i) {
      f.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      f.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return from_lists(v, f);
}

TriangleMesh torus(Index major_segments, Index minor_segments, Scalar major_radius, Scalar minor_radius) {
  if (major_segments < 3 || minor_segments < 3) throw UsageError("torus needs at least 3 segments per direction");
  std::vector<Vector3> v;
  for (Index i = 0; i < major_segments; ++i) {
    const Scalar u = 2 * std::numbers::pi * static_cast<Scalar>(i) / static_cast<Scalar>(major_segments);
    for (Index j = 0; j < minor_segments; ++j) {
      const Scalar w = 2 * std::numbers::pi * static_cast<Scalar>(j) / static_cast<Scalar>(minor_segments);
      const Scalar r = major_radius + minor_radius * std::cos(w);
      v.emplace_back(r * std::cos(u), r * std::sin(u), minor_radius * std::sin(w));
    }
  }
  std::vector<std::array<std::int32_t, 3>> f;
  auto id = [&](Index i, Index j) {
    return static_cast<std::int32_t>((i % major_segments) * minor_segments + (j % minor_segments));
  };
  for (Index i = 0; i < major_segments; ++i) {
    for (Index j = 0; j < minor_segments; ++j) {
      f.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      f.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return from_lists(v, f);
}

TriangleMesh annulus(Index radial_segments, Index angular_segments, Scalar inner_radius, Scalar outer_radius) {
  if (radial_segments < 1 || angular_segments < 3) throw UsageError("annulus needs at least 1 x 3 segments");
  std::vector<Vector3> v;
  for (Index i = 0; i <= radial_segments; ++i) {
    const Scalar r = inner_radius + (outer_radius - inner_radius) * static_cast<Scalar>(i) / static_cast<Scalar>(radial_segments);
    for (Index j = 0; j < angular_segments; ++j) {
      const Scalar a = 2 * std::numbers::pi * static_cast<Scalar>(j) / static_cast<Scalar>(angular_segments);
      v.emplace_back(r * std::cos(a), r * std::sin(a), 0);
    }
  }
  std::vector<std::array<std::int32_t, 3>> f;
  auto id = [&](Index i, Index j) { return static_cast<std::int32_t>(i * angular_segments + (j % angular_segments)); };
  for (Index i = 0; i < radial_segments; ++i) {
    for (Index j = 0; j < angular_segments; ++j) {
      f.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      f.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return from_lists(v, f);
}

TriangleMesh capsule(int subdivisions, Scalar elongation) {
  const TriangleMesh sphere = icosphere(subdivisions);
  VertexMatrix v = sphere.vertices();
  for (Index i = 0; i < v.rows(); ++i) v(i, 2) += elongation * std::tanh(3 * v(i, 2));
  return TriangleMesh(std::move(v), sphere.faces());
}

ArticulatedShape articulated(int subdivisions, std::vector<Limb> limbs) {
  const TriangleMesh sphere = icosphere(subdivisions);
  ArticulatedShape out{sphere, std::move(limbs), sphere.vertices(), std::nullopt};
  for (auto& limb : out.limbs) limb.direction.normalize();
  VertexMatrix v = sphere.vertices();
  for (Index i = 0; i < v.rows(); ++i) {
    const Vector3 u = out.directions.row(i).transpose();
    Scalar extrusion = 0;
    for (const auto& limb : out.limbs) extrusion += limb.length * smoothstep(limb_coordinate(u, limb));
    v.row(i) = (1 + extrusion) * u.transpose();
  }
  out.mesh = TriangleMesh(std::move(v), sphere.faces());

  // The layout is symmetric when every limb has a mirror twin.
  bool symmetric = true;
  for (const auto& limb : out.limbs) {
    const Vector3 m(-limb.direction.x(), limb.direction.y(), limb.direction.z());
    symmetric = symmetric && std::any_of(out.limbs.begin(), out.limbs.end(), [&](const Limb& other) {
                  return (other.direction - m).norm() < 1e-12 && std::abs(other.length - limb.length) < 1e-12 &&
                         std::abs(other.half_angle - limb.half_angle) < 1e-12;
                });
  }
  if (symmetric) out.symmetry = mirror_map(sphere);
  return out;
}

std::vector<Limb> biped_limbs() {
  return {{Vector3(0, 1, 0), 0.7, 0.5},         {Vector3(1, 0.35, 0), 1.3, 0.38},
          {Vector3(-1, 0.35, 0), 1.3, 0.38},    {Vector3(0.35, -1, 0), 1.5, 0.45},
          {Vector3(-0.35, -1, 0), 1.5, 0.45}};
}

std::vector<Limb> quadruped_limbs() {
  return {{Vector3(0, 0.5, 1), 0.9, 0.45},       {Vector3(0, 0.3, -1), 1.1, 0.3},
          {Vector3(0.55, -1, 0.6), 1.2, 0.35},   {Vector3(-0.55, -1, 0.6), 1.2, 0.35},
          {Vector3(0.55, -1, -0.6), 1.2, 0.35},  {Vector3(-0.55, -1, -0.6), 1.2, 0.35}};
}

CorrespondenceMap mirror_map(const TriangleMesh& mesh, Scalar tolerance) {
  const auto& x = mesh.vertices();
  // Bucket by coordinates quantised at a cell size several times the tolerance.
  const Scalar cell = std::max(tolerance, Scalar{1e-12}) * 16;
  auto key = [&](Scalar a, Scalar b, Scalar c) {
    return std::array<std::int64_t, 3>{static_cast<std::int64_t>(std::floor(a / cell)),
                                       static_cast<std::int64_t>(std::floor(b / cell)),
                                       static_cast<std::int64_t>(std::floor(c / cell))};
  };
  std::map<std::array<std::int64_t, 3>, std::vector<Index>> buckets;
  for (Index i = 0; i < x.rows(); ++i) buckets[key(x(i, 0), x(i, 1), x(i, 2))].push_back(i);

  CorrespondenceMap map;
  map.target.assign(static_cast<std::size_t>(x.rows()), CorrespondenceMap::kNone);
  for (Index i = 0; i < x.rows(); ++i) {
    const Vector3 m(-x(i, 0), x(i, 1), x(i, 2));
    const auto k = key(m.x(), m.y(), m.z());
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          auto it = buckets.find({k[0] + dx, k[1] + dy, k[2] + dz});
          if (it == buckets.end()) continue;
          for (Index j : it->second) {
            if ((x.row(j).transpose() - m).norm() <= tolerance) map.target[static_cast<std::size_t>(i)] = j;
          }
        }
      }
    }
  }
  return map;
}

std::string to_string(Deformation kind) {
  switch (kind) {
    case Deformation::Identity: return "identity";
    case Deformation::Rigid: return "rigid";
    case Deformation::Bend: return "bend";
    case Deformation::Jitter: return "jitter";
    case Deformation::Holes: return "holes";
    case Deformation::Decimate: return "decimate";
  }
  return "unknown";
}

Deformation deformation_from_string(std::string_view name) {
  for (auto kind : {Deformation::Identity, Deformation::Rigid, Deformation::Bend, Deformation::Jitter,
                    Deformation::Holes, Deformation::Decimate}) {
    if (to_string(kind) == name) return kind;
  }
  throw UsageError("unknown deformation '" + std::string(name) + "'");
}

DeformedShape deform(const TriangleMesh& null_shape, Deformation kind, int strength, std::uint64_t seed,
                     Scalar diameter, const ArticulatedShape* articulation) {
  if (strength < 0 || strength > kStrengths) {
    throw UsageError("deformation strength must lie in [0, " + std::to_string(kStrengths) + "]");
  }
  const Index nv = null_shape.num_vertices();
  if (strength == 0 || kind == Deformation::Identity) {
    return {null_shape, CorrespondenceMap::identity(nv)};
  }
  auto rng = make_stream(seed, {static_cast<std::uint64_t>(kind), static_cast<std::uint64_t>(strength)});
  std::normal_distribution<Scalar> normal;
  const Scalar s = static_cast<Scalar>(strength);

  switch (kind) {
    case Deformation::Rigid: {
      const Vector3 axis = Vector3(normal(rng), normal(rng), normal(rng)).normalized();
      const Eigen::Matrix3d rotation = Eigen::AngleAxisd(s * std::numbers::pi / 10, axis).toRotationMatrix();
      const Vector3 shift = Vector3(normal(rng), normal(rng), normal(rng)) * (0.2 * s * diameter);
      return {transformed(null_shape, rotation, shift), CorrespondenceMap::identity(nv)};
    }
    case Deformation::Bend: {
      if (articulation == nullptr) throw UsageError("bending needs an articulated shape");
      VertexMatrix v = null_shape.vertices();
      for (const auto& limb : articulation->limbs) {
        const Vector3 c = limb.direction.normalized();
        Vector3 axis = c.cross(Vector3(normal(rng), normal(rng), normal(rng)));
        axis.normalize();
        const Scalar angle = (rng() % 2 == 0 ? 1 : -1) * s * 9.0 * std::numbers::pi / 180;
        const Vector3 joint = c * std::cos(limb.half_angle);
        for (Index i = 0; i < nv; ++i) {
          const Scalar t = limb_coordinate(articulation->directions.row(i).transpose(), limb);
          if (t <= 0) continue;
          // Full rotation beyond the joint band, blended inside it.
          const Scalar w = smoothstep(t / 0.35);
          const Eigen::AngleAxisd rot(w * angle, axis);
          const Vector3 p = v.row(i).transpose();
          v.row(i) = (joint + rot * (p - joint)).transpose();
        }
      }
      return {TriangleMesh(std::move(v), null_shape.faces()), CorrespondenceMap::identity(nv)};
    }
    case Deformation::Jitter: {
      const Scalar sigma = kJitterPerStrength * s * diameter;
      VertexMatrix v = null_shape.vertices();
      for (Index i = 0; i < nv; ++i) {
        for (int k = 0; k < 3; ++k) v(i, k) += sigma * normal(rng);
      }
      return {TriangleMesh(std::move(v), null_shape.faces()), CorrespondenceMap::identity(nv)};
    }
    case Deformation::Holes:
      return punch_holes(null_shape, strength, 0.04 * diameter, rng());
    case Deformation::Decimate:
      return decimate(null_shape, 0.1 * s, rng());
    case Deformation::Identity:
      break;
  }
  return {null_shape, CorrespondenceMap::identity(nv)};
}

DeformedShape punch_holes(const TriangleMesh& mesh, int holes, Scalar radius, std::uint64_t seed) {
  auto rng = make_stream(seed, {0x401e5});
  std::vector<Index> centers;
  for (int h = 0; h < holes; ++h) centers.push_back(uniform_index(rng, mesh.num_vertices()));
  const Vector dist = geodesic_distances(mesh, centers);
  std::vector<bool> keep(static_cast<std::size_t>(mesh.num_faces()), true);
  for (Index f = 0; f < mesh.num_faces(); ++f) {
    for (int k = 0; k < 3; ++k) {
      if (dist[mesh.faces()(f, k)] < radius) keep[static_cast<std::size_t>(f)] = false;
    }
  }
  return restrict_faces(mesh, keep);
}

DeformedShape decimate(const TriangleMesh& mesh, Scalar fraction, std::uint64_t seed) {
  const Index nv = mesh.num_vertices();
  const auto& x = mesh.vertices();
  std::vector<std::array<std::int32_t, 3>> faces(static_cast<std::size_t>(mesh.num_faces()));
  for (Index f = 0; f < mesh.num_faces(); ++f) faces[static_cast<std::size_t>(f)] = {mesh.faces()(f, 0), mesh.faces()(f, 1), mesh.faces()(f, 2)};
  std::vector<bool> face_alive(faces.size(), true);
  std::vector<std::vector<std::int32_t>> incident(static_cast<std::size_t>(nv));
  for (std::size_t f = 0; f < faces.size(); ++f) {
    for (auto v : faces[f]) incident[static_cast<std::size_t>(v)].push_back(static_cast<std::int32_t>(f));
  }
  std::vector<std::int64_t> collapsed_into(static_cast<std::size_t>(nv), CorrespondenceMap::kNone);
  const auto& boundary = mesh.boundary();
  const Scalar min_area = 1e-3 * mesh.area() / static_cast<Scalar>(mesh.num_faces());

  auto normal_of = [&](const std::array<std::int32_t, 3>& t) {
    const Vector3 a = x.row(t[0]).transpose(), b = x.row(t[1]).transpose(), c = x.row(t[2]).transpose();
    return Vector3((b - a).cross(c - a));
  };
  auto neighbours = [&](std::int32_t v) {
    std::vector<std::int32_t> n;
    for (auto f : incident[static_cast<std::size_t>(v)]) {
      for (auto w : faces[static_cast<std::size_t>(f)]) {
        if (w != v) n.push_back(w);
      }
    }
    std::sort(n.begin(), n.end());
    n.erase(std::unique(n.begin(), n.end()), n.end());
    return n;
  };

  const auto target_removed = static_cast<Index>(fraction * static_cast<Scalar>(nv));
  Index removed = 0;
  auto rng = make_stream(seed, {0xdec1});
  for (int pass = 0; pass < 20 && removed < target_removed; ++pass) {
    std::vector<std::int32_t> order(static_cast<std::size_t>(nv));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<bool> locked(static_cast<std::size_t>(nv), false);
    Index removed_this_pass = 0;
    for (auto u : order) {
      if (removed >= target_removed) break;
      const auto su = static_cast<std::size_t>(u);
      if (collapsed_into[su] != CorrespondenceMap::kNone || locked[su] || boundary[su]) continue;
      const auto nu = neighbours(u);
      // Collapse onto the nearest neighbour (smallest index on ties).
      std::int32_t target = -1;
      Scalar best = std::numeric_limits<Scalar>::infinity();
      for (auto w : nu) {
        const Scalar d = (x.row(u) - x.row(w)).norm();
        if (!boundary[static_cast<std::size_t>(w)] && !locked[static_cast<std::size_t>(w)] && d < best) {
          best = d;
          target = w;
        }
      }
      if (target < 0) continue;
      const auto nt = neighbours(target);
      std::vector<std::int32_t> common;
      std::set_intersection(nu.begin(), nu.end(), nt.begin(), nt.end(), std::back_inserter(common));
      if (common.size() != 2) continue;  // link condition
      bool ok = true;
      for (auto c : common) ok = ok && neighbours(c).size() > 3;
      if (!ok || nu.size() + nt.size() < 8) continue;
      for (auto f : incident[su]) {
        auto t = faces[static_cast<std::size_t>(f)];
        if (std::find(t.begin(), t.end(), target) != t.end()) continue;
        const Vector3 before = normal_of(t);
        for (auto& w : t) {
          if (w == u) w = target;
        }
        const Vector3 after = normal_of(t);
        if (0.5 * after.norm() < min_area || after.dot(before) < 0.3 * after.norm() * before.norm()) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;

      for (auto f : incident[su]) {
        auto& t = faces[static_cast<std::size_t>(f)];
        if (std::find(t.begin(), t.end(), target) != t.end()) {
          face_alive[static_cast<std::size_t>(f)] = false;
          for (auto w : t) {
            auto& inc = incident[static_cast<std::size_t>(w)];
            if (w != u) inc.erase(std::remove(inc.begin(), inc.end(), f), inc.end());
          }
        } else {
          for (auto& w : t) {
            if (w == u) w = target;
          }
          incident[static_cast<std::size_t>(target)].push_back(f);
        }
      }
      incident[su].clear();
      collapsed_into[su] = target;
      locked[static_cast<std::size_t>(target)] = true;
      for (auto w : nu) locked[static_cast<std::size_t>(w)] = true;
      ++removed;
      ++removed_this_pass;
    }
    if (removed_this_pass == 0) break;
  }

  // Compact the surviving vertices in their original order.
  std::vector<std::int64_t> new_index(static_cast<std::size_t>(nv), CorrespondenceMap::kNone);
  std::vector<Vector3> vertices;
  for (Index v = 0; v < nv; ++v) {
    if (collapsed_into[static_cast<std::size_t>(v)] == CorrespondenceMap::kNone) {
      new_index[static_cast<std::size_t>(v)] = static_cast<std::int64_t>(vertices.size());
      vertices.push_back(x.row(v).transpose());
    }
  }
  std::vector<std::array<std::int32_t, 3>> kept;
  for (std::size_t f = 0; f < faces.size(); ++f) {
    if (!face_alive[f]) continue;
    std::array<std::int32_t, 3> t{};
    for (int k = 0; k < 3; ++k) t[static_cast<std::size_t>(k)] = static_cast<std::int32_t>(new_index[static_cast<std::size_t>(faces[f][static_cast<std::size_t>(k)])]);
    kept.push_back(t);
  }
  DeformedShape out{from_lists(vertices, kept), {}};
  out.from_null.target.resize(static_cast<std::size_t>(nv));
  for (Index v = 0; v < nv; ++v) {
    std::int64_t w = v;
    while (collapsed_into[static_cast<std::size_t>(w)] != CorrespondenceMap::kNone) w = collapsed_into[static_cast<std::size_t>(w)];
    out.from_null.target[static_cast<std::size_t>(v)] = new_index[static_cast<std::size_t>(w)];
  }
  return out;
}

}  // namespace specdesc::synth
