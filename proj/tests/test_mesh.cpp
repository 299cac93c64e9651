#include "support.hpp"

#include "specdesc/geodesic.hpp"
#include "specdesc/io.hpp"
#include "specdesc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

using namespace specdesc;

TEST_SUITE("mesh") {

TEST_CASE("OFF tetrahedron loads with four vertices and faces") {
  const auto mesh = parse_off("OFF\n4 4 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 2 1\n3 0 1 3\n3 0 3 2\n3 1 2 3\n");
  CHECK(mesh.num_vertices() == 4);
  CHECK(mesh.num_faces() == 4);
  CHECK(mesh.euler_characteristic() == 2);
  CHECK(mesh.vertices().row(3).isApprox(Eigen::RowVector3d(0, 0, 1)));
}

TEST_CASE("OBJ indices are one-based") {
  CHECK_THROWS_AS(parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n"), ParseError);
  const auto mesh = parse_obj("# tetra\nv 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nvn 0 0 1\nf 1 3 2\nf 1 2 4\nf 1/1 4/1 3/1\nf 2 3 4\n");
  CHECK(mesh.num_vertices() == 4);
  CHECK(mesh.faces()(2, 1) == 3);
}

TEST_CASE("malformed OFF reports the line") {
  try {
    parse_off("OFF\n3 1 0\n0 0 0\n1 x 0\n0 1 0\n3 0 1 2\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
  CHECK_THROWS_AS(parse_off(""), ParseError);
  CHECK_THROWS_AS(parse_off("OFF\n4 4 0\n0 0 0\n"), ParseError);
}

TEST_CASE("icosphere level 4 has 2562 vertices and genus zero") {
  const auto mesh = synth::icosphere(4);
  CHECK(mesh.num_vertices() == 2562);
  CHECK(mesh.euler_characteristic() == 2);
  CHECK_FALSE(mesh.has_boundary());
  // Vertex order survives a round trip through the file format.
  const auto again = parse_off(to_off(mesh));
  CHECK(again.vertices() == mesh.vertices());
  CHECK(again.faces() == mesh.faces());
}

TEST_CASE("validation names the offending element") {
  VertexMatrix v(4, 3);
  v << 0, 0, 0, 1, 0, 0, 0, 1, 0, 2, 2, 0;
  FaceMatrix out_of_range(1, 3);
  out_of_range << 0, 1, 7;
  CHECK_THROWS_AS(TriangleMesh(v, out_of_range), ValidationError);

  FaceMatrix repeated(2, 3);
  repeated << 0, 1, 2, 1, 1, 3;
  try {
    TriangleMesh(v, repeated);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(e.element() == 1);
  }

  VertexMatrix collinear(3, 3);
  collinear << 0, 0, 0, 1, 0, 0, 2, 0, 0;
  FaceMatrix one(1, 3);
  one << 0, 1, 2;
  CHECK_THROWS_AS(TriangleMesh(collinear, one), ValidationError);

  // Three triangles sharing edge (0, 1).
  VertexMatrix fan(5, 3);
  fan << 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, -1, 0, 0, 0, 1;
  FaceMatrix nonmanifold(3, 3);
  nonmanifold << 0, 1, 2, 1, 0, 3, 0, 1, 4;
  CHECK_THROWS_AS(TriangleMesh(fan, nonmanifold), ValidationError);

  VertexMatrix two(6, 3);
  two << 0, 0, 0, 1, 0, 0, 0, 1, 0, 5, 0, 0, 6, 0, 0, 5, 1, 0;
  FaceMatrix apart(2, 3);
  apart << 0, 1, 2, 3, 4, 5;
  CHECK_THROWS_AS(TriangleMesh(two, apart), ValidationError);
}

TEST_CASE("rigid transforms keep areas and edge lengths") {
  const auto mesh = synth::icosphere(2);
  const auto moved = transformed(mesh, testing::random_rotation(3), Vector3(1, -2, 0.5));
  CHECK(moved.area() == doctest::Approx(mesh.area()).epsilon(1e-12));
  CHECK(scaled(mesh, 2.0).area() == doctest::Approx(4 * mesh.area()).epsilon(1e-12));
}

TEST_CASE("correspondence files round trip") {
  testing::ScratchDir dir("corr");
  CorrespondenceMap map;
  map.target = {2, 0, CorrespondenceMap::kNone};
  map.symmetric = {1, CorrespondenceMap::kNone, 0};
  save_correspondence(map, dir / "m.corr");
  const auto back = load_correspondence(dir / "m.corr");
  CHECK(back.target == map.target);
  CHECK(back.symmetric == map.symmetric);
  CHECK_NOTHROW(back.validate(3, 3));
  CHECK_THROWS_AS(back.validate(3, 2), ValidationError);
  const auto twice = compose(map, map);
  CHECK(twice.target == std::vector<std::int64_t>{CorrespondenceMap::kNone, 2, CorrespondenceMap::kNone});
}

}  // TEST_SUITE

TEST_SUITE("geodesic") {

TEST_CASE("grid distances follow axis edges exactly") {
  const auto mesh = synth::grid(5, 5, 5.0, 5.0);
  const auto field = geodesic_distances(mesh, 0);
  CHECK(field.distances[0] == 0.0);
  CHECK(field.distances[3] == 3.0);
}

TEST_CASE("antipodal icosphere distance stays within the metrication bound") {
  const auto mesh = synth::icosphere(4);
  const auto& v = mesh.vertices();
  Index antipode = 0;
  (v.rowwise() + v.row(0)).rowwise().squaredNorm().minCoeff(&antipode);
  const Scalar d = geodesic_distances(mesh, 0).distances[antipode];
  CHECK(d >= 0.95 * std::numbers::pi);
  CHECK(d <= 1.10 * std::numbers::pi);
}

TEST_CASE("distances satisfy the edge triangle inequality") {
  const auto mesh = synth::articulated(3, synth::biped_limbs()).mesh;
  const auto d = geodesic_distances(mesh, 17).distances;
  const auto& g = mesh.edge_graph();
  for (Index u = 0; u < mesh.num_vertices(); ++u) {
    for (Index k = g.offsets[u]; k < g.offsets[u + 1]; ++k) {
      const Index w = g.neighbors[static_cast<std::size_t>(k)];
      CHECK(d[w] <= d[u] + g.lengths[static_cast<std::size_t>(k)] * (1 + 1e-9));
    }
  }
}

TEST_CASE("distances do not depend on face order") {
  const auto mesh = synth::icosphere(3);
  FaceMatrix f = mesh.faces();
  std::vector<Index> order(static_cast<std::size_t>(f.rows()));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), std::mt19937_64(5));
  FaceMatrix permuted(f.rows(), 3);
  for (Index i = 0; i < f.rows(); ++i) permuted.row(i) = f.row(order[static_cast<std::size_t>(i)]);
  const TriangleMesh other(mesh.vertices(), permuted);
  CHECK(geodesic_distances(other, 11).distances == geodesic_distances(mesh, 11).distances);
}

TEST_CASE("geodesic balls hold exactly the vertices under the radius") {
  const auto mesh = synth::icosphere(3);
  const Index sources[] = {4, 100};
  const auto all = geodesic_distances(mesh, sources);
  const auto ball = geodesic_ball(mesh, sources, 0.4);
  std::vector<Index> expected;
  for (Index v = 0; v < mesh.num_vertices(); ++v) {
    if (all[v] < 0.4) expected.push_back(v);
  }
  CHECK(ball.vertices == expected);
  for (std::size_t i = 0; i < ball.vertices.size(); ++i) CHECK(ball.distances[i] == all[ball.vertices[i]]);
}

TEST_CASE("intrinsic diameter of the unit sphere") {
  const auto mesh = synth::icosphere(4);
  CHECK(intrinsic_diameter(mesh, 50) == doctest::Approx(std::numbers::pi).epsilon(0.10));
}

TEST_CASE("intrinsic diameter on small meshes") {
  // From vertex 0 every tetrahedron vertex is one unit edge away; the tie goes to vertex 1.
  CHECK(intrinsic_diameter(testing::tetrahedron(), 2) == doctest::Approx(1.0));

  const auto mesh = synth::icosphere(1);
  Scalar exact = 0;
  for (Index s = 0; s < mesh.num_vertices(); ++s) exact = std::max(exact, geodesic_distances(mesh, s).distances.maxCoeff());
  CHECK(intrinsic_diameter(mesh, mesh.num_vertices()) == exact);

  Scalar previous = 0;
  for (Index s = 2; s <= mesh.num_vertices(); s += 5) {
    const Scalar d = intrinsic_diameter(mesh, s);
    CHECK(d >= previous);
    previous = d;
  }
}

TEST_CASE("farthest point sampling") {
  const auto mesh = synth::icosphere(1);
  CHECK(farthest_point_sample(mesh, 1) == std::vector<Index>{0});

  auto all = farthest_point_sample(mesh, mesh.num_vertices());
  std::sort(all.begin(), all.end());
  std::vector<Index> iota(static_cast<std::size_t>(mesh.num_vertices()));
  std::iota(iota.begin(), iota.end(), 0);
  CHECK(all == iota);

  CHECK(farthest_point_sample(mesh, 9) == farthest_point_sample(mesh, 9));
}

TEST_CASE("four farthest points on the sphere are well spread") {
  const auto fine = synth::icosphere(4);
  const auto picked = farthest_point_sample(fine, 4);
  for (std::size_t i = 0; i < picked.size(); ++i) {
    const auto d = geodesic_distances(fine, picked[i]).distances;
    for (std::size_t j = i + 1; j < picked.size(); ++j) CHECK(d[picked[j]] >= 1.5);
  }

  // Greedy sampling is a 2-approximation of the best 4-subset separation.
  const auto mesh = synth::icosphere(1);
  const Index n = mesh.num_vertices();
  Matrix dist(n, n);
  for (Index s = 0; s < n; ++s) dist.col(s) = geodesic_distances(mesh, s).distances;
  auto separation = [&](const std::vector<Index>& set) {
    Scalar best = std::numeric_limits<Scalar>::infinity();
    for (std::size_t i = 0; i < set.size(); ++i)
      for (std::size_t j = i + 1; j < set.size(); ++j) best = std::min(best, dist(set[i], set[j]));
    return best;
  };
  Scalar optimum = 0;
  for (Index a = 0; a < n; ++a)
    for (Index b = a + 1; b < n; ++b)
      for (Index c = b + 1; c < n; ++c)
        for (Index d = c + 1; d < n; ++d) optimum = std::max(optimum, separation({a, b, c, d}));
  CHECK(2 * separation(farthest_point_sample(mesh, 4)) >= optimum);
}

TEST_CASE("descriptor-space sampling uses Euclidean row distances") {
  Matrix field(4, 1);
  field << 0, 1, 10, 4;
  CHECK(farthest_point_sample(field, 3) == std::vector<Index>{0, 2, 3});
}

}  // TEST_SUITE

TEST_SUITE("synth") {

TEST_CASE("strength zero returns the null mesh byte for byte") {
  const auto shape = synth::articulated(3, synth::biped_limbs());
  const Scalar diameter = intrinsic_diameter(shape.mesh, 32);
  for (auto kind : {synth::Deformation::Identity, synth::Deformation::Rigid, synth::Deformation::Bend,
                    synth::Deformation::Jitter, synth::Deformation::Holes, synth::Deformation::Decimate}) {
    const auto d = synth::deform(shape.mesh, kind, 0, 9, diameter, &shape);
    CHECK(to_off(d.mesh) == to_off(shape.mesh));
    CHECK(d.from_null.target == CorrespondenceMap::identity(shape.mesh.num_vertices()).target);
  }
}

TEST_CASE("five strengths per transformation") { CHECK(synth::kStrengths == 5); }

TEST_CASE("jitter displacement matches its nominal standard deviation") {
  const auto mesh = synth::icosphere(5);
  const Scalar diameter = 3.0;
  for (int k = 1; k <= synth::kStrengths; ++k) {
    const auto d = synth::deform(mesh, synth::Deformation::Jitter, k, 100 + static_cast<std::uint64_t>(k), diameter);
    const Matrix disp = d.mesh.vertices() - mesh.vertices();
    const Scalar measured = std::sqrt(disp.squaredNorm() / static_cast<Scalar>(disp.size()));
    const Scalar nominal = 0.001 * k * diameter;
    // 30k samples: the sample std lies within 2% of the true value with overwhelming probability.
    CHECK(measured == doctest::Approx(nominal).epsilon(0.02));
  }
}

TEST_CASE("deformations carry valid vertex maps") {
  const auto shape = synth::articulated(3, synth::quadruped_limbs());
  const Scalar diameter = intrinsic_diameter(shape.mesh, 32);
  for (auto kind : {synth::Deformation::Rigid, synth::Deformation::Bend, synth::Deformation::Holes,
                    synth::Deformation::Decimate}) {
    for (int k = 1; k <= synth::kStrengths; ++k) {
      const auto d = synth::deform(shape.mesh, kind, k, 40 + static_cast<std::uint64_t>(k), diameter, &shape);
      CHECK_NOTHROW(d.from_null.validate(shape.mesh.num_vertices(), d.mesh.num_vertices()));
      // Every vertex of the deformed shape is the image of some null vertex.
      std::vector<bool> hit(static_cast<std::size_t>(d.mesh.num_vertices()), false);
      for (auto t : d.from_null.target) {
        if (t != CorrespondenceMap::kNone) hit[static_cast<std::size_t>(t)] = true;
      }
      CHECK(std::all_of(hit.begin(), hit.end(), [](bool b) { return b; }));
    }
  }
}

TEST_CASE("rigid and bend keep vertex identity; decimation removes vertices") {
  const auto shape = synth::articulated(3, synth::biped_limbs());
  const Scalar diameter = intrinsic_diameter(shape.mesh, 32);
  const auto rigid = synth::deform(shape.mesh, synth::Deformation::Rigid, 3, 1, diameter, &shape);
  CHECK(rigid.mesh.num_vertices() == shape.mesh.num_vertices());
  CHECK(rigid.mesh.area() == doctest::Approx(shape.mesh.area()).epsilon(1e-10));
  const auto bend = synth::deform(shape.mesh, synth::Deformation::Bend, 5, 1, diameter, &shape);
  CHECK(bend.mesh.faces() == shape.mesh.faces());
  const auto dec = synth::deform(shape.mesh, synth::Deformation::Decimate, 5, 1, diameter, &shape);
  CHECK(dec.mesh.num_vertices() < shape.mesh.num_vertices() * 0.7);
  const auto holes = synth::deform(shape.mesh, synth::Deformation::Holes, 5, 1, diameter, &shape);
  CHECK(holes.mesh.has_boundary());
}

TEST_CASE("mirror symmetry of the articulated layouts") {
  for (const auto& limbs : {synth::biped_limbs(), synth::quadruped_limbs()}) {
    const auto shape = synth::articulated(3, limbs);
    REQUIRE(shape.symmetry.has_value());
    const auto& sym = *shape.symmetry;
    for (Index i = 0; i < sym.size(); ++i) {
      REQUIRE(sym[i] != CorrespondenceMap::kNone);
      CHECK(sym[sym[i]] == i);
      const Vector3 p = shape.mesh.vertices().row(i).transpose();
      const Vector3 q = shape.mesh.vertices().row(sym[i]).transpose();
      CHECK((Vector3(-p.x(), p.y(), p.z()) - q).norm() < 1e-9);
    }
  }
}

TEST_CASE("generators are deterministic") {
  const auto shape = synth::articulated(3, synth::biped_limbs());
  const auto a = synth::deform(shape.mesh, synth::Deformation::Decimate, 3, 77, 5.0, &shape);
  const auto b = synth::deform(shape.mesh, synth::Deformation::Decimate, 3, 77, 5.0, &shape);
  CHECK(to_off(a.mesh) == to_off(b.mesh));
  CHECK(a.from_null.target == b.from_null.target);
}

}  // TEST_SUITE
