#include "support.hpp"

#include "specdesc/io.hpp"
#include "specdesc/spectrum.hpp"
#include "specdesc/synth.hpp"

#include <cmath>
#include <numbers>

using namespace specdesc;

namespace {

Matrix dense(const SparseMatrix& s) { return Matrix(s); }

// Sum of triangle areas computed straight from the coordinates.
Scalar triangle_area_sum(const TriangleMesh& mesh) {
  Scalar total = 0;
  for (Index f = 0; f < mesh.num_faces(); ++f) {
    const Vector3 a = mesh.vertices().row(mesh.faces()(f, 0)).transpose();
    const Vector3 b = mesh.vertices().row(mesh.faces()(f, 1)).transpose();
    const Vector3 c = mesh.vertices().row(mesh.faces()(f, 2)).transpose();
    total += 0.5 * (b - a).cross(c - a).norm();
  }
  return total;
}

}  // namespace

TEST_SUITE("laplacian") {

TEST_CASE("single right triangle stiffness by hand") {
  VertexMatrix v(3, 3);
  v << 0, 0, 0, 1, 0, 0, 0, 1, 0;
  FaceMatrix f(1, 3);
  f << 0, 1, 2;
  const auto op = assemble_fem(TriangleMesh(v, f));
  Matrix expected(3, 3);
  // Angle 90 degrees at vertex 0 and 45 at the others: -cot(opposite)/2 off the diagonal.
  expected << 1.0, -0.5, -0.5, -0.5, 0.5, 0.0, -0.5, 0.0, 0.5;
  CHECK((dense(op.stiffness) - expected).cwiseAbs().maxCoeff() < 1e-15);
  const Matrix m = dense(op.mass);
  CHECK(m.isDiagonal());
  CHECK(m.diagonal().isApproxToConstant(1.0 / 6.0, 1e-15));
}

TEST_CASE("stiffness is symmetric with constants in its kernel") {
  const auto mesh = synth::deform(synth::icosphere(3), synth::Deformation::Jitter, 3, 8, 3.0).mesh;
  const auto op = assemble_fem(mesh);
  const Matrix s = dense(op.stiffness);
  CHECK((s - s.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * s.cwiseAbs().maxCoeff());
  const Vector ones = Vector::Ones(mesh.num_vertices());
  CHECK((s * ones).cwiseAbs().maxCoeff() <= 1e-9 * s.diagonal().maxCoeff());
  CHECK(std::abs(ones.dot(s * ones)) <= 1e-9 * s.diagonal().sum());
}

TEST_CASE("lumped mass totals the surface area") {
  const auto mesh = synth::icosphere(4);
  const auto op = assemble_fem(mesh, MassMode::Lumped);
  const Matrix m = dense(op.mass);
  CHECK(m.isDiagonal());
  CHECK(m.diagonal().minCoeff() > 0);
  CHECK(m.trace() == doctest::Approx(triangle_area_sum(mesh)).epsilon(1e-9));
  CHECK(m.trace() == doctest::Approx(4 * std::numbers::pi).epsilon(0.01));
}

TEST_CASE("consistent mass matches the element formula") {
  VertexMatrix v(3, 3);
  v << 0, 0, 0, 2, 0, 0, 0, 1, 0;
  FaceMatrix f(1, 3);
  f << 0, 1, 2;
  const Matrix m = dense(assemble_fem(TriangleMesh(v, f), MassMode::Consistent).mass);
  CHECK(m(0, 0) == doctest::Approx(1.0 / 6.0));
  CHECK(m(0, 1) == doctest::Approx(1.0 / 12.0));
  CHECK(m.sum() == doctest::Approx(1.0));
}

TEST_CASE("sphere spectrum clusters at l(l+1)") {
  const auto op = assemble_fem(synth::icosphere(4));
  const auto spectrum = compute_spectrum(op, 16);
  REQUIRE(spectrum.size() >= 16);
  CHECK(std::abs(spectrum.eigenvalues[0]) <= 1e-8 * spectrum.eigenvalues[1] + 1e-12);
  int k = 1;
  for (int l = 1; l <= 3; ++l) {
    for (int j = 0; j < 2 * l + 1; ++j, ++k) {
      CHECK(spectrum.eigenvalues[k] == doctest::Approx(l * (l + 1)).epsilon(0.03));
    }
  }
}

TEST_CASE("Neumann unit square") {
  const auto op = assemble_fem(synth::grid(40, 40));
  const auto spectrum = compute_spectrum(op, 4);
  const Scalar pi2 = std::numbers::pi * std::numbers::pi;
  CHECK(std::abs(spectrum.eigenvalues[0]) < 1e-8);
  CHECK(spectrum.eigenvalues[1] == doctest::Approx(pi2).epsilon(0.03));
  CHECK(spectrum.eigenvalues[2] == doctest::Approx(pi2).epsilon(0.03));
  CHECK(spectrum.eigenvalues[3] == doctest::Approx(2 * pi2).epsilon(0.03));
}

TEST_CASE("first eigenfunction is constant") {
  const auto op = assemble_fem(synth::articulated(3, synth::biped_limbs()).mesh);
  const auto spectrum = compute_spectrum(op, 1);
  const Vector phi = spectrum.eigenvectors.col(0).cwiseAbs();
  const Scalar mean = phi.mean();
  const Scalar cv = std::sqrt((phi.array() - mean).square().mean()) / mean;
  CHECK(cv < 1e-4);
}

TEST_CASE("eigenpairs are mass-orthonormal with small residuals") {
  for (auto mode : {MassMode::Lumped, MassMode::Consistent}) {
    const auto mesh = synth::deform(synth::articulated(3, synth::quadruped_limbs()).mesh, synth::Deformation::Holes, 3, 2, 4.0).mesh;
    const auto op = assemble_fem(mesh, mode);
    const auto spectrum = compute_spectrum(op, 60);
    const Matrix gram = spectrum.eigenvectors.transpose() * op.mass * spectrum.eigenvectors;
    CHECK((gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(max_relative_residual(op, spectrum) <= 1e-6);
    for (Index k = 1; k < spectrum.size(); ++k) CHECK(spectrum.eigenvalues[k] >= spectrum.eigenvalues[k - 1]);
  }
}

TEST_CASE("Lanczos agrees with the dense solver") {
  const auto op = assemble_fem(synth::icosphere(3));
  SpectrumOptions sparse;
  sparse.count = 40;
  sparse.dense_below = 0;
  SpectrumOptions full = sparse;
  full.dense_below = 1 << 30;
  const auto a = compute_spectrum(op, sparse);
  const auto b = compute_spectrum(op, full);
  REQUIRE(a.size() == b.size());
  for (Index k = 1; k < a.size(); ++k) CHECK(a.eigenvalues[k] == doctest::Approx(b.eigenvalues[k]).epsilon(1e-9));
}

TEST_CASE("shape DNA") {
  const auto op = assemble_fem(synth::icosphere(4));
  const auto spectrum = compute_spectrum(op, 10);
  const auto dna = shape_dna(spectrum, 4);
  REQUIRE(dna.size() == 4);
  CHECK(std::abs(dna[0]) < 1e-8);
  for (int k = 1; k < 4; ++k) CHECK(dna[k] == doctest::Approx(2.0).epsilon(0.03));
  CHECK(shape_dna(spectrum, 0).size() == 0);
}

TEST_CASE("rigid motion leaves the spectrum unchanged") {
  const auto mesh = synth::articulated(3, synth::biped_limbs()).mesh;
  const auto moved = transformed(mesh, testing::random_rotation(21), Vector3(3, -1, 2));
  const auto a = compute_spectrum(assemble_fem(mesh), 30);
  const auto b = compute_spectrum(assemble_fem(moved), 30);
  for (Index k = 1; k < 30; ++k) CHECK(std::abs(a.eigenvalues[k] - b.eigenvalues[k]) <= 1e-9 * a.eigenvalues[k]);
  CHECK(testing::max_relative(shape_dna(a, 12), shape_dna(b, 12)) <= 1e-9);
}

TEST_CASE("scaling by c divides eigenvalues by c squared") {
  const auto mesh = synth::articulated(3, synth::quadruped_limbs()).mesh;
  const Scalar c = 2.5;
  const auto a = compute_spectrum(assemble_fem(mesh), 30);
  const auto b = compute_spectrum(assemble_fem(scaled(mesh, c)), 30);
  for (Index k = 1; k < 30; ++k) CHECK(std::abs(b.eigenvalues[k] * c * c - a.eigenvalues[k]) <= 1e-9 * a.eigenvalues[k]);
  // phi^2 times vertex mass is scale free.
  const Vector wa = a.eigenvectors.col(7).array().square() * a.vertex_mass.array();
  const Vector wb = b.eigenvectors.col(7).array().square() * b.vertex_mass.array();
  CHECK(wa.sum() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(wb.sum() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("Weyl growth on the sphere") {
  const auto mesh = synth::icosphere(4);
  const auto spectrum = compute_spectrum(assemble_fem(mesh), 100);
  const Scalar nu100 = spectrum.eigenvalues[99];
  const Scalar predicted = mesh.area() * nu100 / (4 * std::numbers::pi);
  CHECK(100.0 / predicted == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("spectrum cache round trip and corruption") {
  testing::ScratchDir dir("cache");
  const auto mesh = synth::icosphere(2);
  const auto bytes = to_off(mesh);
  const auto spectrum = compute_spectrum(assemble_fem(mesh), 12);
  const auto hash = spectrum_cache_hash(bytes, 12, MassMode::Lumped);
  CHECK(hash != spectrum_cache_hash(bytes, 13, MassMode::Lumped));
  CHECK(hash != spectrum_cache_hash(bytes, 12, MassMode::Consistent));
  CHECK(hash != spectrum_cache_hash(bytes + " ", 12, MassMode::Lumped));

  save_spectrum(spectrum, hash, dir / "a.spec");
  const auto back = load_spectrum(dir / "a.spec");
  CHECK(back.content_hash == hash);
  CHECK(back.spectrum.eigenvalues == spectrum.eigenvalues);
  CHECK(back.spectrum.eigenvectors == spectrum.eigenvectors);
  CHECK(back.spectrum.mass_mode == MassMode::Lumped);

  auto data = io::read_file(dir / "a.spec");
  data[data.size() / 2] ^= 0x20;
  io::write_file_atomic(dir / "b.spec", data);
  CHECK_THROWS_AS(load_spectrum(dir / "b.spec"), DataError);
  io::write_file_atomic(dir / "c.spec", data.substr(0, 100));
  CHECK_THROWS_AS(load_spectrum(dir / "c.spec"), DataError);
  CHECK_THROWS_AS(load_spectrum(dir / "missing.spec"), DataError);
}

TEST_CASE("mass mode names") {
  CHECK(mass_mode_from_string("lumped") == MassMode::Lumped);
  CHECK(mass_mode_from_string("consistent") == MassMode::Consistent);
  CHECK_THROWS_AS(mass_mode_from_string("diagonal"), UsageError);
}

}  // TEST_SUITE
