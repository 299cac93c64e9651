#include "support.hpp"

#include "specdesc/eval.hpp"
#include "specdesc/io.hpp"
#include "specdesc/report.hpp"
#include "specdesc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace specdesc;

namespace {

// Relabels the vertices of `mesh`: new index of old vertex v is perm[v].
TriangleMesh permuted(const TriangleMesh& mesh, const std::vector<Index>& perm) {
  VertexMatrix v(mesh.num_vertices(), 3);
  for (Index i = 0; i < mesh.num_vertices(); ++i) v.row(perm[static_cast<std::size_t>(i)]) = mesh.vertices().row(i);
  FaceMatrix f = mesh.faces();
  for (Index i = 0; i < f.size(); ++i) f.data()[i] = perm[static_cast<std::size_t>(f.data()[i])];
  return {v, f};
}

// log C(n, k) for the hypergeometric miss probability.
Scalar log_choose(Index n, Index k) {
  return std::lgamma(static_cast<Scalar>(n + 1)) - std::lgamma(static_cast<Scalar>(k + 1)) -
         std::lgamma(static_cast<Scalar>(n - k + 1));
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("ROC of separated and identical distances") {
  const std::vector<Scalar> pos{0.1, 0.2, 0.3}, neg{0.5, 0.6};
  const auto perfect = roc(pos, neg);
  CHECK(perfect.auc == 1.0);
  CHECK(rate_at(perfect, FixedRate::FalsePositive, 0.01) == 1.0);
  CHECK(rate_at(perfect, FixedRate::FalseNegative, 0.01) == 1.0);

  std::vector<Scalar> same(1000);
  std::iota(same.begin(), same.end(), 1.0);
  const auto chance = roc(same, same);
  CHECK(chance.auc == 0.5);
  CHECK(rate_at(chance, FixedRate::FalsePositive, 0.01) == doctest::Approx(0.01));
  CHECK(rate_at(chance, FixedRate::FalseNegative, 0.01) == doctest::Approx(0.01));

  const std::vector<Scalar> tied(7, 2.5);
  CHECK(roc(tied, tied).auc == 0.5);
}

TEST_CASE("four point ROC") {
  const std::vector<Scalar> pos{1, 3}, neg{2, 4};
  const auto curve = roc(pos, neg);
  CHECK(curve.auc == 0.75);
  CHECK(curve.positives == 2);
  CHECK(curve.negatives == 2);
  CHECK(curve.fp.front() == 0);
  CHECK(curve.tp.front() == 0);
  CHECK(curve.fp.back() == 1);
  CHECK(curve.tp.back() == 1);
  CHECK(rate_at(curve, FixedRate::FalsePositive, 0.5) == 1.0);
  CHECK(rate_at(curve, FixedRate::FalsePositive, 0.25) == 0.5);
  // FN = 0.25 needs TP = 0.75: halfway up the vertical step at FP = 0.5.
  CHECK(rate_at(curve, FixedRate::FalseNegative, 0.25) == 0.5);
  CHECK_THROWS_AS(rate_at(curve, FixedRate::FalsePositive, 0.0), UsageError);
  CHECK_THROWS_AS(roc(std::vector<Scalar>{}, neg), UsageError);
  CHECK_THROWS_AS(roc(std::vector<Scalar>{std::nan("")}, neg), DataError);
}

TEST_CASE("ROC properties on random distances") {
  std::mt19937_64 rng(4);
  std::normal_distribution<Scalar> n;
  std::vector<Scalar> pos(500), neg(800);
  for (auto& d : pos) d = std::abs(n(rng));
  for (auto& d : neg) d = std::abs(1.0 + n(rng));
  const auto curve = roc(pos, neg);
  for (Index i = 1; i < curve.size(); ++i) {
    CHECK(curve.fp[static_cast<std::size_t>(i)] >= curve.fp[static_cast<std::size_t>(i - 1)]);
    CHECK(curve.tp[static_cast<std::size_t>(i)] >= curve.tp[static_cast<std::size_t>(i - 1)]);
  }
  CHECK(curve.auc >= 0);
  CHECK(curve.auc <= 1);

  // Exhaustive pair counting.
  Scalar wins = 0;
  for (Scalar p : pos) {
    for (Scalar q : neg) wins += p < q ? 1.0 : p == q ? 0.5 : 0.0;
  }
  CHECK(curve.auc == doctest::Approx(wins / (pos.size() * neg.size())).epsilon(1e-12));

  // Strictly monotone transforms leave the curve alone.
  std::vector<Scalar> pos2 = pos, neg2 = neg;
  for (auto& d : pos2) d = std::exp(3 * d) + 1;
  for (auto& d : neg2) d = std::exp(3 * d) + 1;
  const auto moved = roc(pos2, neg2);
  CHECK(moved.fp == curve.fp);
  CHECK(moved.tp == curve.tp);

  CHECK(rate_at(curve, FixedRate::FalsePositive, 1 - 1e-9) == doctest::Approx(curve.tp.back()).epsilon(1e-6));
}

TEST_CASE("ground truth balls") {
  const auto mesh = synth::icosphere(3);
  const auto identity = CorrespondenceMap::identity(mesh.num_vertices());
  const auto mirror = synth::mirror_map(mesh);
  const std::vector<Index> refs{0, 5, 100};
  const auto plain = match_ground_truth(mesh, std::numbers::pi, refs, identity, 0.0);
  for (std::size_t i = 0; i < refs.size(); ++i) {
    REQUIRE(plain.accepted[i].size() == 1);
    CHECK(plain.accepted[i][0] == refs[i]);
  }
  const auto wide = match_ground_truth(mesh, std::numbers::pi, refs, identity, 0.1, &mirror);
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const auto& a = wide.accepted[i];
    CHECK(std::find(a.begin(), a.end(), refs[i]) != a.end());
    CHECK(std::find(a.begin(), a.end(), mirror[refs[i]]) != a.end());
    CHECK(a.size() > 2);
  }
  CorrespondenceMap holes = identity;
  holes.target[5] = CorrespondenceMap::kNone;
  CHECK(match_ground_truth(mesh, std::numbers::pi, refs, holes, 0.0).accepted[1].empty());
}

TEST_CASE("CMC self match with an injective descriptor") {
  const auto mesh = synth::icosphere(3);
  const Matrix field = mesh.vertices();
  std::vector<Index> refs(60);
  std::iota(refs.begin(), refs.end(), 0);
  const auto truth = match_ground_truth(mesh, std::numbers::pi, refs, CorrespondenceMap::identity(mesh.num_vertices()), 0.0);
  const auto curve = cmc(field, refs, field, truth, 10);
  CHECK(curve.references == 60);
  CHECK(curve.hit_rate[0] == 1.0);
  CHECK(curve.hit_rate.minCoeff() == 1.0);
}

TEST_CASE("CMC of a constant field sits at chance") {
  const auto mesh = synth::icosphere(3);
  const Index nv = mesh.num_vertices();
  const Matrix constant = Matrix::Ones(nv, 4);
  const Index k_max = 20;
  std::mt19937_64 rng(12);
  Vector observed = Vector::Zero(k_max), expected = Vector::Zero(k_max);
  Index total = 0;
  // Relabelling the target makes index tie-breaking a uniformly random order.
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<Index> perm(static_cast<std::size_t>(nv));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto target = permuted(mesh, perm);
    CorrespondenceMap map;
    map.target.assign(perm.begin(), perm.end());
    std::vector<Index> refs;
    for (int i = 0; i < 25; ++i) refs.push_back(static_cast<Index>(rng() % static_cast<std::uint64_t>(nv)));
    const auto truth = match_ground_truth(target, std::numbers::pi, refs, map, 0.08);
    const auto curve = cmc(constant, refs, constant, truth, k_max);
    observed += curve.hit_rate * static_cast<Scalar>(curve.references);
    for (const auto& accepted : truth.accepted) {
      const auto b = static_cast<Index>(accepted.size());
      for (Index k = 1; k <= k_max; ++k) expected[k - 1] += 1 - std::exp(log_choose(nv - b, k) - log_choose(nv, k));
    }
    total += curve.references;
  }
  observed /= static_cast<Scalar>(total);
  expected /= static_cast<Scalar>(total);
  for (Index k = 0; k < k_max; ++k) {
    const Scalar p = expected[k];
    const Scalar sd = std::sqrt(p * (1 - p) / static_cast<Scalar>(total));
    CHECK(std::abs(observed[k] - p) <= 4 * sd);
  }
}

TEST_CASE("CMC is a nondecreasing rate that reaches one") {
  const auto mesh = synth::icosphere(2);
  std::mt19937_64 rng(6);
  std::normal_distribution<Scalar> n;
  Matrix query(mesh.num_vertices(), 3), target(mesh.num_vertices(), 3);
  for (Index i = 0; i < query.size(); ++i) query.data()[i] = n(rng), target.data()[i] = n(rng);
  std::vector<Index> refs{1, 2, 3, 50, 80};
  const auto truth = match_ground_truth(mesh, std::numbers::pi, refs, CorrespondenceMap::identity(mesh.num_vertices()), 0.05);
  const auto curve = cmc(query, refs, target, truth, mesh.num_vertices());
  for (Index k = 1; k < curve.hit_rate.size(); ++k) CHECK(curve.hit_rate[k] >= curve.hit_rate[k - 1]);
  CHECK(curve.hit_rate.minCoeff() >= 0);
  CHECK(curve.hit_rate[mesh.num_vertices() - 1] == 1.0);
  CHECK_THROWS_AS(cmc(query, refs, target, truth, mesh.num_vertices() + 1), UsageError);
}

TEST_CASE("distance maps share one scale") {
  const Matrix a = (Matrix(3, 2) << 0, 0, 1, 0, 0, 2).finished();
  const Matrix b = (Matrix(2, 2) << 0, 4, 3, 0).finished();
  const Vector ref = a.row(0).transpose();
  const std::vector<const Matrix*> fields{&a, &b};
  const auto maps = distance_maps(fields, ref);
  REQUIRE(maps.size() == 2);
  CHECK(maps[0][0] == 0);
  CHECK(maps[0][2] == doctest::Approx(0.5));
  CHECK(maps[1][0] == 1.0);
  CHECK(maps[1][1] == doctest::Approx(0.75));
  const Matrix flat = Matrix::Constant(4, 2, 3.0);
  const std::vector<const Matrix*> one{&flat};
  CHECK(distance_maps(one, flat.row(0).transpose())[0].isZero());
}

TEST_CASE("report files") {
  testing::ScratchDir dir("report");
  CHECK(emit_report({}, dir / "empty").empty());
  CHECK(io::read_file(dir / "empty" / "manifest.txt").empty());

  const std::vector<Scalar> pos{1, 3, 3.5}, neg{2, 4};
  const auto mesh = synth::icosphere(1);
  Report report;
  report.rocs.push_back({"hks", roc(pos, neg)});
  CmcCurve c;
  c.hit_rate = Vector::LinSpaced(5, 0.2, 1.0);
  c.references = 10;
  report.cmcs.push_back({"hks", c});
  report.maps.push_back({"hks query", &mesh, Vector::LinSpaced(mesh.num_vertices(), 0, 1)});
  report.tables.push_back({"summary", {"descriptor", "auc"}, {{"hks", "0.75"}}});
  const auto files = emit_report(report, dir / "a");
  const std::vector<std::string> expected{"roc_000.csv", "roc_000.svg", "cmc_000.csv", "cmc_000.svg",
                                          "map_000.csv", "map_000.off", "table_000.csv"};
  CHECK(files == expected);
  for (const auto& f : files) CHECK(std::filesystem::exists(dir / "a" / f));
  const auto roc_csv = io::read_file(dir / "a" / "roc_000.csv");
  CHECK(std::count(roc_csv.begin(), roc_csv.end(), '\n') == report.rocs[0].curve.size() + 1);
  CHECK(io::read_file(dir / "a" / "table_000.csv") == "descriptor,auc\nhks,0.75\n");
  const auto manifest = io::read_file(dir / "a" / "manifest.txt");
  CHECK(std::count(manifest.begin(), manifest.end(), '\n') == 7);
  CHECK(load_mesh(dir / "a" / "map_000.off").num_vertices() == mesh.num_vertices());

  emit_report(report, dir / "b");
  for (const auto& f : files) CHECK(io::read_file(dir / "a" / f) == io::read_file(dir / "b" / f));
}

TEST_CASE("colour ramp") {
  const auto lo = colormap(0.0), hi = colormap(1.0), mid = colormap(0.5);
  CHECK(lo[2] > lo[0]);
  CHECK(hi[0] > hi[2]);
  CHECK(mid[0] == doctest::Approx(mid[2]));
  CHECK(colormap(-3.0) == lo);
  CHECK(colormap(std::nan("")) == lo);
}

}  // TEST_SUITE
