#include "specdesc/eval.hpp"

#include "specdesc/geodesic.hpp"

#include <algorithm>
#include <cmath>

namespace specdesc {

RocCurve roc(std::span<const Scalar> positive_distances, std::span<const Scalar> negative_distances) {
  if (positive_distances.empty() || negative_distances.empty()) {
    throw UsageError("ROC needs at least one positive and one negative distance");
  }
  std::vector<std::pair<Scalar, bool>> all;
  all.reserve(positive_distances.size() + negative_distances.size());
  for (Scalar d : positive_distances) all.emplace_back(d, true);
  for (Scalar d : negative_distances) all.emplace_back(d, false);
  for (const auto& [d, pos] : all) {
    if (!std::isfinite(d)) throw DataError("ROC input contains a non-finite distance");
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  RocCurve curve;
  curve.positives = static_cast<Index>(positive_distances.size());
  curve.negatives = static_cast<Index>(negative_distances.size());
  const auto np = static_cast<Scalar>(curve.positives), nn = static_cast<Scalar>(curve.negatives);
  curve.fp.push_back(0);
  curve.tp.push_back(0);
  // Trapezoid area accumulated in integer counts so ties give exact halves.
  Index tp = 0, fp = 0;
  unsigned __int128 twice_area = 0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    const Index tp_before = tp, fp_before = fp;
    while (j < all.size() && all[j].first == all[i].first) {
      (all[j].second ? tp : fp) += 1;
      ++j;
    }
    twice_area += static_cast<unsigned __int128>(fp - fp_before) * static_cast<unsigned __int128>(tp + tp_before);
    curve.fp.push_back(static_cast<Scalar>(fp) / nn);
    curve.tp.push_back(static_cast<Scalar>(tp) / np);
    i = j;
  }
  curve.auc = static_cast<Scalar>(static_cast<long double>(twice_area) / (2.0L * np * nn));
  return curve;
}

Scalar rate_at(const RocCurve& curve, FixedRate fixed, Scalar rate) {
  if (!(rate > 0 && rate < 1)) throw UsageError("work point rate must lie in (0, 1)");
  const auto n = curve.fp.size();
  if (fixed == FixedRate::FalsePositive) {
    // Last segment starting at or before the rate; vertical steps resolve to their top.
    for (std::size_t i = n - 1; i-- > 0;) {
      const Scalar a = curve.fp[i], b = curve.fp[i + 1];
      if (a <= rate && rate < b) {
        const Scalar w = (rate - a) / (b - a);
        return curve.tp[i] + w * (curve.tp[i + 1] - curve.tp[i]);
      }
    }
    return curve.tp.back();
  }
  // True negative rate once the true positive rate first reaches 1 - rate.
  const Scalar target = 1 - rate;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const Scalar a = curve.tp[i], b = curve.tp[i + 1];
    if (a < target && target <= b) {
      const Scalar w = (target - a) / (b - a);
      return 1 - (curve.fp[i] + w * (curve.fp[i + 1] - curve.fp[i]));
    }
  }
  return 1 - curve.fp.front();
}

MatchGroundTruth match_ground_truth(const TriangleMesh& target, Scalar target_diameter,
                                    std::span<const Index> references, const CorrespondenceMap& map,
                                    Scalar radius_frac, const CorrespondenceMap* query_symmetry) {
  MatchGroundTruth truth;
  truth.accepted.resize(references.size());
  const Scalar radius = radius_frac * target_diameter;
  auto image_of = [&](Index x) -> std::int64_t {
    if (x < 0 || x >= map.size()) throw UsageError("reference vertex outside the correspondence map");
    return map[x];
  };
  for (std::size_t i = 0; i < references.size(); ++i) {
    const Index x = references[i];
    std::vector<Index> sources;
    if (const auto img = image_of(x); img != CorrespondenceMap::kNone) sources.push_back(img);
    if (query_symmetry != nullptr) {
      const auto sx = (*query_symmetry)[x];
      if (sx != CorrespondenceMap::kNone) {
        const auto img = image_of(sx);
        if (img != CorrespondenceMap::kNone && std::find(sources.begin(), sources.end(), img) == sources.end()) {
          sources.push_back(img);
        }
      }
    }
    if (sources.empty()) continue;
    // The ball always holds its own centres even when the radius is below one edge.
    auto ball = geodesic_ball(target, sources, std::max(radius, Scalar{1e-300}));
    truth.accepted[i] = std::move(ball.vertices);
  }
  return truth;
}

CmcCurve cmc(const Matrix& query_field, std::span<const Index> references, const Matrix& target_field,
             const MatchGroundTruth& truth, Index max_rank) {
  if (query_field.cols() != target_field.cols()) throw UsageError("CMC descriptor dimensions differ");
  if (max_rank < 1 || max_rank > target_field.rows()) throw UsageError("CMC rank must lie in [1, V]");
  if (truth.accepted.size() != references.size()) throw UsageError("ground truth does not match the references");
  CmcCurve curve;
  curve.hit_rate = Vector::Zero(max_rank);
  for (std::size_t i = 0; i < references.size(); ++i) {
    const auto& accepted = truth.accepted[i];
    if (accepted.empty()) continue;
    const Vector d = (target_field.rowwise() - query_field.row(references[i])).rowwise().squaredNorm();
    // Best accepted vertex under the (distance, index) order.
    Index best = accepted.front();
    for (Index v : accepted) {
      if (d[v] < d[best] || (d[v] == d[best] && v < best)) best = v;
    }
    Index rank = 1;
    for (Index v = 0; v < d.size(); ++v) {
      if (d[v] < d[best] || (d[v] == d[best] && v < best)) ++rank;
    }
    if (rank <= max_rank) curve.hit_rate.tail(max_rank - rank + 1).array() += 1;
    ++curve.references;
  }
  if (curve.references > 0) curve.hit_rate /= static_cast<Scalar>(curve.references);
  return curve;
}

std::vector<Vector> distance_maps(std::span<const Matrix* const> fields, const Vector& reference) {
  std::vector<Vector> maps;
  Scalar largest = 0;
  for (const Matrix* f : fields) {
    if (f->cols() != reference.size()) throw UsageError("distance map descriptor dimensions differ");
    maps.push_back((f->rowwise() - reference.transpose()).rowwise().norm());
    if (maps.back().size() > 0) largest = std::max(largest, maps.back().maxCoeff());
  }
  for (auto& m : maps) {
    if (largest > 0) {
      m /= largest;
    } else {
      m.setZero();
    }
  }
  return maps;
}

}  // namespace specdesc
