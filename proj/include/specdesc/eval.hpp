#pragma once

#include "specdesc/mesh.hpp"

#include <span>

namespace specdesc {

/// Threshold sweep of (false positive rate, true positive rate) from (0, 0)
/// to (1, 1). Equal distances enter as a single step.
struct RocCurve {
  std::vector<Scalar> fp;
  std::vector<Scalar> tp;
  Index positives = 0;
  Index negatives = 0;
  Scalar auc = 0;

  Index size() const { return static_cast<Index>(fp.size()); }
};

RocCurve roc(std::span<const Scalar> positive_distances, std::span<const Scalar> negative_distances);

enum class FixedRate { FalsePositive, FalseNegative };

/// FixedRate::FalsePositive: true positive rate at FP = rate.
/// FixedRate::FalseNegative: true negative rate at FN = rate.
/// Linear interpolation between sweep points.
Scalar rate_at(const RocCurve& curve, FixedRate fixed, Scalar rate);

/// Hit rate at ranks 1..K, averaged over reference points.
struct CmcCurve {
  Vector hit_rate;
  Index references = 0;
};

/// Target vertices accepted as correct matches for each reference point.
struct MatchGroundTruth {
  std::vector<std::vector<Index>> accepted;
};

/// For each reference x on the query shape: the target vertices within
/// radius_frac * diameter of map(x), plus those around map(sym(x)) when a
/// query symmetry is given. References without an image are left empty.
MatchGroundTruth match_ground_truth(const TriangleMesh& target, Scalar target_diameter,
                                    std::span<const Index> references, const CorrespondenceMap& map,
                                    Scalar radius_frac, const CorrespondenceMap* query_symmetry = nullptr);

/// Ranks every target vertex by descriptor distance to each reference
/// (ascending, ties by vertex index). References with empty ground truth are
/// not counted.
CmcCurve cmc(const Matrix& query_field, std::span<const Index> references, const Matrix& target_field,
             const MatchGroundTruth& truth, Index max_rank);

/// Euclidean distances from `reference` to every row of every field, divided
/// by the largest of them. All zeros when that maximum is zero.
std::vector<Vector> distance_maps(std::span<const Matrix* const> fields, const Vector& reference);

}  // namespace specdesc
