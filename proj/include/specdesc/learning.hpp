#pragma once

#include "specdesc/descriptors.hpp"
#include "specdesc/geodesic.hpp"

#include <span>

namespace specdesc {

enum class PairTag : std::uint8_t { Localization = 0, Invariance = 1, Discriminativity = 2 };

std::string to_string(PairTag tag);

/// Where a geometry vector came from.
struct VectorOrigin {
  std::int32_t shape = 0;
  std::int32_t vertex = 0;

  friend bool operator==(const VectorOrigin&, const VectorOrigin&) = default;
  friend auto operator<=>(const VectorOrigin&, const VectorOrigin&) = default;
};

/// A (g, g+, g-) triple, stored as column indices into the pool.
struct PairTriplet {
  Index reference = 0;
  Index positive = 0;
  Index negative = 0;
  PairTag positive_tag = PairTag::Localization;
  PairTag negative_tag = PairTag::Localization;
};

/// Triplets over a pool of distinct geometry vectors. Each pool column is a
/// geometry vector; `origins` records its shape and vertex.
struct PairSet {
  Matrix pool;  // m x U
  std::vector<VectorOrigin> origins;
  std::vector<PairTriplet> triplets;
  std::vector<std::string> shape_names;
  Warnings warnings;

  Index dimension() const { return pool.rows(); }
  Index size() const { return static_cast<Index>(triplets.size()); }
  /// Triplets whose positive or negative carries `tag`.
  Index count(PairTag tag) const;
  Index count_positive(PairTag tag) const;
  Index count_negative(PairTag tag) const;
};

/// One shape offered to the pair sampler.
struct PairShape {
  std::string name;
  const TriangleMesh* mesh = nullptr;
  const Matrix* geometry = nullptr;  // m x V
  Scalar diameter = 0;
  std::string class_label;
  /// Intrinsic symmetry x -> sym(x) on this shape.
  const CorrespondenceMap* symmetry = nullptr;
  /// Index of the null shape this one was derived from, with the map from the
  /// null shape onto it. A null shape and its derived shapes form one group;
  /// invariance positives come from the other members of the group.
  Index null_shape = -1;
  const CorrespondenceMap* from_null = nullptr;
  /// Only a source of cross-class negatives; never holds reference points.
  bool negatives_only = false;
};

struct PairOptions {
  Scalar r_frac = 0.02;
  Scalar R_frac = 0.05;
  Index refs_per_shape = 100;
  Index positives_per_ref = 10;
  Index negatives_per_ref = 200;
  /// Share of negatives drawn from shapes of another class.
  Scalar discriminative_fraction = 0.5;
  std::uint64_t seed = 1;
};

/// Samples localization, invariance and discriminativity triplets. Each
/// reference point draws from its own random stream, so the result depends
/// only on the inputs and the seed.
PairSet build_pairs(std::span<const PairShape> shapes, const PairOptions& options);

struct CovarianceStats {
  Matrix c_pos;  // E(e+ e+^T)
  Matrix c_neg;  // E(e- e-^T)
  Matrix c;      // E(g g^T), ridge included
  Index samples_pos = 0;
  Index samples_neg = 0;
  Index samples = 0;
  Scalar ridge = 0;
};

/// Raw second moments over the pair set. C is taken over every vector that
/// enters a triplet, with multiplicity.
CovarianceStats estimate_covariances(const PairSet& pairs, Scalar ridge = 1e-6);

struct LearnedModel {
  ResponseModel model;
  Scalar alpha = 0;
  Vector eigenvalues;  // retained whitened eigenvalues, ascending, all negative
  Index requested_dimension = 0;

  Index achieved_dimension() const { return model.dimension(); }
};

/// Closed-form minimiser of tr(A D_alpha A^T) subject to A C A^T = I.
LearnedModel solve_response(const CovarianceStats& stats, Scalar alpha, Index n, const FrequencyBasis& basis);

Scalar response_objective(const Matrix& a, const CovarianceStats& stats, Scalar alpha);

/// Descriptor distances ||A(g - g+)|| and ||A(g - g-)|| for every triplet.
struct PairDistances {
  std::vector<Scalar> positive;
  std::vector<Scalar> negative;
};
PairDistances pair_distances(const PairSet& pairs, const Matrix& a);
/// Same, for fixed descriptors looked up by pool origin; `fields[shape]` holds
/// one row per vertex.
PairDistances pair_distances(const PairSet& pairs, std::span<const Matrix* const> fields);

enum class SweepMode { Sensitivity, Specificity };
std::string to_string(SweepMode mode);
SweepMode sweep_mode_from_string(std::string_view name);

struct SweepRow {
  Scalar alpha = 0;
  Scalar fn_at_fp = 0;  // false negative rate at the fixed false positive rate
  Scalar fp_at_fn = 0;  // false positive rate at the fixed false negative rate
  Index achieved_n = 0;
  std::string error;    // nonempty when training failed at this alpha
};

struct SweepResult {
  std::vector<SweepRow> rows;
  Scalar best_sensitivity = 0;  // argmin FN@FP
  Scalar best_specificity = 0;  // argmin FP@FN
  Scalar best(SweepMode mode) const { return mode == SweepMode::Sensitivity ? best_sensitivity : best_specificity; }
};

SweepResult sweep_alpha(const CovarianceStats& stats, std::span<const Scalar> alphas, Index n,
                        const FrequencyBasis& basis, const PairSet& eval_pairs, Scalar work_point);

std::string sweep_to_csv(const SweepResult& sweep);

void save_pairs(const PairSet& pairs, const std::filesystem::path& path);
PairSet load_pairs(const std::filesystem::path& path);

}  // namespace specdesc
