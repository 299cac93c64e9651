#pragma once

#include "specdesc/spectrum.hpp"

#include <functional>
#include <optional>

namespace specdesc {

/// Clamped uniform cubic B-spline basis on [0, nu_max] with m functions.
/// Past nu_max the last function fades to zero over one knot spacing so that
/// eigenvalues just above the cutoff still enter smoothly.
class FrequencyBasis {
 public:
  FrequencyBasis() = default;
  FrequencyBasis(Scalar nu_max, Index size);

  Scalar nu_max() const { return nu_max_; }
  Index size() const { return size_; }
  Scalar knot_spacing() const { return nu_max_ / static_cast<Scalar>(size_ - 3); }
  /// Every function vanishes past this frequency.
  Scalar support_end() const { return nu_max_ + knot_spacing(); }

  /// b(nu), an m-vector.
  Vector evaluate(Scalar nu) const;
  /// One row b(nu_k)^T per entry of `nu`.
  Matrix evaluate(const Vector& nu) const;

 private:
  Scalar nu_max_ = 1;
  Index size_ = 4;
};

enum class DescriptorFamily { Hks, Wks, ShapeDna, Learned, Geometry };

std::string to_string(DescriptorFamily family);
DescriptorFamily descriptor_family_from_string(std::string_view name);

/// Per-vertex descriptor vectors, one row per vertex.
struct DescriptorField {
  Matrix values;  // V x n
  DescriptorFamily family = DescriptorFamily::Learned;
  Warnings warnings;

  Index num_vertices() const { return values.rows(); }
  Index dimension() const { return values.cols(); }
};

DescriptorField hks(const Spectrum& spectrum, const Vector& times);

/// Log-normal energy bands; `energies` are in eigenvalue units and `sigma` is
/// the standard deviation in log-energy.
DescriptorField wks(const Spectrum& spectrum, const Vector& energies, Scalar sigma);

/// The first n eigenvalues repeated at every vertex.
DescriptorField shape_dna_field(const Spectrum& spectrum, Index n);

/// g_j(x) = sum_k b_j(nu_k) phi_k(x)^2, returned as an m x V matrix (one
/// column per vertex). Throws UsageError when the spectrum stops below nu_max.
Matrix geometry_vectors(const Spectrum& spectrum, const FrequencyBasis& basis);

/// Optional training record carried along with a response matrix.
struct ResponseDiagnostics {
  Scalar alpha = 0;
  std::string mode;
  Index requested_dimension = 0;
  Vector eigenvalues;
};

/// n frequency responses f(nu) = A b(nu) over a fixed basis.
struct ResponseModel {
  FrequencyBasis basis;
  Matrix a;  // n x m
  std::optional<ResponseDiagnostics> diagnostics;

  Index dimension() const { return a.rows(); }
  Vector response(Scalar nu) const { return a * basis.evaluate(nu); }
};

/// p(x) = A g(x) for every column of `g` (m x V).
DescriptorField apply_response(const Matrix& g, const ResponseModel& model);

Scalar descriptor_distance(const Eigen::Ref<const Vector>& p, const Eigen::Ref<const Vector>& q);

/// Least-squares coefficients of `f` in the basis, sampled densely on [0, nu_max].
Vector project_onto_basis(const FrequencyBasis& basis, const std::function<Scalar(Scalar)>& f,
                          Index samples = 4000);

/// Log-spaced times over [4 ln 10 / nu_max, 4 ln 10 / nu_2].
Vector default_hks_times(Scalar nu2, Scalar nu_max, Index n);

struct WksParameters {
  Vector energies;
  Scalar sigma = 0;
};

/// n log-spaced energies from nu_2 up to nu_max (with a 2% margin in the log
/// domain). Sigma is `sigma_factor` times the log spacing of a
/// `reference_bands` grid over the same range, so the band width does not
/// depend on how many bands are kept.
WksParameters default_wks_parameters(Scalar nu2, Scalar nu_max, Index n, Scalar sigma_factor = 7,
                                     Index reference_bands = 100);

// Descriptor files: CSV with a header row, or a binary container holding the
// family tag and a row-major V x n matrix.
void save_descriptors_csv(const DescriptorField& field, const std::filesystem::path& path);
void save_descriptors_binary(const DescriptorField& field, const std::filesystem::path& path);
DescriptorField load_descriptors(const std::filesystem::path& path);

std::string response_model_to_json(const ResponseModel& model);
ResponseModel response_model_from_json(std::string_view text);
void save_response_model(const ResponseModel& model, const std::filesystem::path& path);
ResponseModel load_response_model(const std::filesystem::path& path);

}  // namespace specdesc
