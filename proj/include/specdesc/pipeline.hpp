#pragma once

#include "specdesc/config.hpp"
#include "specdesc/learning.hpp"
#include "specdesc/report.hpp"

#include <iosfwd>

namespace specdesc {

/// A manifest shape with everything derived from it so far.
struct ShapeData {
  ShapeEntry entry;
  std::optional<TriangleMesh> mesh;
  std::string mesh_bytes;
  std::optional<CorrespondenceMap> from_null;
  std::optional<CorrespondenceMap> symmetry;
  Index null_index = -1;
  Spectrum spectrum;
  Scalar diameter = 0;
  Matrix geometry;  // m x V
};

/// A descriptor family evaluated on every shape (empty matrices where absent).
struct NamedFields {
  std::string label;
  std::vector<Matrix> fields;
};

struct TrainResult {
  LearnedModel sensitivity;
  LearnedModel specificity;
  std::optional<SweepResult> sweep;
  CovarianceStats stats;
  Index triplets = 0;
  /// Positives: localization, invariance. Negatives: localization, discriminativity.
  std::array<Index, 4> tag_counts{};
  Warnings warnings;
};

struct FamilyMetrics {
  std::string label;
  RocCurve roc;
  Scalar tp_at_fp = 0;
  Scalar tn_at_fn = 0;
  std::optional<CmcCurve> cmc;
};

struct EvalResult {
  std::vector<FamilyMetrics> families;
  Index triplets = 0;
  Report report;
};

/// Loads the manifest, computes (or reads cached) spectra, the frequency basis
/// and geometry vectors, and runs training and evaluation on top of them.
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config, std::ostream* log = nullptr);

  const PipelineConfig& config() const { return config_; }
  std::vector<ShapeData>& shapes() { return shapes_; }
  const std::vector<ShapeData>& shapes() const { return shapes_; }
  Index shape_index(std::string_view name) const;

  void load_shapes();
  /// Spectra for every shape, reading and writing the cache directory.
  void compute_spectra();
  /// nu_max from the training spectra, spectrum extension where needed,
  /// diameters and geometry vectors. Runs the earlier stages if required.
  void prepare();

  const FrequencyBasis& basis() const { return basis_; }
  Vector hks_times() const;
  WksParameters wks_parameters() const;

  DescriptorField describe(Index shape, DescriptorFamily family, const ResponseModel* model = nullptr) const;

  PairSet training_pairs() const;
  /// Pairs over the eval and eval_negative shapes; `stream` separates the
  /// alpha-selection draw from the reported one.
  PairSet eval_pairs(std::uint64_t stream) const;

  TrainResult train() const;
  EvalResult evaluate(const std::vector<NamedFields>& families) const;

 private:
  void log(const std::string& line) const;
  Spectrum spectrum_for(const ShapeData& shape, Index count);

  PipelineConfig config_;
  std::ostream* log_;
  std::vector<ShapeData> shapes_;
  bool loaded_ = false;
  bool spectra_ready_ = false;
  bool prepared_ = false;
  FrequencyBasis basis_;
  Scalar reference_nu2_ = 0;
};

/// Linear-interpolation percentile of `values` (p in [0, 100]).
Scalar percentile(std::vector<Scalar> values, Scalar p);

// Subcommands. Each writes its outputs atomically and returns the paths written.

/// Writes the synthetic corpus (meshes, vertex maps, symmetry maps) and a
/// manifest corpus.ini under `out_dir`.
std::vector<std::filesystem::path> cmd_synth(const PipelineConfig& config, const std::filesystem::path& out_dir,
                                             std::ostream* log = nullptr);
void cmd_spectrum(const PipelineConfig& config, std::ostream* log = nullptr);
/// Descriptor files <out_dir>/<shape>.<csv|bin> for every shape.
std::vector<std::filesystem::path> cmd_describe(const PipelineConfig& config, DescriptorFamily family,
                                                const std::filesystem::path& model_path,
                                                const std::filesystem::path& out_dir, std::ostream* log = nullptr);
/// sensitivity.json, specificity.json, train_report.txt and, when alpha is
/// chosen automatically, sweep.csv.
std::vector<std::filesystem::path> cmd_train(const PipelineConfig& config, const std::filesystem::path& out_dir,
                                             std::ostream* log = nullptr);
std::filesystem::path cmd_sweep_alpha(const PipelineConfig& config, const std::filesystem::path& out_path,
                                      std::ostream* log = nullptr);
/// Each descriptor directory holds one file per eval shape; its name labels
/// the family in the report.
std::vector<std::filesystem::path> cmd_eval(const PipelineConfig& config,
                                            const std::vector<std::filesystem::path>& descriptor_dirs,
                                            const std::filesystem::path& out_dir, std::ostream* log = nullptr);
/// Nearest target vertex in descriptor space for every query vertex, as CSV.
std::filesystem::path cmd_match(const PipelineConfig& config, const std::string& query, const std::string& target,
                                const std::filesystem::path& descriptor_dir, const std::filesystem::path& out_path,
                                std::ostream* log = nullptr);

}  // namespace specdesc
