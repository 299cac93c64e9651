#pragma once

#include "specdesc/laplacian.hpp"

#include <filesystem>
#include <map>
#include <optional>

namespace specdesc {

enum class ShapeRole { Train, TrainNegative, Eval, EvalNegative };

std::string to_string(ShapeRole role);
ShapeRole shape_role_from_string(std::string_view name);

/// One [shape:NAME] section of the manifest.
struct ShapeEntry {
  std::string name;
  std::filesystem::path path;
  std::string class_label;
  ShapeRole role = ShapeRole::Train;
  /// Name of the shape this one was derived from, with the vertex map from it.
  std::string null_shape;
  std::filesystem::path correspondence;
  std::filesystem::path symmetry;

  friend bool operator==(const ShapeEntry&, const ShapeEntry&) = default;
};

struct PipelineConfig {
  // [pipeline]
  std::filesystem::path work_dir = "work";
  std::filesystem::path spectrum_cache;  // empty: <work_dir>/cache
  std::uint64_t seed = 1;

  // [synth]
  int synth_subdivisions = 4;

  // [spectrum]
  Index spectrum_count = 300;
  MassMode mass_mode = MassMode::Lumped;

  // [basis]
  Index basis_size = 150;
  Scalar nu_max_percentile = 95;

  // [descriptor]
  Index dimension = 12;
  std::vector<Scalar> hks_times;     // empty: log-spaced default
  std::vector<Scalar> wks_energies;  // empty: log-spaced default
  Scalar wks_sigma = 0;              // 0: derived from wks_sigma_factor
  Scalar wks_sigma_factor = 7;
  std::string descriptor_format = "csv";

  // [learning]
  Scalar r_frac = 0.02;
  Scalar R_frac = 0.05;
  Index refs_per_shape = 60;
  Index positives_per_ref = 10;
  Index negatives_per_ref = 400;
  Scalar discriminative_fraction = 0.5;
  Scalar ridge = 1e-6;
  std::optional<Scalar> alpha_sensitivity;  // empty: chosen by the sweep
  std::optional<Scalar> alpha_specificity;
  std::vector<Scalar> alpha_grid = {0.005, 0.01, 0.02, 0.03, 0.05, 0.07, 0.09, 0.12, 0.16, 0.2, 0.3, 0.5};

  // [eval]
  Scalar work_point = 0.01;
  Scalar ball_radius_frac = 0.01;
  Scalar cmc_rank_frac = 0.01;
  Index cmc_references = 100;
  Index eval_refs_per_shape = 50;
  Index eval_negatives_per_ref = 100;
  Index diameter_samples = 64;
  std::string cmc_query;
  std::string cmc_target;

  std::vector<ShapeEntry> shapes;

  std::filesystem::path cache_dir() const { return spectrum_cache.empty() ? work_dir / "cache" : spectrum_cache; }
  const ShapeEntry& shape(std::string_view name) const;

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

/// Flat sections of key = value lines. Relative shape paths resolve against
/// `base_dir`.
PipelineConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {},
                            const std::map<std::string, std::string>& overrides = {});
PipelineConfig load_config(const std::filesystem::path& path,
                           const std::map<std::string, std::string>& overrides = {});
std::string serialize_config(const PipelineConfig& config);

/// Every known key as "section.key"; used to resolve bare --key overrides.
std::vector<std::string> config_keys();

}  // namespace specdesc
