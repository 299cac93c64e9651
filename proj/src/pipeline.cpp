#include "specdesc/pipeline.hpp"

#include "specdesc/geodesic.hpp"
#include "specdesc/io.hpp"
#include "specdesc/random.hpp"
#include "specdesc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace specdesc {

namespace {

bool is_training(ShapeRole role) { return role == ShapeRole::Train || role == ShapeRole::TrainNegative; }
bool is_eval(ShapeRole role) { return role == ShapeRole::Eval || role == ShapeRole::EvalNegative; }

TriangleMesh parse_mesh_bytes(const std::string& bytes, const std::filesystem::path& path) {
  try {
    return format_from_extension(path) == MeshFormat::Obj ? parse_obj(bytes) : parse_off(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), -1);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what(), e.element());
  }
}

// Builds the sampler view over the shapes whose role passes `use`, and maps
// origins back to pipeline indices afterwards.
PairSet sample_pairs(const std::vector<ShapeData>& shapes, bool (*use)(ShapeRole), ShapeRole negatives_role,
                     const PairOptions& options) {
  std::vector<PairShape> view;
  std::vector<Index> global, local(shapes.size(), -1);
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    if (!use(shapes[i].entry.role)) continue;
    local[i] = static_cast<Index>(view.size());
    global.push_back(static_cast<Index>(i));
    const auto& s = shapes[i];
    PairShape p;
    p.name = s.entry.name;
    p.mesh = &*s.mesh;
    p.geometry = &s.geometry;
    p.diameter = s.diameter;
    p.class_label = s.entry.class_label;
    p.symmetry = s.symmetry ? &*s.symmetry : nullptr;
    p.negatives_only = s.entry.role == negatives_role;
    view.push_back(p);
  }
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    if (local[i] < 0) continue;
    const auto& s = shapes[i];
    if (s.null_index >= 0 && local[static_cast<std::size_t>(s.null_index)] >= 0 && s.from_null) {
      auto& p = view[static_cast<std::size_t>(local[i])];
      p.null_shape = local[static_cast<std::size_t>(s.null_index)];
      p.from_null = &*s.from_null;
    }
  }
  if (view.empty()) throw UsageError("the manifest has no shapes for this stage");
  PairSet pairs = build_pairs(view, options);
  for (auto& o : pairs.origins) o.shape = static_cast<std::int32_t>(global[static_cast<std::size_t>(o.shape)]);
  pairs.shape_names.clear();
  for (const auto& s : shapes) pairs.shape_names.push_back(s.entry.name);
  return pairs;
}

std::string fixed6(Scalar v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::filesystem::path descriptor_file(const std::filesystem::path& dir, const std::string& shape,
                                      const std::string& preferred_ext) {
  for (const auto& ext : {preferred_ext, std::string(preferred_ext == "csv" ? "bin" : "csv")}) {
    auto p = dir / (shape + "." + ext);
    if (std::filesystem::exists(p)) return p;
  }
  throw DataError("missing descriptor file " + (dir / (shape + "." + preferred_ext)).string());
}

}  // namespace

Scalar percentile(std::vector<Scalar> values, Scalar p) {
  if (values.empty()) throw UsageError("percentile of an empty set");
  std::sort(values.begin(), values.end());
  const Scalar pos = std::clamp(p, Scalar{0}, Scalar{100}) / 100 * static_cast<Scalar>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<Scalar>(lo)) * (values[hi] - values[lo]);
}

Pipeline::Pipeline(PipelineConfig config, std::ostream* log) : config_(std::move(config)), log_(log) {}

void Pipeline::log(const std::string& line) const {
  if (log_ != nullptr) *log_ << line << '\n' << std::flush;
}

Index Pipeline::shape_index(std::string_view name) const {
  for (std::size_t i = 0; i < shapes_.size(); ++i) {
    if (shapes_[i].entry.name == name) return static_cast<Index>(i);
  }
  throw UsageError("no shape named '" + std::string(name) + "'");
}

void Pipeline::load_shapes() {
  if (loaded_) return;
  shapes_.clear();
  for (const auto& e : config_.shapes) {
    ShapeData s;
    s.entry = e;
    s.mesh_bytes = io::read_file(e.path);
    s.mesh = parse_mesh_bytes(s.mesh_bytes, e.path);
    shapes_.push_back(std::move(s));
  }
  for (auto& s : shapes_) {
    const Index nv = s.mesh->num_vertices();
    if (!s.entry.null_shape.empty()) {
      s.null_index = shape_index(s.entry.null_shape);
      s.from_null = load_correspondence(s.entry.correspondence);
      s.from_null->validate(shapes_[static_cast<std::size_t>(s.null_index)].mesh->num_vertices(), nv);
    }
    if (!s.entry.symmetry.empty()) {
      s.symmetry = load_correspondence(s.entry.symmetry);
      s.symmetry->validate(nv, nv);
    }
  }
  loaded_ = true;
  log("loaded " + std::to_string(shapes_.size()) + " shapes");
}

Spectrum Pipeline::spectrum_for(const ShapeData& shape, Index count) {
  const Index nv = shape.mesh->num_vertices();
  count = std::min(count, nv);
  const auto hash = spectrum_cache_hash(shape.mesh_bytes, count, config_.mass_mode);
  const auto file = config_.cache_dir() / (io::hex64(hash) + ".spec");
  if (std::filesystem::exists(file)) {
    try {
      auto cached = load_spectrum(file);
      if (cached.content_hash == hash && cached.spectrum.num_vertices() == nv) {
        log("spectrum " + shape.entry.name + ": cache hit " + file.filename().string());
        return std::move(cached.spectrum);
      }
      log("warning: spectrum cache " + file.string() + " does not match its inputs; recomputing");
    } catch (const DataError& e) {
      log(std::string("warning: ") + e.what() + "; recomputing");
    }
  }
  const auto op = assemble_fem(*shape.mesh, config_.mass_mode);
  for (const auto& w : op.warnings) log("warning: " + shape.entry.name + ": " + w);
  Spectrum spectrum = compute_spectrum(op, count);
  for (const auto& w : spectrum.warnings) log("warning: " + shape.entry.name + ": " + w);
  save_spectrum(spectrum, hash, file);
  log("spectrum " + shape.entry.name + ": computed " + std::to_string(spectrum.size()) + " pairs");
  return spectrum;
}

void Pipeline::compute_spectra() {
  if (spectra_ready_) return;
  load_shapes();
  for (auto& s : shapes_) s.spectrum = spectrum_for(s, config_.spectrum_count);
  spectra_ready_ = true;
}

void Pipeline::prepare() {
  if (prepared_) return;
  compute_spectra();
  std::vector<Scalar> top, second;
  for (const auto& s : shapes_) {
    if (!is_training(s.entry.role)) continue;
    const Index k = std::min(config_.spectrum_count, s.spectrum.size()) - 1;
    top.push_back(s.spectrum.eigenvalues[k]);
    if (s.spectrum.size() > 1) second.push_back(s.spectrum.eigenvalues[1]);
  }
  if (top.empty()) throw UsageError("the manifest has no training shapes to fix nu_max");
  const Scalar nu_max = percentile(top, config_.nu_max_percentile);
  basis_ = FrequencyBasis(nu_max, config_.basis_size);
  reference_nu2_ = percentile(second, 50);
  log("basis: nu_max = " + io::format_double(nu_max) + " (" + io::format_double(config_.nu_max_percentile) +
      "th percentile), m = " + std::to_string(config_.basis_size));

  for (auto& s : shapes_) {
    Index count = s.spectrum.size();
    while (s.spectrum.largest() < nu_max && s.spectrum.size() < s.mesh->num_vertices()) {
      // Weyl growth is linear in the index, so one rescaled request usually suffices.
      const Scalar ratio = std::max<Scalar>(nu_max / s.spectrum.largest(), 1.05);
      count = std::min(s.mesh->num_vertices(), static_cast<Index>(std::ceil(1.02 * ratio * static_cast<Scalar>(count))) + 1);
      log("spectrum " + s.entry.name + ": nu_s below nu_max, extending to " + std::to_string(count));
      s.spectrum = spectrum_for(s, count);
    }
    s.diameter = intrinsic_diameter(*s.mesh, config_.diameter_samples);
    s.geometry = geometry_vectors(s.spectrum, basis_);
  }
  prepared_ = true;
}

Vector Pipeline::hks_times() const {
  if (!config_.hks_times.empty()) return Eigen::Map<const Vector>(config_.hks_times.data(), static_cast<Index>(config_.hks_times.size()));
  return default_hks_times(reference_nu2_, basis_.nu_max(), config_.dimension);
}

WksParameters Pipeline::wks_parameters() const {
  WksParameters p = default_wks_parameters(reference_nu2_, basis_.nu_max(), config_.dimension, config_.wks_sigma_factor);
  if (!config_.wks_energies.empty()) {
    p.energies = Eigen::Map<const Vector>(config_.wks_energies.data(), static_cast<Index>(config_.wks_energies.size()));
  }
  if (config_.wks_sigma > 0) p.sigma = config_.wks_sigma;
  return p;
}

DescriptorField Pipeline::describe(Index shape, DescriptorFamily family, const ResponseModel* model) const {
  const auto& s = shapes_.at(static_cast<std::size_t>(shape));
  switch (family) {
    case DescriptorFamily::Hks: return hks(s.spectrum, hks_times());
    case DescriptorFamily::Wks: {
      const auto p = wks_parameters();
      return wks(s.spectrum, p.energies, p.sigma);
    }
    case DescriptorFamily::ShapeDna: return shape_dna_field(s.spectrum, std::min(config_.dimension, s.spectrum.size()));
    case DescriptorFamily::Geometry: return {s.geometry.transpose(), DescriptorFamily::Geometry, {}};
    case DescriptorFamily::Learned:
      if (model == nullptr) throw UsageError("the learned family needs a response model");
      return apply_response(s.geometry, *model);
  }
  throw UsageError("unknown descriptor family");
}

PairSet Pipeline::training_pairs() const {
  PairOptions o;
  o.r_frac = config_.r_frac;
  o.R_frac = config_.R_frac;
  o.refs_per_shape = config_.refs_per_shape;
  o.positives_per_ref = config_.positives_per_ref;
  o.negatives_per_ref = config_.negatives_per_ref;
  o.discriminative_fraction = config_.discriminative_fraction;
  o.seed = config_.seed;
  return sample_pairs(shapes_, is_training, ShapeRole::TrainNegative, o);
}

PairSet Pipeline::eval_pairs(std::uint64_t stream) const {
  PairOptions o;
  // Positives for evaluation lie within the ground-truth ball radius.
  o.r_frac = config_.ball_radius_frac;
  o.R_frac = config_.R_frac;
  o.refs_per_shape = config_.eval_refs_per_shape;
  o.positives_per_ref = config_.positives_per_ref;
  o.negatives_per_ref = config_.eval_negatives_per_ref;
  o.discriminative_fraction = config_.discriminative_fraction;
  o.seed = splitmix64(config_.seed ^ splitmix64(stream + 0x0e7a1ULL));
  return sample_pairs(shapes_, is_eval, ShapeRole::EvalNegative, o);
}

TrainResult Pipeline::train() const {
  TrainResult out;
  const PairSet pairs = training_pairs();
  out.triplets = pairs.size();
  out.tag_counts = {pairs.count_positive(PairTag::Localization), pairs.count_positive(PairTag::Invariance),
                    pairs.count_negative(PairTag::Localization), pairs.count_negative(PairTag::Discriminativity)};
  out.warnings = pairs.warnings;
  log("training pairs: " + std::to_string(pairs.size()) + " triplets over " + std::to_string(pairs.pool.cols()) +
      " distinct vectors");
  out.stats = estimate_covariances(pairs, config_.ridge);

  Scalar alpha_sens = config_.alpha_sensitivity.value_or(0);
  Scalar alpha_spec = config_.alpha_specificity.value_or(0);
  if (!config_.alpha_sensitivity || !config_.alpha_specificity) {
    const PairSet validation = eval_pairs(2);
    log("alpha sweep over " + std::to_string(config_.alpha_grid.size()) + " values on " +
        std::to_string(validation.size()) + " validation triplets");
    out.sweep = sweep_alpha(out.stats, config_.alpha_grid, config_.dimension, basis_, validation, config_.work_point);
    if (!config_.alpha_sensitivity) alpha_sens = out.sweep->best_sensitivity;
    if (!config_.alpha_specificity) alpha_spec = out.sweep->best_specificity;
  }
  out.sensitivity = solve_response(out.stats, alpha_sens, config_.dimension, basis_);
  out.sensitivity.model.diagnostics->mode = "sensitivity";
  out.specificity = solve_response(out.stats, alpha_spec, config_.dimension, basis_);
  out.specificity.model.diagnostics->mode = "specificity";
  log("alpha: sensitivity " + io::format_double(alpha_sens) + ", specificity " + io::format_double(alpha_spec));
  return out;
}

EvalResult Pipeline::evaluate(const std::vector<NamedFields>& families) const {
  EvalResult out;
  const PairSet pairs = eval_pairs(1);
  out.triplets = pairs.size();
  log("evaluation pairs: " + std::to_string(pairs.size()) + " triplets");

  // Correspondence experiment on one isometric pair.
  std::vector<Index> refs;
  Index query = -1, target = -1;
  MatchGroundTruth truth;
  Index max_rank = 0;
  if (!config_.cmc_query.empty() && !config_.cmc_target.empty()) {
    query = shape_index(config_.cmc_query);
    target = shape_index(config_.cmc_target);
    const auto& t = shapes_[static_cast<std::size_t>(target)];
    if (t.null_index != query || !t.from_null) {
      throw UsageError("CMC target '" + config_.cmc_target + "' must be derived from the query '" +
                       config_.cmc_query + "'");
    }
    const auto& q = shapes_[static_cast<std::size_t>(query)];
    refs = farthest_point_sample(*q.mesh, std::min(config_.cmc_references, q.mesh->num_vertices()));
    truth = match_ground_truth(*t.mesh, t.diameter, refs, *t.from_null, config_.ball_radius_frac,
                               q.symmetry ? &*q.symmetry : nullptr);
    max_rank = std::clamp<Index>(static_cast<Index>(std::ceil(config_.cmc_rank_frac * static_cast<Scalar>(t.mesh->num_vertices()))),
                                 1, t.mesh->num_vertices());
  }

  ReportTable table{"work_points",
                    {"descriptor", "tp_at_fp", "tn_at_fn", "auc", "cmc_rank1", "positives", "negatives"},
                    {}};
  for (const auto& family : families) {
    if (family.fields.size() != shapes_.size()) throw UsageError("descriptor family '" + family.label + "' is incomplete");
    std::vector<const Matrix*> pointers;
    for (std::size_t i = 0; i < shapes_.size(); ++i) {
      const Matrix& f = family.fields[i];
      const bool needed = is_eval(shapes_[i].entry.role);
      if (needed && f.rows() != shapes_[i].mesh->num_vertices()) {
        throw DataError("descriptor family '" + family.label + "' has no valid field for shape '" +
                        shapes_[i].entry.name + "'");
      }
      pointers.push_back(needed ? &f : nullptr);
    }
    FamilyMetrics m;
    m.label = family.label;
    const auto d = pair_distances(pairs, pointers);
    m.roc = roc(d.positive, d.negative);
    m.tp_at_fp = rate_at(m.roc, FixedRate::FalsePositive, config_.work_point);
    m.tn_at_fn = rate_at(m.roc, FixedRate::FalseNegative, config_.work_point);
    out.report.rocs.push_back({family.label, m.roc});
    if (query >= 0) {
      const Matrix& qf = family.fields[static_cast<std::size_t>(query)];
      const Matrix& tf = family.fields[static_cast<std::size_t>(target)];
      m.cmc = cmc(qf, refs, tf, truth, max_rank);
      out.report.cmcs.push_back({family.label, *m.cmc});
      const Index ref = refs[std::min<std::size_t>(1, refs.size() - 1)];
      const Matrix* both[] = {&qf, &tf};
      const auto maps = distance_maps(both, qf.row(ref).transpose());
      out.report.maps.push_back({family.label + ":" + config_.cmc_query + ":ref" + std::to_string(ref),
                                 &*shapes_[static_cast<std::size_t>(query)].mesh, maps[0]});
      out.report.maps.push_back({family.label + ":" + config_.cmc_target + ":ref" + std::to_string(ref),
                                 &*shapes_[static_cast<std::size_t>(target)].mesh, maps[1]});
    }
    table.rows.push_back({m.label, fixed6(m.tp_at_fp), fixed6(m.tn_at_fn), fixed6(m.roc.auc),
                          m.cmc ? fixed6(m.cmc->hit_rate[0]) : std::string("nan"), std::to_string(m.roc.positives),
                          std::to_string(m.roc.negatives)});
    log("eval " + m.label + ": TP@FP=" + fixed6(m.tp_at_fp) + " TN@FN=" + fixed6(m.tn_at_fn) + " AUC=" +
        fixed6(m.roc.auc) + (m.cmc ? " CMC@1=" + fixed6(m.cmc->hit_rate[0]) : std::string()));
    out.families.push_back(std::move(m));
  }
  out.report.tables.push_back(std::move(table));
  return out;
}

std::vector<std::filesystem::path> cmd_synth(const PipelineConfig& config, const std::filesystem::path& out_dir,
                                             std::ostream* log) {
  auto say = [&](const std::string& line) {
    if (log != nullptr) *log << line << '\n';
  };
  std::vector<std::filesystem::path> written;
  PipelineConfig corpus = config;
  corpus.shapes.clear();
  const int subdiv = config.synth_subdivisions;
  auto seed_for = [&](const std::string& name) { return splitmix64(config.seed ^ io::fnv1a64(name)); };

  auto add = [&](const std::string& name, const TriangleMesh& mesh, const std::string& cls, ShapeRole role,
                 const std::string& null_name, const CorrespondenceMap* from_null, const std::string& symmetry) {
    ShapeEntry e;
    e.name = name;
    e.path = std::filesystem::path("meshes") / (name + ".off");
    e.class_label = cls;
    e.role = role;
    e.null_shape = null_name;
    save_mesh(mesh, out_dir / e.path);
    written.push_back(out_dir / e.path);
    if (from_null != nullptr) {
      e.correspondence = std::filesystem::path("maps") / (name + ".corr");
      save_correspondence(*from_null, out_dir / e.correspondence);
      written.push_back(out_dir / e.correspondence);
    }
    if (!symmetry.empty()) e.symmetry = std::filesystem::path("maps") / (symmetry + ".sym");
    corpus.shapes.push_back(e);
    say("synth " + name + ": V = " + std::to_string(mesh.num_vertices()));
  };

  auto articulated_class = [&](const std::string& cls, const std::vector<synth::Limb>& limbs, ShapeRole role,
                               std::initializer_list<synth::Deformation> kinds) {
    const auto shape = synth::articulated(subdiv, limbs);
    const std::string null_name = cls + "_null";
    if (shape.symmetry) {
      save_correspondence(*shape.symmetry, out_dir / "maps" / (null_name + ".sym"));
      written.push_back(out_dir / "maps" / (null_name + ".sym"));
    }
    const std::string sym = shape.symmetry ? null_name : "";
    add(null_name, shape.mesh, cls, role, "", nullptr, sym);
    const Scalar diameter = intrinsic_diameter(shape.mesh, config.diameter_samples);
    for (auto kind : kinds) {
      for (int k = 1; k <= synth::kStrengths; ++k) {
        const std::string name = cls + "_" + synth::to_string(kind) + "_" + std::to_string(k);
        const auto d = synth::deform(shape.mesh, kind, k, seed_for(name), diameter, &shape);
        // Symmetry carries over when the vertex set is untouched.
        const bool same_vertices = kind != synth::Deformation::Holes && kind != synth::Deformation::Decimate;
        add(name, d.mesh, cls, role, null_name, &d.from_null, same_vertices ? sym : "");
      }
    }
    return shape.mesh.area();
  };

  // Negatives are scaled to the area of their stage's articulated null so that
  // all spectra of a stage cover a similar frequency range.
  auto area_matched = [](const TriangleMesh& mesh, Scalar area) { return scaled(mesh, std::sqrt(area / mesh.area())); };
  using synth::Deformation;
  // Training sees rigid motion, bending and noise; evaluation adds holes and decimation.
  const Scalar biped_area = articulated_class("biped", synth::biped_limbs(), ShapeRole::Train,
                                              {Deformation::Rigid, Deformation::Bend, Deformation::Jitter});
  add("capsule", area_matched(synth::capsule(subdiv), biped_area), "capsule", ShapeRole::TrainNegative, "", nullptr, "");
  add("annulus", area_matched(synth::annulus(16, 150), biped_area), "annulus", ShapeRole::TrainNegative, "", nullptr, "");
  add("ring", area_matched(synth::torus(80, 32, 1.2, 0.25), biped_area), "ring", ShapeRole::TrainNegative, "", nullptr, "");
  const Scalar quadruped_area =
      articulated_class("quadruped", synth::quadruped_limbs(), ShapeRole::Eval,
                        {Deformation::Rigid, Deformation::Bend, Deformation::Jitter, Deformation::Holes, Deformation::Decimate});
  add("torus", area_matched(synth::torus(64, 40), quadruped_area), "torus", ShapeRole::EvalNegative, "", nullptr, "");

  corpus.cmc_query = "quadruped_null";
  corpus.cmc_target = "quadruped_bend_3";
  const auto manifest = out_dir / "corpus.ini";
  io::write_file_atomic(manifest, serialize_config(corpus));
  written.push_back(manifest);
  return written;
}

void cmd_spectrum(const PipelineConfig& config, std::ostream* log) {
  Pipeline p(config, log);
  p.prepare();
}

std::vector<std::filesystem::path> cmd_describe(const PipelineConfig& config, DescriptorFamily family,
                                                const std::filesystem::path& model_path,
                                                const std::filesystem::path& out_dir, std::ostream* log) {
  std::optional<ResponseModel> model;
  if (family == DescriptorFamily::Learned) {
    if (model_path.empty()) throw UsageError("describe learned needs --model");
    model = load_response_model(model_path);
  }
  Pipeline p(config, log);
  p.prepare();
  if (model && std::abs(model->basis.nu_max() - p.basis().nu_max()) > 1e-12 * p.basis().nu_max()) {
    throw DataError("model basis cutoff " + io::format_double(model->basis.nu_max()) +
                    " differs from this corpus (" + io::format_double(p.basis().nu_max()) + ")");
  }
  std::vector<std::filesystem::path> written;
  for (Index i = 0; i < static_cast<Index>(p.shapes().size()); ++i) {
    const auto field = p.describe(i, family, model ? &*model : nullptr);
    for (const auto& w : field.warnings) {
      if (log != nullptr) *log << "warning: " << p.shapes()[static_cast<std::size_t>(i)].entry.name << ": " << w << '\n';
    }
    const auto path = out_dir / (p.shapes()[static_cast<std::size_t>(i)].entry.name + "." + config.descriptor_format);
    if (config.descriptor_format == "csv") {
      save_descriptors_csv(field, path);
    } else {
      save_descriptors_binary(field, path);
    }
    written.push_back(path);
  }
  return written;
}

std::vector<std::filesystem::path> cmd_train(const PipelineConfig& config, const std::filesystem::path& out_dir,
                                             std::ostream* log) {
  Pipeline p(config, log);
  p.prepare();
  const auto result = p.train();
  std::vector<std::filesystem::path> written;
  const auto sens = out_dir / "sensitivity.json", spec = out_dir / "specificity.json";
  save_response_model(result.sensitivity.model, sens);
  save_response_model(result.specificity.model, spec);
  written.push_back(sens);
  written.push_back(spec);
  if (result.sweep) {
    io::write_file_atomic(out_dir / "sweep.csv", sweep_to_csv(*result.sweep));
    written.push_back(out_dir / "sweep.csv");
  }
  std::string report;
  report += "triplets," + std::to_string(result.triplets) + "\n";
  report += "positives_localization," + std::to_string(result.tag_counts[0]) + "\n";
  report += "positives_invariance," + std::to_string(result.tag_counts[1]) + "\n";
  report += "negatives_localization," + std::to_string(result.tag_counts[2]) + "\n";
  report += "negatives_discriminativity," + std::to_string(result.tag_counts[3]) + "\n";
  report += "covariance_samples," + std::to_string(result.stats.samples) + "\n";
  report += "covariance_source,all triplet vectors with multiplicity\n";
  report += "ridge," + io::format_double(result.stats.ridge) + "\n";
  report += "nu_max," + io::format_double(p.basis().nu_max()) + "\n";
  for (const auto* m : {&result.sensitivity, &result.specificity}) {
    const std::string mode = m->model.diagnostics->mode;
    report += mode + "_alpha," + io::format_double(m->alpha) + "\n";
    report += mode + "_achieved_n," + std::to_string(m->achieved_dimension()) + "\n";
  }
  io::write_file_atomic(out_dir / "train_report.txt", report);
  written.push_back(out_dir / "train_report.txt");
  return written;
}

std::filesystem::path cmd_sweep_alpha(const PipelineConfig& config, const std::filesystem::path& out_path,
                                      std::ostream* log) {
  Pipeline p(config, log);
  p.prepare();
  const PairSet pairs = p.training_pairs();
  const auto stats = estimate_covariances(pairs, config.ridge);
  const auto sweep = sweep_alpha(stats, config.alpha_grid, config.dimension, p.basis(), p.eval_pairs(2), config.work_point);
  io::write_file_atomic(out_path, sweep_to_csv(sweep));
  if (log != nullptr) {
    *log << "best alpha: sensitivity " << io::format_double(sweep.best_sensitivity) << ", specificity "
         << io::format_double(sweep.best_specificity) << '\n';
  }
  return out_path;
}

std::vector<std::filesystem::path> cmd_eval(const PipelineConfig& config,
                                            const std::vector<std::filesystem::path>& descriptor_dirs,
                                            const std::filesystem::path& out_dir, std::ostream* log) {
  if (descriptor_dirs.empty()) throw UsageError("eval needs at least one descriptor directory");
  Pipeline p(config, log);
  p.prepare();
  std::vector<NamedFields> families;
  for (const auto& dir : descriptor_dirs) {
    NamedFields f;
    f.label = dir.filename().empty() ? dir.parent_path().filename().string() : dir.filename().string();
    for (const auto& s : p.shapes()) {
      if (s.entry.role == ShapeRole::Eval || s.entry.role == ShapeRole::EvalNegative) {
        f.fields.push_back(load_descriptors(descriptor_file(dir, s.entry.name, config.descriptor_format)).values);
      } else {
        f.fields.emplace_back();
      }
    }
    families.push_back(std::move(f));
  }
  const auto result = p.evaluate(families);
  std::vector<std::filesystem::path> written;
  for (const auto& name : emit_report(result.report, out_dir)) written.push_back(out_dir / name);
  written.push_back(out_dir / "manifest.txt");
  return written;
}

std::filesystem::path cmd_match(const PipelineConfig& config, const std::string& query, const std::string& target,
                                const std::filesystem::path& descriptor_dir, const std::filesystem::path& out_path,
                                std::ostream* log) {
  (void)log;
  config.shape(query);
  config.shape(target);
  const Matrix q = load_descriptors(descriptor_file(descriptor_dir, query, config.descriptor_format)).values;
  const Matrix t = load_descriptors(descriptor_file(descriptor_dir, target, config.descriptor_format)).values;
  if (q.cols() != t.cols()) throw DataError("descriptor dimensions differ between the two shapes");
  std::string csv = "vertex,match,distance\n";
  for (Index v = 0; v < q.rows(); ++v) {
    Index best = 0;
    (t.rowwise() - q.row(v)).rowwise().squaredNorm().minCoeff(&best);
    csv += std::to_string(v) + "," + std::to_string(best) + "," + io::format_double((t.row(best) - q.row(v)).norm()) + "\n";
  }
  io::write_file_atomic(out_path, csv);
  return out_path;
}

}  // namespace specdesc
