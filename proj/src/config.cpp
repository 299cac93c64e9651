#include "specdesc/config.hpp"

#include "specdesc/io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

namespace specdesc {

namespace pt = boost::property_tree;

namespace {

constexpr std::string_view kShapePrefix = "shape:";

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"pipeline", {"work_dir", "spectrum_cache", "seed"}},
      {"synth", {"subdivisions"}},
      {"spectrum", {"count", "mass"}},
      {"basis", {"m", "nu_max_percentile"}},
      {"descriptor", {"n", "hks_times", "wks_energies", "wks_sigma", "wks_sigma_factor", "format"}},
      {"learning",
       {"r_frac", "R_frac", "refs_per_shape", "positives_per_ref", "negatives_per_ref", "discriminative_fraction",
        "ridge", "alpha_sensitivity", "alpha_specificity", "alpha_grid"}},
      {"eval",
       {"work_point", "ball_radius_frac", "cmc_rank_frac", "cmc_references", "eval_refs_per_shape",
        "eval_negatives_per_ref", "diameter_samples", "cmc_query", "cmc_target"}},
  };
  return keys;
}

const std::set<std::string>& shape_keys() {
  static const std::set<std::string> keys = {"path", "class", "role", "null", "correspondence", "symmetry"};
  return keys;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

Scalar parse_scalar(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  Scalar value = 0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc{} || end != t.data() + t.size() || t.empty()) {
    throw UsageError("config key '" + key + "': '" + text + "' is not a number");
  }
  return value;
}

std::int64_t parse_integer(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::int64_t value = 0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc{} || end != t.data() + t.size() || t.empty()) {
    throw UsageError("config key '" + key + "': '" + text + "' is not an integer");
  }
  return value;
}

std::vector<Scalar> parse_list(const std::string& key, const std::string& text) {
  std::vector<Scalar> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!trim(item).empty()) out.push_back(parse_scalar(key, item));
  }
  return out;
}

std::string join(const std::vector<Scalar>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += io::format_double(values[i]);
  }
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
  if (value.empty()) return {};
  const std::filesystem::path p(value);
  if (base.empty() || p.is_absolute()) return p;
  return (base / p).lexically_normal();
}

void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

pt::ptree to_tree(const PipelineConfig& c) {
  pt::ptree t;
  auto put = [&](const std::string& section, const std::string& key, const std::string& value) {
    t.put(pt::ptree::path_type(section + "/" + key, '/'), value);
  };
  put("pipeline", "work_dir", c.work_dir.string());
  put("pipeline", "spectrum_cache", c.spectrum_cache.string());
  put("pipeline", "seed", std::to_string(c.seed));
  put("synth", "subdivisions", std::to_string(c.synth_subdivisions));
  put("spectrum", "count", std::to_string(c.spectrum_count));
  put("spectrum", "mass", to_string(c.mass_mode));
  put("basis", "m", std::to_string(c.basis_size));
  put("basis", "nu_max_percentile", io::format_double(c.nu_max_percentile));
  put("descriptor", "n", std::to_string(c.dimension));
  put("descriptor", "hks_times", join(c.hks_times));
  put("descriptor", "wks_energies", join(c.wks_energies));
  put("descriptor", "wks_sigma", io::format_double(c.wks_sigma));
  put("descriptor", "wks_sigma_factor", io::format_double(c.wks_sigma_factor));
  put("descriptor", "format", c.descriptor_format);
  put("learning", "r_frac", io::format_double(c.r_frac));
  put("learning", "R_frac", io::format_double(c.R_frac));
  put("learning", "refs_per_shape", std::to_string(c.refs_per_shape));
  put("learning", "positives_per_ref", std::to_string(c.positives_per_ref));
  put("learning", "negatives_per_ref", std::to_string(c.negatives_per_ref));
  put("learning", "discriminative_fraction", io::format_double(c.discriminative_fraction));
  put("learning", "ridge", io::format_double(c.ridge));
  put("learning", "alpha_sensitivity", c.alpha_sensitivity ? io::format_double(*c.alpha_sensitivity) : "auto");
  put("learning", "alpha_specificity", c.alpha_specificity ? io::format_double(*c.alpha_specificity) : "auto");
  put("learning", "alpha_grid", join(c.alpha_grid));
  put("eval", "work_point", io::format_double(c.work_point));
  put("eval", "ball_radius_frac", io::format_double(c.ball_radius_frac));
  put("eval", "cmc_rank_frac", io::format_double(c.cmc_rank_frac));
  put("eval", "cmc_references", std::to_string(c.cmc_references));
  put("eval", "eval_refs_per_shape", std::to_string(c.eval_refs_per_shape));
  put("eval", "eval_negatives_per_ref", std::to_string(c.eval_negatives_per_ref));
  put("eval", "diameter_samples", std::to_string(c.diameter_samples));
  put("eval", "cmc_query", c.cmc_query);
  put("eval", "cmc_target", c.cmc_target);
  for (const auto& s : c.shapes) {
    const std::string section = std::string(kShapePrefix) + s.name;
    put(section, "path", s.path.string());
    put(section, "class", s.class_label);
    put(section, "role", to_string(s.role));
    put(section, "null", s.null_shape);
    put(section, "correspondence", s.correspondence.string());
    put(section, "symmetry", s.symmetry.string());
  }
  return t;
}

}  // namespace

std::string to_string(ShapeRole role) {
  switch (role) {
    case ShapeRole::Train: return "train";
    case ShapeRole::TrainNegative: return "train_negative";
    case ShapeRole::Eval: return "eval";
    case ShapeRole::EvalNegative: return "eval_negative";
  }
  return "unknown";
}

ShapeRole shape_role_from_string(std::string_view name) {
  for (auto r : {ShapeRole::Train, ShapeRole::TrainNegative, ShapeRole::Eval, ShapeRole::EvalNegative}) {
    if (to_string(r) == name) return r;
  }
  throw UsageError("unknown shape role '" + std::string(name) + "'");
}

const ShapeEntry& PipelineConfig::shape(std::string_view name) const {
  for (const auto& s : shapes) {
    if (s.name == name) return s;
  }
  throw UsageError("no shape named '" + std::string(name) + "' in the manifest");
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& [section, keys] : known_keys()) {
    for (const auto& k : keys) out.push_back(section + "." + k);
  }
  return out;
}

PipelineConfig parse_config(std::string_view text, const std::filesystem::path& base_dir,
                            const std::map<std::string, std::string>& overrides) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError("config: " + e.message(), static_cast<std::int64_t>(e.line()));
  }

  // Overrides: "section.key" or a bare key that names exactly one known entry.
  for (const auto& [raw_key, value] : overrides) {
    std::string section, key;
    const auto dot = raw_key.find('.');
    if (dot != std::string::npos) {
      section = raw_key.substr(0, dot);
      key = raw_key.substr(dot + 1);
    } else {
      for (const auto& [s, keys] : known_keys()) {
        if (keys.count(raw_key)) {
          require(section.empty(), "override --" + raw_key + " is ambiguous; qualify it as --section." + raw_key);
          section = s;
        }
      }
      require(!section.empty(), "unknown option --" + raw_key);
      key = raw_key;
    }
    tree.put(pt::ptree::path_type(section + "/" + key, '/'), value);
  }

  PipelineConfig c;
  for (const auto& [section, body] : tree) {
    if (!body.data().empty()) throw UsageError("config: key '" + section + "' outside any section");
    const bool is_shape = section.rfind(kShapePrefix, 0) == 0;
    if (!is_shape && !known_keys().count(section)) throw UsageError("config: unknown section [" + section + "]");
    const auto& allowed = is_shape ? shape_keys() : known_keys().at(section);
    for (const auto& [key, node] : body) {
      if (!allowed.count(key)) throw UsageError("config: unknown key '" + key + "' in [" + section + "]");
    }
  }

  auto get = [&](const std::string& section, const std::string& key) -> std::optional<std::string> {
    auto v = tree.get_optional<std::string>(pt::ptree::path_type(section + "/" + key, '/'));
    if (!v) return std::nullopt;
    return trim(*v);
  };
  auto scalar = [&](const std::string& s, const std::string& k, Scalar& out) {
    if (auto v = get(s, k)) out = parse_scalar(s + "." + k, *v);
  };
  auto integer = [&](const std::string& s, const std::string& k, auto& out) {
    if (auto v = get(s, k)) out = static_cast<std::remove_reference_t<decltype(out)>>(parse_integer(s + "." + k, *v));
  };
  auto list = [&](const std::string& s, const std::string& k, std::vector<Scalar>& out) {
    if (auto v = get(s, k)) out = parse_list(s + "." + k, *v);
  };
  auto alpha = [&](const std::string& k, std::optional<Scalar>& out) {
    if (auto v = get("learning", k)) {
      if (*v == "auto" || v->empty()) {
        out.reset();
      } else {
        out = parse_scalar("learning." + k, *v);
      }
    }
  };

  if (auto v = get("pipeline", "work_dir")) c.work_dir = *v;
  if (auto v = get("pipeline", "spectrum_cache")) c.spectrum_cache = *v;
  if (auto v = get("pipeline", "seed")) c.seed = static_cast<std::uint64_t>(parse_integer("pipeline.seed", *v));
  integer("synth", "subdivisions", c.synth_subdivisions);
  integer("spectrum", "count", c.spectrum_count);
  if (auto v = get("spectrum", "mass")) c.mass_mode = mass_mode_from_string(*v);
  integer("basis", "m", c.basis_size);
  scalar("basis", "nu_max_percentile", c.nu_max_percentile);
  integer("descriptor", "n", c.dimension);
  list("descriptor", "hks_times", c.hks_times);
  list("descriptor", "wks_energies", c.wks_energies);
  scalar("descriptor", "wks_sigma", c.wks_sigma);
  scalar("descriptor", "wks_sigma_factor", c.wks_sigma_factor);
  if (auto v = get("descriptor", "format")) c.descriptor_format = *v;
  scalar("learning", "r_frac", c.r_frac);
  scalar("learning", "R_frac", c.R_frac);
  integer("learning", "refs_per_shape", c.refs_per_shape);
  integer("learning", "positives_per_ref", c.positives_per_ref);
  integer("learning", "negatives_per_ref", c.negatives_per_ref);
  scalar("learning", "discriminative_fraction", c.discriminative_fraction);
  scalar("learning", "ridge", c.ridge);
  alpha("alpha_sensitivity", c.alpha_sensitivity);
  alpha("alpha_specificity", c.alpha_specificity);
  list("learning", "alpha_grid", c.alpha_grid);
  scalar("eval", "work_point", c.work_point);
  scalar("eval", "ball_radius_frac", c.ball_radius_frac);
  scalar("eval", "cmc_rank_frac", c.cmc_rank_frac);
  integer("eval", "cmc_references", c.cmc_references);
  integer("eval", "eval_refs_per_shape", c.eval_refs_per_shape);
  integer("eval", "eval_negatives_per_ref", c.eval_negatives_per_ref);
  integer("eval", "diameter_samples", c.diameter_samples);
  if (auto v = get("eval", "cmc_query")) c.cmc_query = *v;
  if (auto v = get("eval", "cmc_target")) c.cmc_target = *v;

  for (const auto& [section, body] : tree) {
    if (section.rfind(kShapePrefix, 0) != 0) continue;
    ShapeEntry s;
    s.name = section.substr(kShapePrefix.size());
    require(!s.name.empty() && std::all_of(s.name.begin(), s.name.end(), [](char ch) {
              return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-';
            }),
            "config: shape name '" + s.name + "' must use letters, digits, '_' or '-'");
    auto path = get(section, "path");
    require(path.has_value() && !path->empty(), "config: shape '" + s.name + "' has no path");
    s.path = resolve(base_dir, *path);
    s.class_label = get(section, "class").value_or("");
    s.role = shape_role_from_string(get(section, "role").value_or("train"));
    s.null_shape = get(section, "null").value_or("");
    s.correspondence = resolve(base_dir, get(section, "correspondence").value_or(""));
    s.symmetry = resolve(base_dir, get(section, "symmetry").value_or(""));
    c.shapes.push_back(std::move(s));
  }

  // Range checks mirroring the module preconditions.
  require(c.spectrum_count >= 1, "spectrum.count must be positive");
  require(c.basis_size >= 4, "basis.m must be at least 4");
  require(c.nu_max_percentile > 0 && c.nu_max_percentile <= 100, "basis.nu_max_percentile must lie in (0, 100]");
  require(c.dimension >= 1 && c.dimension < c.basis_size, "descriptor.n must lie in [1, m)");
  require(c.descriptor_format == "csv" || c.descriptor_format == "bin", "descriptor.format must be csv or bin");
  require(c.wks_sigma >= 0 && c.wks_sigma_factor > 0, "WKS sigma settings must be positive");
  require(c.r_frac > 0 && c.r_frac < c.R_frac, "need 0 < learning.r_frac < learning.R_frac");
  require(c.refs_per_shape >= 1 && c.positives_per_ref >= 1 && c.negatives_per_ref >= 1,
          "pair counts must be positive");
  require(c.discriminative_fraction >= 0 && c.discriminative_fraction <= 1,
          "learning.discriminative_fraction must lie in [0, 1]");
  require(c.ridge >= 0, "learning.ridge must be nonnegative");
  for (Scalar a : c.alpha_grid) require(a >= 0 && a <= 1, "alpha grid values must lie in [0, 1]");
  for (const auto& a : {c.alpha_sensitivity, c.alpha_specificity}) {
    require(!a || (*a >= 0 && *a <= 1), "alpha must lie in [0, 1]");
  }
  require(c.work_point > 0 && c.work_point < 1, "eval.work_point must lie in (0, 1)");
  require(c.ball_radius_frac > 0, "eval.ball_radius_frac must be positive");
  require(c.cmc_rank_frac > 0 && c.cmc_rank_frac <= 1, "eval.cmc_rank_frac must lie in (0, 1]");
  require(c.diameter_samples >= 2, "eval.diameter_samples must be at least 2");
  for (Scalar t : c.hks_times) require(t > 0, "HKS times must be positive");
  for (Scalar e : c.wks_energies) require(e > 0, "WKS energies must be positive");
  std::set<std::string> names;
  for (const auto& s : c.shapes) require(names.insert(s.name).second, "duplicate shape '" + s.name + "'");
  for (const auto& s : c.shapes) {
    require(s.null_shape.empty() || names.count(s.null_shape), "shape '" + s.name + "' names unknown null '" + s.null_shape + "'");
    require(s.null_shape.empty() || !s.correspondence.empty(),
            "shape '" + s.name + "' is derived from '" + s.null_shape + "' but has no correspondence file");
  }
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path, const std::map<std::string, std::string>& overrides) {
  const std::string text = io::read_file(path);
  PipelineConfig c = parse_config(text, path.parent_path(), overrides);
  for (const auto& s : c.shapes) {
    for (const auto& p : {s.path, s.correspondence, s.symmetry}) {
      if (!p.empty() && !std::filesystem::exists(p)) {
        throw DataError("shape '" + s.name + "': file " + p.string() + " does not exist");
      }
    }
  }
  return c;
}

std::string serialize_config(const PipelineConfig& config) {
  std::ostringstream out;
  pt::ini_parser::write_ini(out, to_tree(config));
  return out.str();
}

}  // namespace specdesc
