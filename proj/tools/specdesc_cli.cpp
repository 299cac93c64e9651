// specdesc: command-line front end for the spectral descriptor pipeline.
#include "specdesc/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using namespace specdesc;

// Leftover "--key value" or "--key=value" arguments become config overrides.
std::map<std::string, std::string> collect_overrides(const std::vector<std::string>& extras) {
  std::map<std::string, std::string> out;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    std::string arg = extras[i];
    if (arg.rfind("--", 0) != 0 || arg.size() < 3) throw UsageError("unexpected argument '" + arg + "'");
    arg = arg.substr(2);
    std::string value;
    if (const auto eq = arg.find('='); eq != std::string::npos) {
      value = arg.substr(eq + 1);
      arg = arg.substr(0, eq);
    } else {
      if (i + 1 >= extras.size()) throw UsageError("override --" + arg + " needs a value");
      value = extras[++i];
    }
    std::replace(arg.begin(), arg.end(), '-', '_');
    out[arg] = value;
  }
  return out;
}

PipelineConfig make_config(const std::string& path, const std::vector<std::string>& extras) {
  const auto overrides = collect_overrides(extras);
  if (path.empty()) return parse_config("", {}, overrides);
  return load_config(path, overrides);
}

void print_paths(const std::vector<std::filesystem::path>& paths) {
  for (const auto& p : paths) std::cout << p.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral shape descriptors: spectra, HKS/WKS, learned responses, ROC/CMC evaluation"};
  app.require_subcommand(1);
  std::string config_path;

  auto add = [&](const std::string& name, const std::string& help) {
    auto* sub = app.add_subcommand(name, help);
    sub->allow_extras();
    sub->add_option("--config,-c", config_path, "pipeline configuration file");
    return sub;
  };

  std::string out, family, model, query, target;
  std::vector<std::string> descriptor_dirs;

  auto* synth = add("synth", "write the synthetic corpus and its manifest");
  synth->add_option("--out,-o", out, "output directory")->required();
  auto* spectrum = add("spectrum", "compute or refresh cached spectra");
  auto* describe = add("describe", "write per-vertex descriptors for every shape");
  describe->add_option("--family,-f", family, "hks, wks, shapedna, learned or geometry")->required();
  describe->add_option("--model,-m", model, "response model for the learned family");
  describe->add_option("--out,-o", out, "output directory")->required();
  auto* train = add("train", "learn sensitivity and specificity response models");
  train->add_option("--out,-o", out, "output directory")->required();
  auto* eval = add("eval", "ROC and CMC report for descriptor directories");
  eval->add_option("--descriptors,-d", descriptor_dirs, "descriptor directories")->required();
  eval->add_option("--out,-o", out, "report directory")->required();
  auto* sweep = add("sweep-alpha", "FN@FP and FP@FN over the alpha grid");
  sweep->add_option("--out,-o", out, "output CSV")->required();
  auto* match = add("match", "nearest-descriptor matches from one shape to another");
  match->add_option("--query", query, "query shape name")->required();
  match->add_option("--target", target, "target shape name")->required();
  match->add_option("--descriptors,-d", out, "descriptor directory")->required();
  std::string match_out;
  match->add_option("--out,-o", match_out, "output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    auto* sub = app.get_subcommands().front();
    const auto config = make_config(config_path, sub->remaining());
    std::ostream* log = &std::clog;
    if (sub == synth) {
      print_paths(cmd_synth(config, out, log));
    } else if (sub == spectrum) {
      cmd_spectrum(config, log);
    } else if (sub == describe) {
      print_paths(cmd_describe(config, descriptor_family_from_string(family), model, out, log));
    } else if (sub == train) {
      print_paths(cmd_train(config, out, log));
    } else if (sub == eval) {
      std::vector<std::filesystem::path> dirs(descriptor_dirs.begin(), descriptor_dirs.end());
      print_paths(cmd_eval(config, dirs, out, log));
    } else if (sub == sweep) {
      std::cout << cmd_sweep_alpha(config, out, log).string() << '\n';
    } else if (sub == match) {
      std::cout << cmd_match(config, query, target, out, match_out, log).string() << '\n';
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 4;
  }
  return 0;
}
