#include "support.hpp"

#include "specdesc/io.hpp"
#include "specdesc/pipeline.hpp"

#include <cstdlib>
#include <sstream>

using namespace specdesc;

namespace {

const std::map<std::string, std::string> kSmall = {
    {"synth.subdivisions", "2"},         {"spectrum.count", "60"},
    {"basis.m", "24"},                   {"descriptor.n", "6"},
    {"learning.refs_per_shape", "8"},    {"learning.negatives_per_ref", "30"},
    {"learning.r_frac", "0.05"},         {"learning.R_frac", "0.1"},
    {"learning.alpha_grid", "0.05,0.1,0.2,0.4"},
    {"eval.eval_refs_per_shape", "8"},   {"eval.eval_negatives_per_ref", "30"},
    {"eval.ball_radius_frac", "0.05"},   {"eval.cmc_references", "20"},
    {"eval.diameter_samples", "16"},
};

// One small corpus shared by the pipeline tests.
struct Corpus {
  testing::ScratchDir dir{"corpus"};
  std::filesystem::path manifest;

  Corpus() {
    const auto config = parse_config("", {}, kSmall);
    cmd_synth(config, dir / "corpus");
    manifest = dir / "corpus" / "corpus.ini";
  }

  PipelineConfig config(const std::string& work) const {
    auto overrides = kSmall;
    overrides["pipeline.work_dir"] = (dir / work).string();
    return load_config(manifest, overrides);
  }
};

const Corpus& corpus() {
  static const Corpus c;
  return c;
}

int run_cli(const std::string& args) {
  const std::string command = std::string(SPECDESC_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("defaults") {
  const auto c = parse_config("");
  CHECK(c.spectrum_count == 300);
  CHECK(c.basis_size == 150);
  CHECK(c.nu_max_percentile == 95);
  CHECK(c.dimension == 12);
  CHECK(c.r_frac == 0.02);
  CHECK(c.R_frac == 0.05);
  CHECK(c.ball_radius_frac == 0.01);
  CHECK(c.cmc_rank_frac == 0.01);
  CHECK(std::find(c.alpha_grid.begin(), c.alpha_grid.end(), 0.03) != c.alpha_grid.end());
  CHECK(std::find(c.alpha_grid.begin(), c.alpha_grid.end(), 0.09) != c.alpha_grid.end());
}

TEST_CASE("config round trip") {
  const std::string text =
      "[pipeline]\nseed = 9\nwork_dir = /tmp/w\n"
      "[spectrum]\ncount = 120\nmass = consistent\n"
      "[descriptor]\nhks_times = 0.1, 0.2,0.4\nformat = bin\n"
      "[learning]\nalpha_sensitivity = 0.09\nalpha_grid = 0.01,0.5\n"
      "[eval]\ncmc_query = a\ncmc_target = b\n"
      "[shape:a]\npath = /tmp/a.off\nclass = one\nrole = eval\n"
      "[shape:b]\npath = /tmp/b.off\nclass = one\nrole = eval\nnull = a\ncorrespondence = /tmp/b.corr\n";
  const auto c = parse_config(text);
  CHECK(c.seed == 9);
  CHECK(c.spectrum_count == 120);
  CHECK(c.mass_mode == MassMode::Consistent);
  CHECK(c.hks_times == std::vector<Scalar>{0.1, 0.2, 0.4});
  CHECK(c.alpha_sensitivity == 0.09);
  CHECK(!c.alpha_specificity.has_value());
  REQUIRE(c.shapes.size() == 2);
  CHECK(c.shape("b").null_shape == "a");
  CHECK(c.shape("b").role == ShapeRole::Eval);
  CHECK(parse_config(serialize_config(c)) == c);
  CHECK(serialize_config(parse_config(serialize_config(c))) == serialize_config(c));
}

TEST_CASE("overrides and unknown keys") {
  const auto c = parse_config("[basis]\nm = 40\n", {}, {{"m", "60"}, {"learning.ridge", "0.001"}, {"seed", "4"}});
  CHECK(c.basis_size == 60);
  CHECK(c.ridge == 0.001);
  CHECK(c.seed == 4);
  CHECK_THROWS_AS(parse_config("", {}, {{"no_such_key", "1"}}), UsageError);
  CHECK_THROWS_AS(parse_config("[basis]\nsize = 3\n"), UsageError);
  CHECK_THROWS_AS(parse_config("[nowhere]\nx = 1\n"), UsageError);
  CHECK_THROWS_AS(parse_config("[spectrum]\ncount = many\n"), UsageError);
  CHECK_THROWS_AS(parse_config("[shape:x]\npath = a.off\nrole = sideways\n"), UsageError);
}

TEST_CASE("relative shape paths resolve against the manifest") {
  testing::ScratchDir dir("paths");
  io::write_file_atomic(dir / "m" / "a.off", "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n");
  io::write_file_atomic(dir / "m" / "c.ini", "[shape:a]\npath = a.off\nclass = x\n");
  const auto c = load_config(dir / "m" / "c.ini");
  CHECK(c.shape("a").path == dir / "m" / "a.off");
  io::write_file_atomic(dir / "m" / "d.ini", "[shape:a]\npath = missing.off\nclass = x\n");
  CHECK_THROWS_AS(load_config(dir / "m" / "d.ini"), DataError);
}

TEST_CASE("synthetic corpus") {
  const auto& c = corpus();
  const auto config = c.config("synth");
  Index deformed = 0;
  for (const auto& s : config.shapes) {
    CHECK(std::filesystem::exists(s.path));
    if (!s.null_shape.empty()) {
      ++deformed;
      CHECK(std::filesystem::exists(s.correspondence));
    }
  }
  // Three deformations for training and five for evaluation, five strengths each.
  CHECK(deformed == (3 + 5) * 5);
  CHECK(config.cmc_query == "quadruped_null");

  testing::ScratchDir again("synth-again");
  cmd_synth(parse_config("", {}, kSmall), again / "corpus");
  for (const auto& s : config.shapes) {
    const auto relative = std::filesystem::relative(s.path, c.dir / "corpus");
    CHECK(io::read_file(s.path) == io::read_file(again / "corpus" / relative));
  }
}

TEST_CASE("spectrum cache hits, misses and corruption") {
  const auto config = corpus().config("cache");
  std::ostringstream first, second, third;
  cmd_spectrum(config, &first);
  CHECK(first.str().find("cache hit") == std::string::npos);
  cmd_spectrum(config, &second);
  CHECK(second.str().find("computed") == std::string::npos);
  CHECK(second.str().find("spectrum biped_null: cache hit") != std::string::npos);

  const auto files = std::vector<std::filesystem::directory_entry>(
      std::filesystem::directory_iterator(config.cache_dir()), std::filesystem::directory_iterator());
  REQUIRE(!files.empty());
  auto bytes = io::read_file(files.front().path());
  bytes[bytes.size() / 2] ^= 0x11;
  io::write_file_atomic(files.front().path(), bytes);
  cmd_spectrum(config, &third);
  CHECK(third.str().find("warning") != std::string::npos);
  CHECK(third.str().find("computed") != std::string::npos);
}

TEST_CASE("train, describe and evaluate end to end") {
  const auto& c = corpus();
  const auto config = c.config("e2e");
  const auto out = c.dir / "e2e";
  std::ostringstream log;
  const auto trained = cmd_train(config, out / "model", &log);
  CHECK(std::filesystem::exists(out / "model" / "sensitivity.json"));
  CHECK(std::filesystem::exists(out / "model" / "specificity.json"));
  CHECK(std::filesystem::exists(out / "model" / "sweep.csv"));
  const auto report = io::read_file(out / "model" / "train_report.txt");
  CHECK(report.find("covariance_source") != std::string::npos);

  // Same seed, same bytes.
  cmd_train(config, out / "model2");
  for (const char* f : {"sensitivity.json", "specificity.json", "sweep.csv", "train_report.txt"}) {
    CHECK(io::read_file(out / "model" / f) == io::read_file(out / "model2" / f));
  }

  cmd_describe(config, DescriptorFamily::Hks, "", out / "hks");
  cmd_describe(config, DescriptorFamily::Learned, out / "model" / "sensitivity.json", out / "learned");
  CHECK_THROWS_AS(cmd_describe(config, DescriptorFamily::Learned, "", out / "x"), UsageError);
  const auto hks = load_descriptors(out / "hks" / "quadruped_null.csv");
  CHECK(hks.dimension() == 6);

  const auto written = cmd_eval(config, {out / "hks", out / "learned"}, out / "report");
  const auto manifest = io::read_file(out / "report" / "manifest.txt");
  for (const auto& p : written) {
    CHECK(std::filesystem::exists(p));
    if (p.filename() != "manifest.txt") CHECK(manifest.find(p.filename().string()) != std::string::npos);
  }
  CHECK(std::count(manifest.begin(), manifest.end(), '\n') + 1 == static_cast<long>(written.size()));
  // CMC runs to 1% of the target's vertices.
  Pipeline p(config);
  p.load_shapes();
  const auto target_v = p.shapes()[static_cast<std::size_t>(p.shape_index("quadruped_bend_3"))].mesh->num_vertices();
  const auto cmc_csv = io::read_file(out / "report" / "cmc_000.csv");
  CHECK(std::count(cmc_csv.begin(), cmc_csv.end(), '\n') ==
        static_cast<long>(std::ceil(0.01 * static_cast<Scalar>(target_v))) + 1);

  // A second evaluation writes the same bytes.
  cmd_eval(config, {out / "hks", out / "learned"}, out / "report2");
  for (const auto& p2 : written) {
    CHECK(io::read_file(p2) == io::read_file(out / "report2" / p2.filename()));
  }

  std::filesystem::remove(out / "hks" / "quadruped_bend_3.csv");
  try {
    cmd_eval(config, {out / "hks"}, out / "report3");
    FAIL("missing descriptor file was accepted");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("quadruped_bend_3") != std::string::npos);
  }
}

TEST_CASE("exit codes") {
  testing::ScratchDir dir("exit");
  CHECK(run_cli("") == 2);
  CHECK(run_cli("frobnicate") == 2);
  CHECK(run_cli("describe -f sihks -o " + (dir / "d").string()) == 2);
  CHECK(run_cli("spectrum --no-such-key 3") == 2);
  CHECK(run_cli("spectrum -c " + (dir / "missing.ini").string()) == 3);
  io::write_file_atomic(dir / "bad.ini", "[shape:a]\npath = a.off\nclass = x\n");
  io::write_file_atomic(dir / "a.off", "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n");
  CHECK(run_cli("spectrum -c " + (dir / "bad.ini").string() + " --spectrum.count 2") == 3);
  CHECK(run_cli("synth -o " + (dir / "corpus").string() + " --synth.subdivisions 1") == 0);
  CHECK(std::filesystem::exists(dir / "corpus" / "corpus.ini"));
}

}  // TEST_SUITE
