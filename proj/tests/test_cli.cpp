#include "cadepth/commands.hpp"
#include "cadepth/errors.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace cadepth;
using namespace cadepth::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CADEPTH_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Config base(const fs::path& out) {
  Config cfg;
  cfg.set("out", out.string());
  return cfg;
}

// Small network and corpus so the training commands run in seconds.
Config tiny_training(const fs::path& out) {
  Config cfg = base(out);
  for (const char* kv : {"corpus.count=6", "corpus.height=64", "corpus.width=64", "corpus.min_planes=1",
                         "corpus.max_planes=2", "network.conv=4,4,4", "network.fc=16", "train.batch_size=8",
                         "train.val_patches=16", "train.log_every=1", "seed=5", "split.train=0.5",
                         "split.val=0.5", "split.test=0"})
    cfg.set_assignment(kv);
  return cfg;
}

}  // namespace

TEST_CASE("depth metrics") {
  IntGrid truth(2, 3);
  truth << 1, 3, 5, 13, 13, 1;
  const DepthMetrics perfect = depth_metrics(truth, truth, 13);
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.confusion.rows() == 7);
  CHECK(perfect.confusion.trace() == 6);
  CHECK(perfect.confusion.sum() == 6);
  CHECK(perfect.confusion(6, 6) == 2);

  IntGrid est = truth;
  est(0, 0) = 3;
  const DepthMetrics m = depth_metrics(truth, est, 13);
  CHECK(m.accuracy == doctest::Approx(5.0 / 6));
  CHECK(m.confusion(0, 1) == 1);
  CHECK_THROWS_AS(depth_metrics(truth, IntGrid::Ones(3, 2), 13), InvalidArgument);
}

TEST_CASE("exit code mapping") {
  CHECK(exit_code_for(UsageError("x")) == 1);
  CHECK(exit_code_for(InvalidConfiguration("x")) == 1);
  CHECK(exit_code_for(IoError("x")) == 1);
  CHECK(exit_code_for(DegenerateKernel("x")) == 2);
  CHECK(exit_code_for(InvalidArgument("x")) == 2);
  CHECK(exit_code_for(std::runtime_error("x")) == 2);
}

TEST_CASE("simulate examples") {
  const auto dir = oracle::scratch_dir("cli_simulate");
  Config cfg = base(dir / "focus");
  cfg.set("code", "open");
  cfg.set("synth.depths", "1.0");
  cfg.set("synth.height", "48");
  cfg.set("synth.width", "48");
  cfg.set("seed", "3");
  cmd_simulate(cfg);
  CHECK((load_image(dir / "focus" / "coded.txt") - load_image(dir / "focus" / "allfocus.pgm")).abs().maxCoeff() <=
        0.5 / 255 + 1e-12);
  CHECK(slurp(dir / "focus" / "coded.pgm") == slurp(dir / "focus" / "allfocus.pgm"));
  CHECK((load_size_map(dir / "focus" / "sizes.txt") == 1).all());

  // Rerun with the same seed and noise gives identical files.
  cfg.set("sim.noise_sigma", "0.01");
  cfg.set("synth.depths", "0.9,1.2");
  cfg.set("out", (dir / "a").string());
  cmd_simulate(cfg);
  cfg.set("out", (dir / "b").string());
  cmd_simulate(cfg);
  for (const char* f : {"coded.pgm", "coded.png", "coded.txt", "sizes.txt", "sizes.pgm", "metadata.txt"})
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  const std::string meta = slurp(dir / "a" / "metadata.txt");
  CHECK(meta.find("sim.noise_sigma = 0.01") != std::string::npos);
  CHECK(meta.find("seed = 3") != std::string::npos);

  Config missing = base(dir / "c");
  missing.set("synth.depths", "1.0");
  CHECK_THROWS_AS(cmd_simulate(missing), UsageError);
  missing.set("code", "open");
  missing.set("image", (dir / "a" / "allfocus.pgm").string());
  CHECK_THROWS_AS(cmd_simulate(missing), UsageError);
}

TEST_CASE("simulate two planes against the convolution oracle") {
  const auto dir = oracle::scratch_dir("cli_simulate_planes");
  const ApertureCode code{oracle::random_binary(11, 4)};
  save_code(dir / "code.txt", code);
  Config cfg = base(dir / "out");
  cfg.set("code", (dir / "code.txt").string());
  cfg.set("synth.depths", "0.9,1.2");
  cfg.set("synth.height", "64");
  cfg.set("synth.width", "96");
  cmd_simulate(cfg);
  SyntheticSpec spec;
  spec.depths = {0.9, 1.2};
  spec.height = 64;
  spec.width = 96;
  const Grid sharp = make_synthetic_scene(spec).image;
  CHECK((load_image(dir / "out" / "allfocus.pgm") - sharp).abs().maxCoeff() <= 0.5 / 255 + 1e-12);
  const Grid coded = load_image(dir / "out" / "coded.txt");
  const IntGrid sizes = load_size_map(dir / "out" / "sizes.txt");
  const int left = oracle::blur_size(0.9), right = oracle::blur_size(1.2);
  REQUIRE(left != right);
  CHECK(sizes(0, 0) == left);
  CHECK(sizes(0, 95) == right);
  // Each 32-pixel tile takes the size at its center: the tile spanning the
  // plane boundary at column 48 belongs to the right plane.
  const Grid ref_l = oracle::convolve(sharp, scale_code(code, left).values, 'r');
  const Grid ref_r = oracle::convolve(sharp, scale_code(code, right).values, 'r');
  double err = 0.0;
  for (int r = 0; r < 64; ++r) {
    for (int c = 0; c < 32; ++c) err = std::max(err, std::abs(coded(r, c) - ref_l(r, c)));
    for (int c = 32; c < 96; ++c) err = std::max(err, std::abs(coded(r, c) - ref_r(r, c)));
  }
  CHECK(err < 1e-10);
}

TEST_CASE("eval-code examples") {
  const auto dir = oracle::scratch_dir("cli_eval");
  const ApertureCode code{oracle::random_binary(11, 9)};
  save_code(dir / "random.txt", code);
  const std::string path = (dir / "random.txt").string();

  Config cfg = base(dir / "rank");
  cfg.set("codes", "open," + path + "," + path);
  const auto scores = cmd_eval_code(cfg);
  REQUIRE(scores.size() == 3);
  CHECK(scores[1].report.score_min > scores[0].report.score_min);
  const auto summary = lines(dir / "rank" / "summary.csv");
  REQUIRE(summary.size() == 4);
  CHECK(summary[0] == "rank,code,score_min,score_mean");
  CHECK(summary[1].rfind("1," + path + ",", 0) == 0);
  CHECK(summary[3].rfind("3,open,", 0) == 0);
  CHECK(slurp(dir / "rank" / "kl_1_random.csv") == slurp(dir / "rank" / "kl_2_random.csv"));

  Config single = base(dir / "single");
  single.set("codes", path);
  single.set("kl.scales", "1,1");
  CHECK(cmd_eval_code(single)[0].report.score_min == 0.0);

  Config bad = base(dir / "bad");
  bad.set("codes", (dir / "nope.txt").string());
  try {
    cmd_eval_code(bad);
    FAIL("expected an error");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("nope.txt") != std::string::npos);
  }
  CHECK_THROWS_AS(cmd_eval_code(base(dir / "none")), UsageError);
}

TEST_CASE("estimate examples") {
  const auto dir = oracle::scratch_dir("cli_estimate");
  Config sim = base(dir / "sim");
  sim.set("code", "open");
  sim.set("synth.depths", "0.95");
  sim.set("synth.height", "64");
  sim.set("synth.width", "64");
  cmd_simulate(sim);
  const std::string coded = (dir / "sim" / "coded.txt").string();
  const std::string truth = (dir / "sim" / "sizes.txt").string();

  Config cfg = base(dir / "est");
  cfg.set("image", coded);
  cfg.set("code", "open");
  cfg.set("ground_truth", truth);
  const auto outcome = cmd_estimate(cfg);
  REQUIRE(outcome.metrics);
  CHECK(outcome.metrics->accuracy >= 0.95);
  CHECK(lines(dir / "est" / "confusion.csv").size() == 8);
  CHECK(lines(dir / "est" / "confusion.csv")[0] == "true\\pred,1,3,5,7,9,11,13");
  CHECK(fs::exists(dir / "est" / "residuals.csv"));

  Config no_truth = base(dir / "est2");
  no_truth.set("image", coded);
  no_truth.set("code", "open");
  const auto bare = cmd_estimate(no_truth);
  CHECK(!bare.metrics);
  CHECK(fs::exists(dir / "est2" / "sizes.txt"));
  CHECK(fs::exists(dir / "est2" / "sizes.pgm"));
  CHECK(!fs::exists(dir / "est2" / "confusion.csv"));
  CHECK((load_size_map(dir / "est2" / "sizes.txt") == outcome.sizes).all());

  Config cnn = no_truth;
  cnn.set("method", "cnn");
  CHECK_THROWS_AS(cmd_estimate(cnn), UsageError);
  cnn.set("method", "depth");
  CHECK_THROWS_AS(cmd_estimate(cnn), UsageError);
}

TEST_CASE("train with zero iterations writes the binarized initial code") {
  const auto dir = oracle::scratch_dir("cli_train_zero");
  Config cfg = tiny_training(dir);
  cfg.set("train.iterations", "0");
  const TrainResult result = cmd_train(cfg);
  const CameraConfig cam;
  const TrainState init = TrainState::initial(train_from(cfg, cam), AnnealSchedule{});
  const ApertureCode expected = hard_binarize(soft_binarize(init.w, 2.5), 0.5);
  CHECK((load_code(dir / "code.txt").values() == expected.values()).all());
  CHECK((result.code.values() == expected.values()).all());
  for (const char* f : {"checkpoint.bin", "code_soft.txt", "log.csv", "final_metrics.csv", "metadata.txt",
                        "train.txt", "val.txt", "test.txt"})
    CHECK(fs::exists(dir / f));
  CHECK(lines(dir / "log.csv").size() == 1);
}

TEST_CASE("train resume continues the log and schedule") {
  const auto dir = oracle::scratch_dir("cli_train_resume");
  Config full = tiny_training(dir / "full");
  full.set("train.iterations", "6");
  cmd_train(full);

  Config part = tiny_training(dir / "part");
  part.set("train.iterations", "6");
  part.set("train.stop_at", "3");
  cmd_train(part);
  CHECK(lines(dir / "part" / "log.csv").size() == 4);
  part.set("train.stop_at", "-1");
  part.set("resume", (dir / "part" / "checkpoint.bin").string());
  cmd_train(part);

  const auto resumed = lines(dir / "part" / "log.csv");
  REQUIRE(resumed.size() == 7);
  std::ostringstream alpha;
  alpha.precision(17);
  alpha << 2.5 + 3.0 / 3000;
  CHECK(resumed[4].rfind("3," + alpha.str() + ",", 0) == 0);
  CHECK(resumed == lines(dir / "full" / "log.csv"));
  CHECK(slurp(dir / "part" / "checkpoint.bin") == slurp(dir / "full" / "checkpoint.bin"));
  CHECK(slurp(dir / "part" / "code.txt") == slurp(dir / "full" / "code.txt"));

  Config wrong = part;
  wrong.set("seed", "6");
  CHECK_THROWS_AS(cmd_train(wrong), InvalidConfiguration);
}

TEST_CASE("make-scenes and compare") {
  const auto dir = oracle::scratch_dir("cli_compare");
  Config scenes = base(dir / "scenes");
  for (const char* kv : {"corpus.count=5", "corpus.height=64", "corpus.width=64", "seed=2"})
    scenes.set_assignment(kv);
  cmd_make_scenes(scenes);
  CHECK(load_scene_dir(dir / "scenes").size() == 5);
  size_t listed = 0;
  for (const char* m : {"train.txt", "val.txt", "test.txt"}) listed += lines(dir / "scenes" / m).size();
  CHECK(listed == 5);

  const ApertureCode code{oracle::random_binary(11, 12)};
  save_code(dir / "c.txt", code);
  const std::string c = (dir / "c.txt").string();
  Config cfg = base(dir / "cmp");
  cfg.set("scenes", (dir / "scenes").string());
  cfg.set("pairs", c + ":wiener," + c + ":wiener,open:11:wiener");
  cfg.set("stride", "16");
  const auto rows = cmd_compare(cfg);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].accuracy == rows[1].accuracy);
  CHECK(rows[0].score_min == rows[1].score_min);
  CHECK(rows[2].code == "open:11");
  CHECK(rows[0].accuracy >= 0.0);
  CHECK(rows[0].accuracy <= 1.0);
  const auto csv = lines(dir / "cmp" / "compare.csv");
  REQUIRE(csv.size() == 4);
  CHECK(csv[0] == "code,method,accuracy,score_min,low_confidence_fraction");
  CHECK(csv[1] == csv[2]);

  std::ofstream(dir / "empty.txt") << "no-such-scene\n";
  Config empty = cfg;
  empty.set("manifest", (dir / "empty.txt").string());
  CHECK_THROWS_AS(cmd_compare(empty), UsageError);
  Config one = cfg;
  one.set("pairs", c + ":wiener");
  CHECK_THROWS_AS(cmd_compare(one), UsageError);
  Config malformed = cfg;
  malformed.set("pairs", c + ":wiener," + c);
  CHECK_THROWS_AS(cmd_compare(malformed), UsageError);
  Config cnn = cfg;
  cnn.set("pairs", c + ":wiener," + c + ":cnn");
  CHECK_THROWS_AS(cmd_compare(cnn), UsageError);
}

TEST_CASE("binary exit codes") {
  const auto dir = oracle::scratch_dir("cli_binary");
  const std::string out = (dir / "o").string();
  CHECK(run_cli("") == 1);
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("frobnicate") == 1);
  CHECK(run_cli("simulate --code open --set synth.depths=1.0 --set synth.height=40 --set synth.width=40 --out " +
                out) == 0);
  CHECK(fs::exists(dir / "o" / "coded.pgm"));
  CHECK(run_cli("simulate --code " + (dir / "none.txt").string() + " --set synth.depths=1 --out " + out) == 1);
  CHECK(run_cli("estimate --method cnn --image " + out + "/coded.pgm --out " + out) == 1);
  CHECK(run_cli("simulate --code open --set camera.max_kernel_size=4 --set synth.depths=1 --out " + out) == 1);

  // A 16 x 16 image is smaller than one patch: a runtime failure.
  save_image(dir / "small.txt", Grid::Constant(16, 16, 0.5));
  CHECK(run_cli("estimate --code open --image " + (dir / "small.txt").string() + " --out " + out) == 2);

  // Flags override the config file.
  std::ofstream(dir / "run.cfg") << "code = open:3\nsynth.depths = 1.0\nsynth.height = 40\nsynth.width = 40\nseed = 1\n";
  CHECK(run_cli("simulate --config " + (dir / "run.cfg").string() + " --seed 9 --out " + out) == 0);
  const std::string meta = slurp(dir / "o" / "metadata.txt");
  CHECK(meta.find("seed = 9") != std::string::npos);
  CHECK(meta.find("code = open:3") != std::string::npos);
}
