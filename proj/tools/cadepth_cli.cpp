// cadepth: coded-aperture depth-from-defocus experiments.

#include "cadepth/commands.hpp"
#include "cadepth/errors.hpp"
#include "cadepth/parallel.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

using namespace cadepth;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> threads;
  std::vector<std::string> sets;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "key = value configuration file")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "random seed (overrides the config)");
  app->add_option("--out", c.out, "output directory");
  app->add_option("--threads", c.threads, "worker thread cap")->check(CLI::PositiveNumber);
  app->add_option("--set", c.sets, "extra key=value override, repeatable");
}

// Flags are applied after the config file, so they win.
Config assemble(const Common& c, const std::vector<std::pair<std::string, std::string>>& flags) {
  Config cfg = c.config_path.empty() ? Config{} : Config::load(c.config_path);
  for (const auto& s : c.sets) cfg.set_assignment(s);
  for (const auto& [k, v] : flags)
    if (!v.empty()) cfg.set(k, v);
  if (c.seed) cfg.set("seed", std::to_string(*c.seed));
  if (!c.out.empty()) cfg.set("out", c.out);
  if (c.threads) cfg.set("threads", std::to_string(*c.threads));
  set_default_threads(static_cast<int>(cfg.get_long("threads", 1)));
  return cfg;
}

std::string join(const std::vector<std::string>& items) {
  std::string s;
  for (const auto& i : items) s += (s.empty() ? "" : ",") + i;
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coded-aperture depth from defocus: simulation, code evaluation, estimation and training"};
  app.require_subcommand(1);

  Common common;
  std::string code, image, depth, sizes, method, checkpoint, ground_truth, scenes, manifest, resume;
  std::vector<std::string> codes, pairs;
  long stride = 0;
  bool verbose = false;

  auto* simulate = app.add_subcommand("simulate", "blur an all-focus scene with a coded aperture");
  add_common(simulate, common);
  simulate->add_option("--code", code, "code file or open[:N]");
  simulate->add_option("--image", image, "all-focus image (.pgm, .png or .txt)");
  simulate->add_option("--depth", depth, "depth map in meters");
  simulate->add_option("--sizes", sizes, "blur-size map");

  auto* eval = app.add_subcommand("eval-code", "KL-divergence discriminability of aperture codes");
  add_common(eval, common);
  eval->add_option("--code", codes, "code file or open[:N], repeatable");

  auto* estimate = app.add_subcommand("estimate", "estimate a blur-size map from a coded image");
  add_common(estimate, common);
  estimate->add_option("--image", image, "coded image");
  estimate->add_option("--code", code, "aperture code (wiener)");
  estimate->add_option("--method", method, "wiener or cnn")->check(CLI::IsMember({"wiener", "cnn"}));
  estimate->add_option("--checkpoint", checkpoint, "trained checkpoint (cnn)");
  estimate->add_option("--ground-truth", ground_truth, "blur-size map for accuracy metrics");
  estimate->add_option("--stride", stride, "patch stride in pixels");

  auto* train = app.add_subcommand("train", "jointly learn an aperture code and blur-size classifier");
  add_common(train, common);
  train->add_option("--scenes", scenes, "scene directory (default: generated corpus)");
  train->add_option("--resume", resume, "checkpoint to continue from");
  train->add_flag("--verbose", verbose, "print log rows to stderr");

  auto* compare = app.add_subcommand("compare", "side-by-side depth accuracy of code/method pairs");
  add_common(compare, common);
  compare->add_option("--pair", pairs, "CODE:METHOD[:CHECKPOINT], repeatable");
  compare->add_option("--scenes", scenes, "scene directory");
  compare->add_option("--manifest", manifest, "scene id list restricting the directory");
  compare->add_option("--stride", stride, "patch stride in pixels");

  auto* make = app.add_subcommand("make-scenes", "write a synthetic multi-plane scene corpus");
  add_common(make, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  const std::string stride_s = stride > 0 ? std::to_string(stride) : "";
  try {
    if (simulate->parsed()) {
      cli::cmd_simulate(assemble(common, {{"code", code}, {"image", image}, {"depth", depth}, {"sizes", sizes}}));
    } else if (eval->parsed()) {
      cli::cmd_eval_code(assemble(common, {{"codes", join(codes)}}));
    } else if (estimate->parsed()) {
      const auto out = cli::cmd_estimate(assemble(common, {{"image", image},
                                                           {"code", code},
                                                           {"method", method},
                                                           {"checkpoint", checkpoint},
                                                           {"ground_truth", ground_truth},
                                                           {"stride", stride_s}}));
      if (out.metrics) std::cout << "accuracy " << out.metrics->accuracy << '\n';
    } else if (train->parsed()) {
      const auto result =
          cli::cmd_train(assemble(common, {{"scenes", scenes}, {"resume", resume}, {"verbose", verbose ? "1" : ""}}));
      if (!result.log.empty()) std::cout << "final loss " << result.log.back().loss << '\n';
    } else if (compare->parsed()) {
      for (const auto& row : cli::cmd_compare(
               assemble(common, {{"pairs", join(pairs)}, {"scenes", scenes}, {"manifest", manifest}, {"stride", stride_s}})))
        std::cout << row.code << ' ' << row.method << " accuracy " << row.accuracy << " score_min " << row.score_min
                  << '\n';
    } else if (make->parsed()) {
      cli::cmd_make_scenes(assemble(common, {}));
    }
  } catch (const std::exception& e) {
    std::cerr << "cadepth: " << e.what() << '\n';
    return cli::exit_code_for(e);
  }
  return 0;
}
