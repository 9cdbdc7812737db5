#include "cadepth/commands.hpp"

#include "cadepth/errors.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

namespace cadepth::cli {

namespace fs = std::filesystem;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const InvalidConfiguration*>(&e) ||
      dynamic_cast<const IoError*>(&e))
    return 1;
  return 2;
}

namespace {

fs::path output_dir(const Config& cfg) {
  const fs::path out = cfg.get("out", "");
  if (out.empty()) throw UsageError("an output directory is required (--out)");
  fs::create_directories(out);
  return out;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  return out;
}

void write_metadata(const fs::path& dir, const std::string& command, const Config& cfg,
                    const std::vector<std::pair<std::string, std::string>>& extra = {}) {
  auto out = open_out(dir / "metadata.txt");
  out << "# cadepth " << command << '\n' << "command = " << command << '\n';
  for (const auto& [k, v] : cfg.entries())
    if (k != "out" && k != "threads") out << k << " = " << v << '\n';
  for (const auto& [k, v] : extra) out << "effective." << k << " = " << v << '\n';
}

std::string describe(const CameraConfig& cam) {
  std::ostringstream os;
  os << "f=" << cam.focal_length_mm << "mm pitch=" << cam.pixel_pitch_um << "um F/" << cam.f_number
     << " focus=" << cam.focus_distance_m << "m k=" << cam.max_kernel_size;
  return os.str();
}

std::string describe(const WienerConfig& w) {
  std::ostringstream os;
  os << "nsr=" << w.nsr << " texture_floor=" << w.texture_floor << " boundary=" << to_string(w.boundary)
     << " scales=";
  for (size_t i = 0; i < w.scales.size(); ++i) os << (i ? "," : "") << w.scales[i];
  return os.str();
}

ApertureCode require_code(const Config& cfg, const std::string& key = "code") {
  if (!cfg.has(key)) throw UsageError("an aperture code is required (--" + key + ")");
  return code_from(cfg.get(key, ""));
}

Scene scene_from(const Config& cfg, const CameraConfig& cam) {
  Scene scene;
  if (cfg.has("image")) {
    scene.id = fs::path(cfg.get("image", "")).stem().string();
    scene.image = load_image(cfg.get("image", ""));
    if (cfg.has("depth")) scene.depth = load_depth_map(cfg.get("depth", ""));
    if (cfg.has("sizes")) scene.sizes = load_size_map(cfg.get("sizes", ""));
    if (!scene.depth && !scene.sizes) throw UsageError("an image needs --depth or --sizes");
  } else if (cfg.has("synth.depths")) {
    SyntheticSpec spec;
    spec.height = static_cast<int>(cfg.get_long("synth.height", spec.height));
    spec.width = static_cast<int>(cfg.get_long("synth.width", spec.width));
    spec.layout = parse_layout(cfg.get("synth.layout", "planes"));
    spec.texture = parse_texture(cfg.get("synth.texture", "noise"));
    spec.depths = cfg.get_doubles("synth.depths", {});
    spec.seed = cfg.get_u64("synth.seed", cfg.get_u64("seed", 0));
    scene = make_synthetic_scene(spec);
  } else {
    throw UsageError("simulate needs a scene: --image with --depth/--sizes, or synth.depths");
  }
  discretize_scene(scene, cam);
  return scene;
}

std::vector<Scene> scenes_from(const Config& cfg, const CameraConfig& cam) {
  std::vector<Scene> scenes;
  if (cfg.has("scenes")) {
    scenes = load_scene_dir(cfg.get("scenes", ""));
  } else {
    scenes = make_corpus(corpus_from(cfg), cam);
  }
  for (auto& s : scenes) discretize_scene(s, cam);
  return scenes;
}

std::vector<std::string> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path.string());
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ids.push_back(line);
  return ids;
}

void write_confusion(const fs::path& path, const DepthMetrics& m) {
  auto out = open_out(path);
  out << "true\\pred";
  for (int c = 0; c < m.confusion.cols(); ++c) out << ',' << class_to_size(c);
  out << '\n';
  for (int r = 0; r < m.confusion.rows(); ++r) {
    out << class_to_size(r);
    for (int c = 0; c < m.confusion.cols(); ++c) out << ',' << m.confusion(r, c);
    out << '\n';
  }
}

double low_confidence_fraction(const std::vector<PatchVote>& votes) {
  if (votes.empty()) return 0.0;
  size_t low = 0;
  for (const auto& v : votes) low += !v.confident;
  return static_cast<double>(low) / static_cast<double>(votes.size());
}

}  // namespace

DepthMetrics depth_metrics(const BlurSizeMap& truth, const BlurSizeMap& estimate, int max_size) {
  if (truth.rows() != estimate.rows() || truth.cols() != estimate.cols())
    throw InvalidArgument("ground truth and estimate dimensions differ");
  validate_size_map(truth, max_size);
  validate_size_map(estimate, max_size);
  const int classes = (max_size + 1) / 2;
  DepthMetrics m;
  m.confusion = Eigen::MatrixXi::Zero(classes, classes);
  for (Eigen::Index i = 0; i < truth.size(); ++i)
    ++m.confusion(size_to_class(truth.data()[i]), size_to_class(estimate.data()[i]));
  m.accuracy = static_cast<double>(m.confusion.trace()) / static_cast<double>(truth.size());
  return m;
}

void cmd_simulate(const Config& cfg) {
  const CameraConfig cam = camera_from(cfg);
  const ApertureCode code = require_code(cfg);
  const Scene scene = scene_from(cfg, cam);
  const fs::path out = output_dir(cfg);
  const SimulationOptions opts = simulation_from(cfg);
  const GrayImage coded = simulate_coded_image(scene.image, *scene.sizes, code, cam, opts);
  save_image(out / "coded.pgm", coded);
  save_image(out / "coded.png", coded);
  save_image(out / "coded.txt", coded);
  save_image(out / "allfocus.pgm", scene.image);
  save_size_map(out / "sizes.txt", *scene.sizes);
  save_size_map_pgm(out / "sizes.pgm", *scene.sizes, cam.max_kernel_size);
  write_metadata(out, "simulate", cfg,
                 {{"camera", describe(cam)},
                  {"boundary", to_string(opts.boundary)},
                  {"noise_sigma", std::to_string(opts.noise_sigma)},
                  {"seed", std::to_string(opts.seed)}});
}

std::vector<CodeScore> cmd_eval_code(const Config& cfg) {
  const CameraConfig cam = camera_from(cfg);
  const auto paths = cfg.get_list("codes");
  if (paths.empty()) throw UsageError("eval-code needs at least one --code");
  const PriorSpectrum prior = prior_from(cfg);
  const auto scales = kl_scales_from(cfg, cam);
  const fs::path out = output_dir(cfg);

  std::vector<CodeScore> scores;
  for (size_t i = 0; i < paths.size(); ++i) {
    const ApertureCode code = code_from(paths[i]);
    CodeScore cs{paths[i], kl_report(code, scales, prior)};
    std::ostringstream name;
    name << "kl_" << i << '_' << fs::path(paths[i]).stem().string() << ".csv";
    auto f = open_out(out / name.str());
    write_kl_csv(f, cs.report);
    scores.push_back(std::move(cs));
  }
  std::vector<size_t> order(scores.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return scores[a].report.score_min > scores[b].report.score_min; });
  auto summary = open_out(out / "summary.csv");
  summary << "rank,code,score_min,score_mean\n";
  for (size_t r = 0; r < order.size(); ++r) {
    const auto& s = scores[order[r]];
    summary << r + 1 << ',' << s.name << ',' << s.report.score_min << ',' << s.report.score_mean << '\n';
  }
  write_metadata(out, "eval-code", cfg,
                 {{"prior", "gradient amplitude=" + cfg.get("kl.amplitude", "1") + " epsilon=" +
                                cfg.get("kl.epsilon", "1e-06") + " noise_sigma=" + cfg.get("kl.noise_sigma", "0.01")}});
  return scores;
}

EstimateOutcome cmd_estimate(const Config& cfg) {
  const CameraConfig cam = camera_from(cfg);
  const std::string method = cfg.get("method", "wiener");
  if (method != "wiener" && method != "cnn") throw UsageError("--method must be wiener or cnn");
  if (!cfg.has("image")) throw UsageError("estimate needs a coded image (--image)");
  if (method == "cnn" && !cfg.has("checkpoint")) throw UsageError("the cnn method needs --checkpoint");
  const GrayImage image = load_image(cfg.get("image", ""));
  const int stride = static_cast<int>(cfg.get_long("stride", 8));
  const int threads = static_cast<int>(cfg.get_long("threads", 1));
  const fs::path out = output_dir(cfg);

  EstimateOutcome outcome;
  std::vector<std::pair<std::string, std::string>> extra{{"camera", describe(cam)}, {"method", method}};
  if (method == "wiener") {
    const ApertureCode code = require_code(cfg);
    const WienerConfig wcfg = wiener_from(cfg, cam);
    const DepthEstimate est = estimate_depth_map_wiener(image, code, wcfg, stride, cam.max_kernel_size, threads);
    outcome.sizes = est.sizes;
    outcome.low_confidence_fraction = low_confidence_fraction(est.votes);
    auto csv = open_out(out / "residuals.csv");
    write_residual_csv(csv, wcfg, est);
    extra.emplace_back("wiener", describe(wcfg));
  } else {
    const TrainState state = load_checkpoint(cfg.get("checkpoint", ""));
    if (state.params.layout.spec.classes != cam.num_classes())
      throw InvalidConfiguration("checkpoint class count does not match the camera's kernel range");
    const CnnDepthEstimate est = estimate_depth_map_cnn(image, state.params, stride, threads);
    outcome.sizes = est.sizes;
    extra.emplace_back("network", state.params.layout.spec.describe());
  }
  save_size_map(out / "sizes.txt", outcome.sizes);
  save_size_map_pgm(out / "sizes.pgm", outcome.sizes, cam.max_kernel_size);

  auto metrics = open_out(out / "metrics.csv");
  metrics << "metric,value\n" << "low_confidence_fraction," << outcome.low_confidence_fraction << '\n';
  if (cfg.has("ground_truth")) {
    const BlurSizeMap truth = load_size_map(cfg.get("ground_truth", ""));
    outcome.metrics = depth_metrics(truth, outcome.sizes, cam.max_kernel_size);
    metrics << "accuracy," << outcome.metrics->accuracy << '\n';
    write_confusion(out / "confusion.csv", *outcome.metrics);
  }
  write_metadata(out, "estimate", cfg, extra);
  return outcome;
}

TrainResult cmd_train(const Config& cfg) {
  const CameraConfig cam = camera_from(cfg);
  const TrainConfig tcfg = train_from(cfg, cam);
  const fs::path out = output_dir(cfg);
  std::vector<Scene> scenes = scenes_from(cfg, cam);
  if (scenes.empty()) throw UsageError("train found no scenes");
  const SceneSplit parts = split(std::move(scenes), split_from(cfg));
  save_manifest(out / "train.txt", parts.train);
  save_manifest(out / "val.txt", parts.val);
  save_manifest(out / "test.txt", parts.test);
  const PatchSampler train_sampler(parts.train);
  const PatchSampler val_sampler(parts.val);
  if (train_sampler.empty()) throw UsageError("no training scene has a constant-blur patch");

  TrainState state = cfg.has("resume") ? load_checkpoint(cfg.get("resume", ""))
                                       : TrainState::initial(tcfg, schedule_from(cfg));
  if (cfg.has("resume") && state.seed != tcfg.seed)
    throw InvalidConfiguration("resume checkpoint seed differs from --seed");

  // Rows are written as they are produced so an interrupted or failed run
  // keeps its log. A resumed run appends.
  const bool append = cfg.has("resume") && fs::exists(out / "log.csv");
  std::ofstream log(out / "log.csv", append ? std::ios::app : std::ios::trunc);
  if (!log) throw IoError("cannot write training log");
  log << std::setprecision(std::numeric_limits<double>::max_digits10);
  if (!append) log << "iteration,alpha,loss,val_accuracy\n";
  const long stop_at = cfg.get_long("train.stop_at", -1);
  const bool verbose = cfg.get("verbose", "0") == "1";
  auto on_log = [&](const LogRow& row) {
    write_log_csv(log, {row}, false);
    log.flush();
    if (verbose)
      std::cerr << "iter " << row.iteration << " alpha " << row.alpha << " loss " << row.loss << " val "
                << row.val_accuracy << '\n';
  };

  TrainResult result = [&] {
    try {
      return train({&train_sampler, val_sampler.empty() ? nullptr : &val_sampler}, tcfg, std::move(state), stop_at, on_log);
    } catch (const DegenerateKernel& e) {
      throw DegenerateKernel(std::string("training failed: ") + e.what() + " (log retained)");
    }
  }();

  save_code(out / "code.txt", result.code);
  save_code(out / "code_soft.txt", soft_binarize(result.state.w, result.state.schedule.alpha(result.state.next_iteration)));
  save_checkpoint(out / "checkpoint.bin", result.state);

  const std::vector<TrainingSample> val =
      val_sampler.empty() ? std::vector<TrainingSample>{}
                          : draw_samples(val_sampler, tcfg.val_patches, derive_seed(tcfg.seed, 4), tcfg.noise_sigma);
  auto metrics = open_out(out / "final_metrics.csv");
  metrics << "metric,value\n"
          << "iterations_completed," << result.state.next_iteration << '\n'
          << "chance_accuracy," << 1.0 / cam.num_classes() << '\n';
  if (!val.empty()) {
    const double alpha = result.state.schedule.alpha(result.state.next_iteration);
    metrics << "val_accuracy_soft_code,"
            << patch_accuracy(val, soft_binarize(result.state.w, alpha), result.params, tcfg.threads) << '\n'
            << "val_accuracy_binary_code," << patch_accuracy(val, result.code, result.params, tcfg.threads) << '\n';
  }
  std::ostringstream sched;
  sched << "alpha_t = " << result.state.schedule.base << " + t / " << result.state.schedule.slope_inv;
  write_metadata(out, "train", cfg,
                 {{"camera", describe(cam)},
                  {"network", tcfg.network.describe()},
                  {"optimizer", to_string(tcfg.optimizer)},
                  {"schedule", sched.str()},
                  {"init", "W ~ U[-0.5, 0.5]; He-uniform weights, zero biases"},
                  {"training_blur", "cyclic"},
                  {"magnitude_delta", "1e-12"}});
  return result;
}

std::vector<CompareRow> cmd_compare(const Config& cfg) {
  const CameraConfig cam = camera_from(cfg);
  const auto pairs = cfg.get_list("pairs");
  if (pairs.size() < 2) throw UsageError("compare needs at least two code:method pairs (--pair)");
  if (!cfg.has("scenes")) throw UsageError("compare needs a scene directory (--scenes)");
  std::vector<Scene> scenes = load_scene_dir(cfg.get("scenes", ""));
  if (cfg.has("manifest")) {
    const auto ids = read_manifest(cfg.get("manifest", ""));
    std::vector<Scene> kept;
    for (const auto& id : ids)
      for (auto& s : scenes)
        if (s.id == id) kept.push_back(s);
    scenes = std::move(kept);
  }
  if (scenes.empty()) throw UsageError("compare: the scene set is empty");
  for (auto& s : scenes) discretize_scene(s, cam);

  const fs::path out = output_dir(cfg);
  const WienerConfig wcfg = wiener_from(cfg, cam);
  const PriorSpectrum prior = prior_from(cfg);
  const auto kl_scales = kl_scales_from(cfg, cam);
  const SimulationOptions base_sim = simulation_from(cfg);
  const int stride = static_cast<int>(cfg.get_long("stride", 8));
  const int threads = static_cast<int>(cfg.get_long("threads", 1));

  std::vector<CompareRow> rows;
  for (const auto& pair : pairs) {
    // CODE:METHOD[:CHECKPOINT]
    std::vector<std::string> f;
    std::stringstream ss(pair);
    std::string item;
    while (std::getline(ss, item, ':')) f.push_back(item);
    if (f.size() >= 2 && f[0] == "open" && !f[1].empty() && std::isdigit(static_cast<unsigned char>(f[1][0]))) {
      f[0] += ":" + f[1];
      f.erase(f.begin() + 1);
    }
    if (f.size() < 2 || f.size() > 3) throw UsageError("malformed pair (want CODE:METHOD[:CHECKPOINT]): " + pair);
    const ApertureCode code = code_from(f[0]);
    const std::string& method = f[1];
    if (method != "wiener" && method != "cnn") throw UsageError("unknown method in pair: " + pair);
    if (method == "cnn" && f.size() < 3) throw UsageError("cnn pair needs a checkpoint: " + pair);
    std::optional<TrainState> state;
    if (method == "cnn") state = load_checkpoint(f[2]);

    long correct = 0, total = 0;
    size_t low = 0, patches = 0;
    for (size_t i = 0; i < scenes.size(); ++i) {
      SimulationOptions sim = base_sim;
      sim.seed = derive_seed(base_sim.seed, i);
      const GrayImage coded = simulate_coded_image(scenes[i].image, *scenes[i].sizes, code, cam, sim);
      BlurSizeMap est;
      if (method == "wiener") {
        const DepthEstimate d = estimate_depth_map_wiener(coded, code, wcfg, stride, cam.max_kernel_size, threads);
        est = d.sizes;
        for (const auto& v : d.votes) low += !v.confident;
        patches += d.votes.size();
      } else {
        est = estimate_depth_map_cnn(coded, state->params, stride, threads).sizes;
      }
      const DepthMetrics m = depth_metrics(*scenes[i].sizes, est, cam.max_kernel_size);
      correct += m.confusion.trace();
      total += est.size();
    }
    CompareRow row;
    row.code = f[0];
    row.method = method;
    row.accuracy = static_cast<double>(correct) / static_cast<double>(total);
    row.score_min = kl_report(code, kl_scales, prior).score_min;
    row.low_confidence_fraction = patches ? static_cast<double>(low) / static_cast<double>(patches) : 0.0;
    rows.push_back(row);
  }
  auto csv = open_out(out / "compare.csv");
  csv << "code,method,accuracy,score_min,low_confidence_fraction\n";
  for (const auto& r : rows)
    csv << r.code << ',' << r.method << ',' << r.accuracy << ',' << r.score_min << ',' << r.low_confidence_fraction
        << '\n';
  write_metadata(out, "compare", cfg,
                 {{"camera", describe(cam)}, {"wiener", describe(wcfg)}, {"scenes", std::to_string(scenes.size())}});
  return rows;
}

void cmd_make_scenes(const Config& cfg) {
  const CameraConfig cam = camera_from(cfg);
  const fs::path out = output_dir(cfg);
  std::vector<Scene> scenes = make_corpus(corpus_from(cfg), cam);
  for (const auto& s : scenes) save_scene(out, s);
  const auto parts = split_indices(scenes.size(), split_from(cfg));
  const char* names[3] = {"train.txt", "val.txt", "test.txt"};
  for (int k = 0; k < 3; ++k) {
    auto f = open_out(out / names[k]);
    for (size_t i : parts[k]) f << scenes[i].id << '\n';
  }
  write_metadata(out, "make-scenes", cfg, {{"camera", describe(cam)}, {"count", std::to_string(scenes.size())}});
}

}  // namespace cadepth::cli
