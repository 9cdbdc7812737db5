#include "cadepth/config.hpp"

#include "cadepth/errors.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace cadepth {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const auto t = trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size())
    throw InvalidConfiguration("config: '" + key + "' is not a valid number: " + text);
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

Config Config::parse(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidConfiguration("config line " + std::to_string(lineno) + ": expected key = value");
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void Config::set(const std::string& key, const std::string& value) {
  if (key.empty()) throw InvalidConfiguration("config: empty key");
  values_[key] = value;
}

void Config::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw InvalidConfiguration("expected key=value, got: " + assignment);
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::string Config::get(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::string Config::require(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end() || it->second.empty()) throw InvalidConfiguration("missing required setting: " + key);
  return it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? parse_number<double>(key, values_.at(key)) : fallback;
}

long Config::get_long(const std::string& key, long fallback) const {
  return has(key) ? parse_number<long>(key, values_.at(key)) : fallback;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
  return has(key) ? parse_number<std::uint64_t>(key, values_.at(key)) : fallback;
}

std::vector<int> Config::get_ints(const std::string& key, const std::vector<int>& fallback) const {
  if (!has(key)) return fallback;
  std::vector<int> out;
  for (const auto& item : split_list(values_.at(key))) out.push_back(parse_number<int>(key, item));
  return out;
}

std::vector<double> Config::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
  if (!has(key)) return fallback;
  std::vector<double> out;
  for (const auto& item : split_list(values_.at(key))) out.push_back(parse_number<double>(key, item));
  return out;
}

std::vector<std::string> Config::get_list(const std::string& key) const {
  return has(key) ? split_list(values_.at(key)) : std::vector<std::string>{};
}

std::string Config::dump() const {
  std::ostringstream out;
  for (const auto& [k, v] : values_) out << k << " = " << v << '\n';
  return out.str();
}

CameraConfig camera_from(const Config& cfg) {
  CameraConfig cam;
  cam.focal_length_mm = cfg.get_double("camera.focal_length_mm", cam.focal_length_mm);
  cam.pixel_pitch_um = cfg.get_double("camera.pixel_pitch_um", cam.pixel_pitch_um);
  cam.f_number = cfg.get_double("camera.f_number", cam.f_number);
  cam.focus_distance_m = cfg.get_double("camera.focus_distance_m", cam.focus_distance_m);
  cam.max_kernel_size = static_cast<int>(cfg.get_long("camera.max_kernel_size", cam.max_kernel_size));
  cam.validate();
  return cam;
}

SimulationOptions simulation_from(const Config& cfg) {
  SimulationOptions opts;
  opts.boundary = parse_boundary(cfg.get("sim.boundary", "reflect"));
  opts.noise_sigma = cfg.get_double("sim.noise_sigma", 0.0);
  if (!(opts.noise_sigma >= 0.0)) throw InvalidConfiguration("sim.noise_sigma must be >= 0");
  opts.seed = cfg.get_u64("seed", 0);
  return opts;
}

WienerConfig wiener_from(const Config& cfg, const CameraConfig& cam) {
  WienerConfig w;
  w.nsr = cfg.get_double("wiener.nsr", w.nsr);
  w.scales = cfg.get_ints("wiener.scales", all_sizes(cam.max_kernel_size));
  w.boundary = parse_deconv_boundary(cfg.get("wiener.boundary", to_string(w.boundary)));
  w.texture_floor = cfg.get_double("wiener.texture_floor", w.texture_floor);
  w.validate(cam.max_kernel_size);
  return w;
}

PriorSpectrum prior_from(const Config& cfg) {
  return PriorSpectrum::gradient_prior(kPatchSize, cfg.get_double("kl.amplitude", 1.0),
                                       cfg.get_double("kl.epsilon", 1e-6), cfg.get_double("kl.noise_sigma", 0.01));
}

std::vector<int> kl_scales_from(const Config& cfg, const CameraConfig& cam) {
  return cfg.get_ints("kl.scales", all_sizes(cam.max_kernel_size));
}

TrainConfig train_from(const Config& cfg, const CameraConfig& cam) {
  TrainConfig t;
  t.batch_size = static_cast<int>(cfg.get_long("train.batch_size", t.batch_size));
  t.iterations = cfg.get_long("train.iterations", t.iterations);
  t.learning_rate = cfg.get_double("train.learning_rate", t.learning_rate);
  t.seed = cfg.get_u64("seed", 0);
  t.optimizer = parse_optimizer(cfg.get("train.optimizer", "adam"));
  t.binarize_threshold = cfg.get_double("train.threshold", t.binarize_threshold);
  t.noise_sigma = cfg.get_double("train.noise_sigma", t.noise_sigma);
  t.code_side = static_cast<int>(cfg.get_long("train.code_side", t.code_side));
  t.log_every = cfg.get_long("train.log_every", t.log_every);
  t.val_patches = static_cast<int>(cfg.get_long("train.val_patches", t.val_patches));
  t.threads = static_cast<int>(cfg.get_long("threads", 1));
  t.network.conv_channels = cfg.get_ints("network.conv", t.network.conv_channels);
  t.network.fc_widths = cfg.get_ints("network.fc", t.network.fc_widths);
  t.network.classes = cam.num_classes();
  t.validate();
  return t;
}

AnnealSchedule schedule_from(const Config& cfg) {
  AnnealSchedule s;
  s.base = cfg.get_double("anneal.base", s.base);
  s.slope_inv = cfg.get_double("anneal.slope_inv", s.slope_inv);
  if (!(s.slope_inv > 0.0) || !(s.base > 0.0)) throw InvalidConfiguration("anneal: base and slope_inv must be positive");
  return s;
}

CorpusSpec corpus_from(const Config& cfg) {
  CorpusSpec c;
  c.count = static_cast<int>(cfg.get_long("corpus.count", c.count));
  c.height = static_cast<int>(cfg.get_long("corpus.height", c.height));
  c.width = static_cast<int>(cfg.get_long("corpus.width", c.width));
  c.min_planes = static_cast<int>(cfg.get_long("corpus.min_planes", c.min_planes));
  c.max_planes = static_cast<int>(cfg.get_long("corpus.max_planes", c.max_planes));
  if (cfg.has("corpus.textures")) {
    c.textures.clear();
    for (const auto& t : cfg.get_list("corpus.textures")) c.textures.push_back(parse_texture(t));
  }
  c.seed = cfg.get_u64("corpus.seed", cfg.get_u64("seed", 0));
  return c;
}

SplitSpec split_from(const Config& cfg) {
  SplitSpec s;
  s.train = cfg.get_double("split.train", s.train);
  s.val = cfg.get_double("split.val", s.val);
  s.test = cfg.get_double("split.test", s.test);
  s.seed = cfg.get_u64("split.seed", cfg.get_u64("seed", 0));
  s.validate();
  return s;
}

ApertureCode code_from(const std::string& spec) {
  if (spec == "open") return ApertureCode::open(11);
  if (spec.rfind("open:", 0) == 0) {
    const int n = parse_number<int>("code", spec.substr(5));
    if (n < 1 || n % 2 == 0) throw InvalidConfiguration("open aperture side must be odd");
    return ApertureCode::open(n);
  }
  return load_code(spec);
}

}  // namespace cadepth
