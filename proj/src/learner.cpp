#include "cadepth/learner.hpp"

#include "cadepth/errors.hpp"
#include "cadepth/fft.hpp"
#include "cadepth/parallel.hpp"
#include "cadepth/simulator.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

namespace cadepth {

ApertureCode soft_binarize(const Grid& w, double alpha) {
  if (!(alpha > 0.0)) throw InvalidArgument("sigmoid steepness must be positive");
  return ApertureCode(1.0 / (1.0 + (-alpha * w).exp()));
}

ApertureCode hard_binarize(const ApertureCode& code, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw InvalidArgument("binarize threshold must lie in (0,1)");
  Grid bin = (code.values() >= threshold).cast<double>();
  if (!(bin.maxCoeff() > 0.0)) throw DegenerateKernel("binarized code is fully opaque");
  return ApertureCode(std::move(bin));
}

Grid network_feature(const CGrid& spectrum) {
  return fft::fftshift(Grid((spectrum.abs2() + kMagnitudeDelta).sqrt().log1p()));
}

namespace {

constexpr int P = kPatchSize;

// Per-scale blur kernels of the current relaxed code.
struct CodeForward {
  Grid code;                   // sigmoid(alpha W)
  std::map<int, Grid> resampled;  // pre-normalization
  std::map<int, double> mass;
  std::map<int, Grid> kernel;
  std::map<int, CGrid> transfer;
};

CodeForward code_forward(const Grid& w, double alpha, const std::vector<TrainingSample>& batch) {
  CodeForward cf;
  cf.code = 1.0 / (1.0 + (-alpha * w).exp());
  for (const auto& s : batch) {
    if (cf.kernel.count(s.size)) continue;
    if (s.size < 1 || s.size % 2 == 0 || s.size > P) throw InvalidArgument("training label is not a valid size");
    Grid r = resample(cf.code, s.size);
    const double mass = r.sum();
    if (!(mass > 0.0)) {
      std::ostringstream msg;
      msg << "training step: degenerate kernel at size " << s.size << " (alpha=" << alpha
          << ", W range [" << w.minCoeff() << ", " << w.maxCoeff() << "])";
      throw DegenerateKernel(msg.str());
    }
    Grid k = r / mass;
    cf.transfer[s.size] = fft::kernel_transfer(k, P, P);
    cf.resampled[s.size] = std::move(r);
    cf.mass[s.size] = mass;
    cf.kernel[s.size] = std::move(k);
  }
  return cf;
}

CGrid observed_spectrum(const TrainingSample& s, const CGrid& transfer, const CGrid& patch_spectrum) {
  CGrid f = transfer * patch_spectrum;
  if (s.noise.size()) f += fft::forward(s.noise);
  return f;
}

void check_sample(const TrainingSample& s) {
  if (s.patch.rows() != P || s.patch.cols() != P) throw InvalidArgument("training patch must be 32x32");
  if (s.noise.size() && (s.noise.rows() != P || s.noise.cols() != P))
    throw InvalidArgument("training noise field must match the patch");
}

struct ChunkResult {
  double loss = 0.0;
  Eigen::VectorXd grad;
  std::map<int, CGrid> transfer_grad;
};

}  // namespace

LossAndGradients loss_and_gradients(const std::vector<TrainingSample>& batch, const Grid& w, double alpha,
                                    const NetworkParams& params, int threads, int chunk) {
  if (batch.empty()) throw InvalidArgument("empty training batch");
  if (chunk < 1) throw InvalidArgument("chunk size must be positive");
  if (!(alpha > 0.0)) throw InvalidArgument("sigmoid steepness must be positive");
  if (params.layout.spec.input_size != P) throw InvalidConfiguration("network input must be 32x32");
  const int classes = params.layout.spec.classes;
  for (const auto& s : batch) {
    check_sample(s);
    if (s.size > 2 * classes - 1) throw InvalidArgument("training label outside the class set");
  }
  const CodeForward cf = code_forward(w, alpha, batch);
  const double inv_batch = 1.0 / static_cast<double>(batch.size());

  const size_t nchunks = (batch.size() + chunk - 1) / chunk;
  std::vector<ChunkResult> parts(nchunks);
  parallel_for(nchunks, threads, [&](size_t ci) {
    const size_t lo = ci * chunk;
    const size_t hi = std::min(batch.size(), lo + chunk);
    const auto n = static_cast<Eigen::Index>(hi - lo);
    std::vector<CGrid> patch_spectra(n), spectra(n);
    Eigen::MatrixXd inputs(P * P, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const TrainingSample& s = batch[lo + j];
      patch_spectra[j] = fft::forward(s.patch);
      spectra[j] = observed_spectrum(s, cf.transfer.at(s.size), patch_spectra[j]);
      const Grid feat = network_feature(spectra[j]);
      inputs.col(j) = Eigen::Map<const Eigen::VectorXd>(feat.data(), feat.size());
    }
    const ForwardTrace trace = forward_trace(params, inputs);
    Eigen::MatrixXd grad_lp = Eigen::MatrixXd::Zero(classes, n);
    ChunkResult& out = parts[ci];
    for (Eigen::Index j = 0; j < n; ++j) {
      const int cls = size_to_class(batch[lo + j].size);
      out.loss -= trace.log_probs(cls, j);
      grad_lp(cls, j) = -inv_batch;
    }
    out.grad = Eigen::VectorXd::Zero(params.layout.size);
    Eigen::MatrixXd input_grad;
    backward(params, inputs, trace, grad_lp, out.grad, &input_grad);

    for (Eigen::Index j = 0; j < n; ++j) {
      const TrainingSample& s = batch[lo + j];
      // Undo fftshift on the feature gradient.
      const Eigen::Map<const Grid> shifted(input_grad.col(j).data(), P, P);
      const CGrid& f = spectra[j];
      CGrid grad_f(P, P);
      for (int r = 0; r < P; ++r)
        for (int c = 0; c < P; ++c) {
          const std::complex<double> z = f(r, c);
          const double m = std::sqrt(std::norm(z) + kMagnitudeDelta);
          const double g = shifted((r + P / 2) % P, (c + P / 2) % P) / ((1.0 + m) * m);
          grad_f(r, c) = g * z;
        }
      CGrid contrib = grad_f * patch_spectra[j].conjugate();
      auto it = out.transfer_grad.find(s.size);
      if (it == out.transfer_grad.end())
        out.transfer_grad.emplace(s.size, std::move(contrib));
      else
        it->second += contrib;
    }
  });

  LossAndGradients result;
  result.grad_params = Eigen::VectorXd::Zero(params.layout.size);
  std::map<int, CGrid> transfer_grad;
  double loss = 0.0;
  for (auto& part : parts) {
    loss += part.loss;
    result.grad_params += part.grad;
    for (auto& [s, g] : part.transfer_grad) {
      auto it = transfer_grad.find(s);
      if (it == transfer_grad.end())
        transfer_grad.emplace(s, std::move(g));
      else
        it->second += g;
    }
  }
  result.loss = loss * inv_batch;

  const int n = static_cast<int>(w.rows());
  Grid grad_code = Grid::Zero(n, n);
  for (const auto& [s, g_transfer] : transfer_grad) {
    // d loss / d embedded kernel = Re(unnormalized inverse DFT of the
    // transfer-function gradient).
    const Grid g_embedded = fft::inverse(g_transfer).real();
    const Grid& k = cf.kernel.at(s);
    const int c = s / 2;
    Grid g_kernel(s, s);
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j) g_kernel(i, j) = g_embedded(wrap_index(i - c, P), wrap_index(j - c, P));
    // K = R / sum(R)
    const Grid g_resampled = (g_kernel - (g_kernel * k).sum()) / cf.mass.at(s);
    const Eigen::MatrixXd a = area_resample_matrix(n, s);
    grad_code += (a.transpose() * g_resampled.matrix() * a).array();
  }
  result.grad_code = grad_code * alpha * cf.code * (1.0 - cf.code);
  return result;
}

Eigen::MatrixXd batch_features(const std::vector<TrainingSample>& batch, const Grid& w, double alpha) {
  const CodeForward cf = code_forward(w, alpha, batch);
  Eigen::MatrixXd inputs(P * P, static_cast<Eigen::Index>(batch.size()));
  for (size_t j = 0; j < batch.size(); ++j) {
    check_sample(batch[j]);
    const Grid feat =
        network_feature(observed_spectrum(batch[j], cf.transfer.at(batch[j].size), fft::forward(batch[j].patch)));
    inputs.col(static_cast<Eigen::Index>(j)) = Eigen::Map<const Eigen::VectorXd>(feat.data(), feat.size());
  }
  return inputs;
}

double batch_loss(const std::vector<TrainingSample>& batch, const Grid& w, double alpha,
                  const NetworkParams& params) {
  const Eigen::MatrixXd lp = forward(params, batch_features(batch, w, alpha));
  double loss = 0.0;
  for (size_t j = 0; j < batch.size(); ++j) loss -= lp(static_cast<Eigen::Index>(j), size_to_class(batch[j].size));
  return loss / static_cast<double>(batch.size());
}

Optimizer parse_optimizer(const std::string& name) {
  if (name == "adam") return Optimizer::adam;
  if (name == "sgd") return Optimizer::sgd;
  throw InvalidConfiguration("unknown optimizer: " + name);
}

const char* to_string(Optimizer o) { return o == Optimizer::adam ? "adam" : "sgd"; }

void TrainConfig::validate() const {
  if (batch_size < 1) throw InvalidConfiguration("train: batch size must be >= 1");
  if (iterations < 0) throw InvalidConfiguration("train: iterations must be >= 0");
  if (!(learning_rate > 0.0)) throw InvalidConfiguration("train: learning rate must be positive");
  if (!(binarize_threshold > 0.0 && binarize_threshold < 1.0))
    throw InvalidConfiguration("train: binarize threshold must lie in (0,1)");
  if (!(noise_sigma >= 0.0)) throw InvalidConfiguration("train: noise sigma must be >= 0");
  if (code_side < 1 || code_side % 2 == 0) throw InvalidConfiguration("train: code side must be odd");
  if (log_every < 1) throw InvalidConfiguration("train: log interval must be >= 1");
  if (chunk < 1) throw InvalidConfiguration("train: chunk must be >= 1");
  network.validate();
}

void write_log_csv(std::ostream& out, const std::vector<LogRow>& rows, bool header) {
  if (header) out << "iteration,alpha,loss,val_accuracy\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& r : rows) out << r.iteration << ',' << r.alpha << ',' << r.loss << ',' << r.val_accuracy << '\n';
}

namespace {

enum SeedStream : std::uint64_t { kCodeInit = 1, kNetInit = 2, kBatches = 3, kValidation = 4, kNoise = 5 };

Grid noise_field(std::uint64_t seed, double sigma) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, sigma);
  Grid g(P, P);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = dist(rng);
  return g;
}

}  // namespace

TrainState TrainState::initial(const TrainConfig& cfg, const AnnealSchedule& schedule) {
  cfg.validate();
  TrainState st;
  st.seed = cfg.seed;
  st.schedule = schedule;
  st.optimizer = cfg.optimizer;
  st.learning_rate = cfg.learning_rate;
  std::mt19937_64 rng(derive_seed(cfg.seed, kCodeInit));
  std::uniform_real_distribution<double> init(-0.5, 0.5);
  st.w.resize(cfg.code_side, cfg.code_side);
  for (Eigen::Index i = 0; i < st.w.size(); ++i) st.w.data()[i] = init(rng);
  st.params = NetworkParams::initialize(cfg.network, derive_seed(cfg.seed, kNetInit));
  if (cfg.optimizer == Optimizer::adam) {
    st.m_code = st.v_code = Eigen::VectorXd::Zero(st.w.size());
    st.m_params = st.v_params = Eigen::VectorXd::Zero(st.params.values.size());
  }
  return st;
}

std::vector<TrainingSample> draw_samples(const PatchSampler& sampler, int count, std::uint64_t seed,
                                         double noise_sigma) {
  PatchLabelStream stream(sampler, seed);
  std::vector<TrainingSample> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    LabeledPatch lp = stream.next();
    TrainingSample s{std::move(lp.patch), lp.size, {}};
    if (noise_sigma > 0) s.noise = noise_field(derive_seed(seed ^ kNoise, static_cast<std::uint64_t>(i)), noise_sigma);
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

std::vector<int> predict_classes(const Eigen::MatrixXd& inputs, const NetworkParams& params, int threads) {
  const Eigen::Index n = inputs.cols();
  constexpr Eigen::Index chunk = 64;
  const size_t nchunks = static_cast<size_t>((n + chunk - 1) / chunk);
  std::vector<int> out(n);
  parallel_for(nchunks, threads, [&](size_t ci) {
    const Eigen::Index lo = static_cast<Eigen::Index>(ci) * chunk;
    const Eigen::Index len = std::min(chunk, n - lo);
    const Eigen::MatrixXd lp = forward(params, inputs.middleCols(lo, len));
    for (Eigen::Index j = 0; j < len; ++j) {
      Eigen::Index best = 0;
      lp.row(j).maxCoeff(&best);
      out[lo + j] = static_cast<int>(best);
    }
  });
  return out;
}

void adam_update(Eigen::Ref<Eigen::VectorXd> x, const Eigen::VectorXd& g, Eigen::VectorXd& m, Eigen::VectorXd& v,
                 double lr, long step) {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  m = b1 * m + (1 - b1) * g;
  v = b2 * v + (1 - b2) * g.cwiseProduct(g);
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
  x.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
}

}  // namespace

double patch_accuracy(const std::vector<TrainingSample>& samples, const ApertureCode& code,
                      const NetworkParams& params, int threads) {
  if (samples.empty()) return 0.0;
  std::map<int, CGrid> transfers;
  for (const auto& s : samples)
    if (!transfers.count(s.size)) transfers[s.size] = fft::kernel_transfer(scale_code(code, s.size).values, P, P);
  Eigen::MatrixXd inputs(P * P, static_cast<Eigen::Index>(samples.size()));
  for (size_t j = 0; j < samples.size(); ++j) {
    const Grid feat =
        network_feature(observed_spectrum(samples[j], transfers.at(samples[j].size), fft::forward(samples[j].patch)));
    inputs.col(static_cast<Eigen::Index>(j)) = Eigen::Map<const Eigen::VectorXd>(feat.data(), feat.size());
  }
  const auto pred = predict_classes(inputs, params, threads);
  size_t correct = 0;
  for (size_t j = 0; j < samples.size(); ++j) correct += pred[j] == size_to_class(samples[j].size);
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

TrainResult train(const TrainData& data, const TrainConfig& cfg, TrainState state, long stop_at,
                  const std::function<void(const LogRow&)>& on_log) {
  cfg.validate();
  if (!data.train) throw InvalidArgument("train: no training sampler");
  if (state.w.rows() != cfg.code_side) throw InvalidConfiguration("train: state code side differs from config");
  if (!(state.params.layout.spec == cfg.network)) throw InvalidConfiguration("train: state network differs from config");
  const long end = stop_at >= 0 ? std::min(stop_at, cfg.iterations) : cfg.iterations;
  const auto batch_seed = derive_seed(state.seed, kBatches);
  const auto noise_seed = derive_seed(state.seed, kNoise);

  std::vector<TrainingSample> val;
  if (data.val && !data.val->empty() && cfg.val_patches > 0)
    val = draw_samples(*data.val, cfg.val_patches, derive_seed(state.seed, kValidation), cfg.noise_sigma);

  TrainResult result{ApertureCode::open(cfg.code_side), state.params, {}, state};
  TrainState& st = result.state;
  if (st.optimizer == Optimizer::adam && st.m_code.size() != st.w.size()) {
    st.m_code = st.v_code = Eigen::VectorXd::Zero(st.w.size());
    st.m_params = st.v_params = Eigen::VectorXd::Zero(st.params.values.size());
  }
  for (long t = st.next_iteration; t < end; ++t) {
    const double alpha = st.schedule.alpha(t);
    PatchLabelStream stream(*data.train, derive_seed(batch_seed, static_cast<std::uint64_t>(t)));
    std::vector<TrainingSample> batch;
    batch.reserve(cfg.batch_size);
    for (int i = 0; i < cfg.batch_size; ++i) {
      LabeledPatch lp = stream.next();
      TrainingSample s{std::move(lp.patch), lp.size, {}};
      if (cfg.noise_sigma > 0)
        s.noise = noise_field(derive_seed(noise_seed, static_cast<std::uint64_t>(t) * cfg.batch_size + i),
                              cfg.noise_sigma);
      batch.push_back(std::move(s));
    }
    const LossAndGradients lg = loss_and_gradients(batch, st.w, alpha, st.params, cfg.threads, cfg.chunk);
    const Eigen::Map<const Eigen::VectorXd> g_code(lg.grad_code.data(), lg.grad_code.size());
    Eigen::Map<Eigen::VectorXd> w_flat(st.w.data(), st.w.size());
    if (st.optimizer == Optimizer::adam) {
      adam_update(w_flat, g_code, st.m_code, st.v_code, st.learning_rate, t + 1);
      adam_update(st.params.values, lg.grad_params, st.m_params, st.v_params, st.learning_rate, t + 1);
    } else {
      w_flat -= st.learning_rate * g_code;
      st.params.values -= st.learning_rate * lg.grad_params;
    }
    st.next_iteration = t + 1;

    if ((t + 1) % cfg.log_every == 0 || t + 1 == cfg.iterations) {
      LogRow row{t, alpha, lg.loss, std::numeric_limits<double>::quiet_NaN()};
      if (!val.empty()) row.val_accuracy = patch_accuracy(val, soft_binarize(st.w, alpha), st.params, cfg.threads);
      result.log.push_back(row);
      if (on_log) on_log(row);
    }
  }
  result.params = st.params;
  result.code = hard_binarize(soft_binarize(st.w, st.schedule.alpha(st.next_iteration)), cfg.binarize_threshold);
  return result;
}

TrainResult train(const TrainData& data, const TrainConfig& cfg, const AnnealSchedule& schedule) {
  return train(data, cfg, TrainState::initial(cfg, schedule));
}

// ---- checkpoints ----

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint format assumes a little-endian host");

constexpr char kMagic[8] = {'C', 'A', 'D', 'E', 'P', 'T', 'H', 'K'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw IoError("checkpoint truncated");
  return v;
}

void put_vector(std::ostream& out, const double* data, Eigen::Index n) {
  put<std::uint64_t>(out, static_cast<std::uint64_t>(n));
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
}

Eigen::VectorXd get_vector(std::istream& in) {
  const auto n = get<std::uint64_t>(in);
  if (n > (1ULL << 32)) throw IoError("checkpoint array length is implausible");
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw IoError("checkpoint truncated");
  return v;
}

void put_ints(std::ostream& out, const std::vector<int>& v) {
  put<std::int32_t>(out, static_cast<std::int32_t>(v.size()));
  for (int x : v) put<std::int32_t>(out, x);
}

std::vector<int> get_ints(std::istream& in) {
  const auto n = get<std::int32_t>(in);
  if (n < 0 || n > 64) throw IoError("checkpoint layer count is implausible");
  std::vector<int> v(n);
  for (auto& x : v) x = get<std::int32_t>(in);
  return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const TrainState& st) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint: " + path.string());
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kVersion);
  put<std::int64_t>(out, st.next_iteration);
  put<std::uint64_t>(out, st.seed);
  put<double>(out, st.schedule.base);
  put<double>(out, st.schedule.slope_inv);
  put<std::int32_t>(out, static_cast<std::int32_t>(st.optimizer));
  put<double>(out, st.learning_rate);
  const NetworkSpec& spec = st.params.layout.spec;
  put<std::int32_t>(out, spec.input_size);
  put_ints(out, spec.conv_channels);
  put_ints(out, spec.fc_widths);
  put<std::int32_t>(out, spec.classes);
  put<std::int32_t>(out, static_cast<std::int32_t>(st.w.rows()));
  put_vector(out, st.w.data(), st.w.size());
  put_vector(out, st.params.values.data(), st.params.values.size());
  for (const auto* v : {&st.m_code, &st.v_code, &st.m_params, &st.v_params}) put_vector(out, v->data(), v->size());
  if (!out) throw IoError("checkpoint write failed: " + path.string());
}

TrainState load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || !std::equal(magic, magic + 8, kMagic)) throw IoError(path.string() + ": not a checkpoint");
  if (get<std::uint32_t>(in) != kVersion) throw IoError(path.string() + ": unsupported checkpoint version");
  TrainState st;
  st.next_iteration = get<std::int64_t>(in);
  st.seed = get<std::uint64_t>(in);
  st.schedule.base = get<double>(in);
  st.schedule.slope_inv = get<double>(in);
  st.optimizer = static_cast<Optimizer>(get<std::int32_t>(in));
  st.learning_rate = get<double>(in);
  NetworkSpec spec;
  spec.input_size = get<std::int32_t>(in);
  spec.conv_channels = get_ints(in);
  spec.fc_widths = get_ints(in);
  spec.classes = get<std::int32_t>(in);
  const int side = get<std::int32_t>(in);
  const Eigen::VectorXd w = get_vector(in);
  if (side < 1 || w.size() != static_cast<Eigen::Index>(side) * side) throw IoError("checkpoint code size mismatch");
  st.w = Eigen::Map<const Grid>(w.data(), side, side);
  st.params = NetworkParams(spec);
  const Eigen::VectorXd values = get_vector(in);
  if (values.size() != st.params.layout.size) throw IoError("checkpoint parameter count mismatch");
  st.params.values = values;
  st.m_code = get_vector(in);
  st.v_code = get_vector(in);
  st.m_params = get_vector(in);
  st.v_params = get_vector(in);
  return st;
}

CnnDepthEstimate estimate_depth_map_cnn(const GrayImage& image, const NetworkParams& params, int stride,
                                        int threads) {
  if (image.rows() < P || image.cols() < P) throw InvalidArgument("image smaller than the patch size");
  const auto patches = extract_patches(image, stride);
  Eigen::MatrixXd inputs(P * P, static_cast<Eigen::Index>(patches.size()));
  for (size_t j = 0; j < patches.size(); ++j) {
    const Grid feat = network_feature(fft::forward(patches[j].patch));
    inputs.col(static_cast<Eigen::Index>(j)) = Eigen::Map<const Eigen::VectorXd>(feat.data(), feat.size());
  }
  const auto pred = predict_classes(inputs, params, threads);
  CnnDepthEstimate out;
  for (size_t j = 0; j < patches.size(); ++j)
    out.votes.push_back({patches[j].row, patches[j].col, class_to_size(pred[j]), true});
  const int max_size = 2 * params.layout.spec.classes - 1;
  out.sizes = fuse_votes(static_cast<int>(image.rows()), static_cast<int>(image.cols()), P, out.votes, max_size);
  return out;
}

}  // namespace cadepth
