#pragma once

#include "cadepth/data_io.hpp"
#include "cadepth/fusion.hpp"
#include "cadepth/network.hpp"
#include "cadepth/optics.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <vector>

namespace cadepth {

// alpha_t = base + t / slope_inv
struct AnnealSchedule {
  double base = 2.5;
  double slope_inv = 3000.0;

  double alpha(long iteration) const { return base + static_cast<double>(iteration) / slope_inv; }
};

// C = 1 / (1 + exp(-alpha W)), elementwise.
ApertureCode soft_binarize(const Grid& w, double alpha);

// Entries >= threshold become 1, the rest 0. Throws DegenerateKernel when
// nothing survives.
ApertureCode hard_binarize(const ApertureCode& code, double threshold = 0.5);

// Network input for a patch spectrum: zero-frequency-centered
// log(1 + sqrt(|F|^2 + delta)).
inline constexpr double kMagnitudeDelta = 1e-12;
Grid network_feature(const CGrid& spectrum);

struct TrainingSample {
  Grid patch;  // all-focus
  int size = 1;
  Grid noise;  // additive sensor noise after blur; empty for none
};

struct LossAndGradients {
  double loss = 0.0;
  Grid grad_code;               // d loss / d W
  Eigen::VectorXd grad_params;  // d loss / d network parameters
};

// Mean cross-entropy of the blur-size classifier over the batch, with
// gradients through the whole image-formation chain:
//   W -> sigmoid(alpha W) -> area resample -> unit-sum normalize
//     -> cyclic blur of each patch -> + noise -> log-magnitude spectrum
//     -> network -> log-softmax.
// `chunk` fixes the reduction tree (samples are accumulated in chunks of
// this size, chunks summed in order), so results are bitwise independent
// of `threads`.
LossAndGradients loss_and_gradients(const std::vector<TrainingSample>& batch, const Grid& w, double alpha,
                                    const NetworkParams& params, int threads = 1, int chunk = 16);

// Network inputs (pixels x batch) for a batch under the relaxed code.
Eigen::MatrixXd batch_features(const std::vector<TrainingSample>& batch, const Grid& w, double alpha);

// Loss only, same chain.
double batch_loss(const std::vector<TrainingSample>& batch, const Grid& w, double alpha,
                  const NetworkParams& params);

enum class Optimizer { sgd, adam };
Optimizer parse_optimizer(const std::string& name);
const char* to_string(Optimizer o);

struct TrainConfig {
  int batch_size = 128;
  long iterations = 10000;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  Optimizer optimizer = Optimizer::adam;
  double binarize_threshold = 0.5;
  double noise_sigma = 0.0;
  int code_side = 11;
  NetworkSpec network;
  long log_every = 100;
  int val_patches = 512;
  int threads = 1;
  int chunk = 16;

  void validate() const;
};

struct LogRow {
  long iteration = 0;
  double alpha = 0.0;
  double loss = 0.0;
  double val_accuracy = 0.0;
};

void write_log_csv(std::ostream& out, const std::vector<LogRow>& rows, bool header = true);

// Resumable optimizer state.
struct TrainState {
  long next_iteration = 0;
  std::uint64_t seed = 0;
  AnnealSchedule schedule;
  Optimizer optimizer = Optimizer::adam;
  double learning_rate = 1e-3;
  Grid w;
  NetworkParams params{NetworkSpec{}};
  // Adam moments; empty under SGD.
  Eigen::VectorXd m_code, v_code, m_params, v_params;

  static TrainState initial(const TrainConfig& cfg, const AnnealSchedule& schedule);
};

// Versioned little-endian binary container.
void save_checkpoint(const std::filesystem::path& path, const TrainState& state);
TrainState load_checkpoint(const std::filesystem::path& path);

struct TrainData {
  const PatchSampler* train = nullptr;
  const PatchSampler* val = nullptr;  // optional
};

struct TrainResult {
  ApertureCode code;
  NetworkParams params;
  std::vector<LogRow> log;
  TrainState state;
};

// Runs optimizer steps from state.next_iteration up to cfg.iterations
// (or stop_at, if smaller), then binarizes the code. Batch contents and
// noise for iteration t derive only from (seed, t), so a resumed run is
// identical to an uninterrupted one.
TrainResult train(const TrainData& data, const TrainConfig& cfg, TrainState state, long stop_at = -1,
                  const std::function<void(const LogRow&)>& on_log = {});

TrainResult train(const TrainData& data, const TrainConfig& cfg, const AnnealSchedule& schedule = {});

// Fraction of samples whose argmax class matches, with the given code held
// fixed (continuous or binary).
double patch_accuracy(const std::vector<TrainingSample>& samples, const ApertureCode& code,
                      const NetworkParams& params, int threads = 1);

// Fixed evaluation set drawn from a sampler.
std::vector<TrainingSample> draw_samples(const PatchSampler& sampler, int count, std::uint64_t seed,
                                         double noise_sigma = 0.0);

struct CnnDepthEstimate {
  BlurSizeMap sizes;
  std::vector<PatchVote> votes;
};

// Classifies every stride-offset patch of a coded image and fuses the
// decisions with the same vote rule as the Wiener estimator.
CnnDepthEstimate estimate_depth_map_cnn(const GrayImage& image, const NetworkParams& params, int stride = 8,
                                        int threads = 1);

}  // namespace cadepth
