#pragma once

#include "cadepth/config.hpp"
#include "cadepth/errors.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cadepth::cli {

// Bad invocation: missing inputs or flags. Maps to exit code 1.
class UsageError : public Error {
 public:
  using Error::Error;
};

// 0 success, 1 usage/configuration error, 2 runtime or numerical failure.
int exit_code_for(const std::exception& e);

void cmd_simulate(const Config& cfg);

struct CodeScore {
  std::string name;
  KLReport report;
};
std::vector<CodeScore> cmd_eval_code(const Config& cfg);

struct DepthMetrics {
  double accuracy = 0.0;
  Eigen::MatrixXi confusion;  // true class x predicted class
};

struct EstimateOutcome {
  BlurSizeMap sizes;
  std::optional<DepthMetrics> metrics;
  double low_confidence_fraction = 0.0;
};
EstimateOutcome cmd_estimate(const Config& cfg);

TrainResult cmd_train(const Config& cfg);

struct CompareRow {
  std::string code;
  std::string method;
  double accuracy = 0.0;
  double score_min = 0.0;
  double low_confidence_fraction = 0.0;
};
std::vector<CompareRow> cmd_compare(const Config& cfg);

void cmd_make_scenes(const Config& cfg);

DepthMetrics depth_metrics(const BlurSizeMap& truth, const BlurSizeMap& estimate, int max_size);

}  // namespace cadepth::cli
