#pragma once

#include "cadepth/code_eval.hpp"
#include "cadepth/data_io.hpp"
#include "cadepth/learner.hpp"
#include "cadepth/optics.hpp"
#include "cadepth/simulator.hpp"
#include "cadepth/wiener_depth.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace cadepth {

// Flat key = value configuration. '#' starts a comment. Later assignments
// override earlier ones, so command-line flags are applied after the file.
class Config {
 public:
  static Config load(const std::filesystem::path& path);
  static Config parse(const std::string& text);

  void set(const std::string& key, const std::string& value);
  // "key=value"
  void set_assignment(const std::string& assignment);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get(const std::string& key, const std::string& fallback) const;
  std::string require(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key, long fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  std::vector<int> get_ints(const std::string& key, const std::vector<int>& fallback) const;
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<std::string> get_list(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const { return values_; }

  // Sorted key = value lines, suitable for a reproducibility sidecar.
  std::string dump() const;

 private:
  std::map<std::string, std::string> values_;
};

CameraConfig camera_from(const Config& cfg);
SimulationOptions simulation_from(const Config& cfg);
WienerConfig wiener_from(const Config& cfg, const CameraConfig& cam);
PriorSpectrum prior_from(const Config& cfg);
std::vector<int> kl_scales_from(const Config& cfg, const CameraConfig& cam);
TrainConfig train_from(const Config& cfg, const CameraConfig& cam);
AnnealSchedule schedule_from(const Config& cfg);
CorpusSpec corpus_from(const Config& cfg);
SplitSpec split_from(const Config& cfg);

// Accepts a code file path or "open[:N]" for a fully open N x N aperture.
ApertureCode code_from(const std::string& spec);

}  // namespace cadepth
