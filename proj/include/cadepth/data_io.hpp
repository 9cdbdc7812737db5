#pragma once

#include "cadepth/image_io.hpp"
#include "cadepth/optics.hpp"
#include "cadepth/simulator.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace cadepth {

// All-focus image with either metric depth or precomputed blur sizes.
struct Scene {
  std::string id;
  GrayImage image;
  std::optional<Grid> depth;           // meters
  std::optional<BlurSizeMap> sizes;

  void validate() const;
};

// Elementwise depth_to_blur_size. Errors name the offending pixel.
BlurSizeMap discretize_depth(const Grid& depth, const CameraConfig& cam);

// Fills scene.sizes from scene.depth when absent.
void discretize_scene(Scene& scene, const CameraConfig& cam);

struct SplitSpec {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SceneSplit {
  std::vector<Scene> train, val, test;
};

// Seeded shuffle, then contiguous partition at rounded cumulative
// boundaries.
SceneSplit split(std::vector<Scene> scenes, const SplitSpec& spec);

// Index form of split, for manifests.
std::vector<std::vector<size_t>> split_indices(size_t count, const SplitSpec& spec);

enum class Layout { planes, slant, steps };
enum class Texture { noise, stripes, checker, flat };

Layout parse_layout(const std::string& name);
Texture parse_texture(const std::string& name);
const char* to_string(Layout l);
const char* to_string(Texture t);

struct SyntheticSpec {
  int height = 160;
  int width = 160;
  Layout layout = Layout::planes;
  std::vector<double> depths;  // meters, one per region (slant: endpoints)
  Texture texture = Texture::noise;
  std::uint64_t seed = 0;
};

// planes: vertical bands of equal width, one depth each.
// steps: horizontal bands of equal height.
// slant: depth interpolated linearly in inverse depth across columns from
// the first to the last listed depth.
Scene make_synthetic_scene(const SyntheticSpec& spec);

struct CorpusSpec {
  int count = 200;
  int height = 160;
  int width = 160;
  int min_planes = 3;
  int max_planes = 5;
  std::vector<Texture> textures = {Texture::noise, Texture::stripes, Texture::checker};
  std::uint64_t seed = 0;
};

// Multi-plane scenes whose plane depths map to blur classes drawn
// uniformly from {1, 3, ..., k}, on both sides of the focal plane.
std::vector<Scene> make_corpus(const CorpusSpec& spec, const CameraConfig& cam);

struct LabeledPatch {
  Grid patch;  // all-focus
  int size = 1;
};

// Uniform scene choice, then a uniform anchor among the P x P windows of
// constant blur size. Scenes without such a window are dropped (reported by
// skipped()).
class PatchSampler {
 public:
  PatchSampler(const std::vector<Scene>& scenes, int patch_size = kPatchSize);

  LabeledPatch draw(std::mt19937_64& rng) const;
  bool empty() const { return usable_.empty(); }
  const std::vector<std::string>& skipped() const { return skipped_; }

 private:
  struct Entry {
    const Scene* scene;
    std::vector<std::pair<int, int>> anchors;
  };
  std::vector<Entry> usable_;
  std::vector<std::string> skipped_;
  int patch_size_;
};

// Deterministic stream over a sampler for one seed.
class PatchLabelStream {
 public:
  PatchLabelStream(const PatchSampler& sampler, std::uint64_t seed) : sampler_(&sampler), rng_(seed) {}
  LabeledPatch next() { return sampler_->draw(rng_); }

 private:
  const PatchSampler* sampler_;
  std::mt19937_64 rng_;
};

// Directory layout: NNN_image.pgm + NNN_depth.txt (or NNN_sizes.txt).
std::vector<Scene> load_scene_dir(const std::filesystem::path& dir);
void save_scene(const std::filesystem::path& dir, const Scene& scene);

void save_manifest(const std::filesystem::path& path, const std::vector<Scene>& scenes);

}  // namespace cadepth
