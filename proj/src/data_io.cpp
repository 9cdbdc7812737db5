#include "cadepth/data_io.hpp"

#include "cadepth/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>

namespace cadepth {

void Scene::validate() const {
  if (!depth && !sizes) throw InvalidArgument("scene " + id + " has neither depth nor blur sizes");
  auto check = [&](Eigen::Index h, Eigen::Index w) {
    if (h != image.rows() || w != image.cols())
      throw InvalidArgument("scene " + id + ": image and depth/size dimensions differ");
  };
  if (depth) check(depth->rows(), depth->cols());
  if (sizes) check(sizes->rows(), sizes->cols());
}

BlurSizeMap discretize_depth(const Grid& depth, const CameraConfig& cam) {
  cam.validate();
  BlurSizeMap out(depth.rows(), depth.cols());
  for (int r = 0; r < depth.rows(); ++r)
    for (int c = 0; c < depth.cols(); ++c) {
      try {
        out(r, c) = depth_to_blur_size(depth(r, c), cam);
      } catch (const InvalidConfiguration& e) {
        std::ostringstream msg;
        msg << "invalid depth at pixel (" << r << ", " << c << "): " << e.what();
        throw InvalidConfiguration(msg.str());
      }
    }
  return out;
}

void discretize_scene(Scene& scene, const CameraConfig& cam) {
  scene.validate();
  if (!scene.sizes) scene.sizes = discretize_depth(*scene.depth, cam);
}

void SplitSpec::validate() const {
  for (double f : {train, val, test})
    if (!(f >= 0.0 && f <= 1.0)) throw InvalidConfiguration("split fractions must lie in [0,1]");
  if (std::abs(train + val + test - 1.0) > 1e-9) throw InvalidConfiguration("split fractions must sum to 1");
}

std::vector<std::vector<size_t>> split_indices(size_t count, const SplitSpec& spec) {
  spec.validate();
  std::vector<size_t> order(count);
  for (size_t i = 0; i < count; ++i) order[i] = i;
  std::mt19937_64 rng(spec.seed);
  // Fisher-Yates with an explicit draw so the order does not depend on the
  // standard library's shuffle.
  for (size_t i = count; i > 1; --i) {
    const size_t j = static_cast<size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  const auto n = static_cast<double>(count);
  const size_t b1 = std::min(count, static_cast<size_t>(std::llround(spec.train * n)));
  const size_t b2 = std::clamp(static_cast<size_t>(std::llround((spec.train + spec.val) * n)), b1, count);
  return {std::vector<size_t>(order.begin(), order.begin() + b1),
          std::vector<size_t>(order.begin() + b1, order.begin() + b2),
          std::vector<size_t>(order.begin() + b2, order.end())};
}

SceneSplit split(std::vector<Scene> scenes, const SplitSpec& spec) {
  const auto parts = split_indices(scenes.size(), spec);
  SceneSplit out;
  std::vector<Scene>* dest[3] = {&out.train, &out.val, &out.test};
  for (int k = 0; k < 3; ++k)
    for (size_t i : parts[k]) dest[k]->push_back(std::move(scenes[i]));
  return out;
}

Layout parse_layout(const std::string& name) {
  if (name == "planes") return Layout::planes;
  if (name == "slant") return Layout::slant;
  if (name == "steps") return Layout::steps;
  throw InvalidConfiguration("unknown scene layout: " + name);
}

Texture parse_texture(const std::string& name) {
  if (name == "noise") return Texture::noise;
  if (name == "stripes") return Texture::stripes;
  if (name == "checker") return Texture::checker;
  if (name == "flat") return Texture::flat;
  throw InvalidConfiguration("unknown texture: " + name);
}

const char* to_string(Layout l) {
  switch (l) {
    case Layout::planes:
      return "planes";
    case Layout::slant:
      return "slant";
    case Layout::steps:
      return "steps";
  }
  return "?";
}

const char* to_string(Texture t) {
  switch (t) {
    case Texture::noise:
      return "noise";
    case Texture::stripes:
      return "stripes";
    case Texture::checker:
      return "checker";
    case Texture::flat:
      return "flat";
  }
  return "?";
}

namespace {

GrayImage make_texture(Texture texture, int h, int w, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double lo = 0.3 * unit(rng);
  const double hi = 0.7 + 0.3 * unit(rng);
  GrayImage img(h, w);
  switch (texture) {
    case Texture::noise:
      for (Eigen::Index i = 0; i < img.size(); ++i) img.data()[i] = lo + (hi - lo) * unit(rng);
      break;
    case Texture::stripes: {
      const double angle = std::numbers::pi * unit(rng);
      const double period = 4.0 + 12.0 * unit(rng);
      const double phase = period * unit(rng);
      const double ca = std::cos(angle), sa = std::sin(angle);
      for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
          const double t = std::fmod(c * ca + r * sa + phase + 1e6 * period, period);
          img(r, c) = t < 0.5 * period ? hi : lo;
        }
      break;
    }
    case Texture::checker: {
      const int cell = 3 + static_cast<int>(rng() % 8);
      const int dr = static_cast<int>(rng() % cell);
      const int dc = static_cast<int>(rng() % cell);
      for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) img(r, c) = (((r + dr) / cell + (c + dc) / cell) % 2) ? hi : lo;
      break;
    }
    case Texture::flat:
      img.setConstant(0.2 + 0.6 * unit(rng));
      break;
  }
  return img;
}

}  // namespace

Scene make_synthetic_scene(const SyntheticSpec& spec) {
  if (spec.depths.empty()) throw InvalidArgument("synthetic scene needs at least one depth");
  if (spec.height < 1 || spec.width < 1) throw InvalidArgument("synthetic scene size must be positive");
  for (double d : spec.depths)
    if (!(d > 0.0)) throw InvalidArgument("synthetic depths must be positive");
  std::mt19937_64 rng(spec.seed);
  Scene scene;
  std::ostringstream id;
  id << to_string(spec.layout) << '-' << to_string(spec.texture) << '-' << spec.seed;
  scene.id = id.str();
  scene.image = make_texture(spec.texture, spec.height, spec.width, rng);

  const int n = static_cast<int>(spec.depths.size());
  Grid depth(spec.height, spec.width);
  for (int r = 0; r < spec.height; ++r)
    for (int c = 0; c < spec.width; ++c) {
      switch (spec.layout) {
        case Layout::planes:
          depth(r, c) = spec.depths[static_cast<size_t>(c) * n / spec.width];
          break;
        case Layout::steps:
          depth(r, c) = spec.depths[static_cast<size_t>(r) * n / spec.height];
          break;
        case Layout::slant: {
          const double t = spec.width > 1 ? static_cast<double>(c) / (spec.width - 1) : 0.0;
          const double inv = (1 - t) / spec.depths.front() + t / spec.depths.back();
          depth(r, c) = 1.0 / inv;
          break;
        }
      }
    }
  scene.depth = std::move(depth);
  return scene;
}

std::vector<Scene> make_corpus(const CorpusSpec& spec, const CameraConfig& cam) {
  cam.validate();
  if (spec.textures.empty()) throw InvalidArgument("corpus needs at least one texture");
  if (spec.min_planes < 1 || spec.max_planes < spec.min_planes)
    throw InvalidArgument("corpus plane range is invalid");
  const int classes = cam.num_classes();
  std::vector<Scene> scenes;
  for (int i = 0; i < spec.count; ++i) {
    std::mt19937_64 rng(derive_seed(spec.seed, static_cast<std::uint64_t>(i)));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int planes = spec.min_planes + static_cast<int>(rng() % (spec.max_planes - spec.min_planes + 1));
    SyntheticSpec s;
    s.height = spec.height;
    s.width = spec.width;
    s.layout = (rng() % 2) ? Layout::planes : Layout::steps;
    s.texture = spec.textures[static_cast<size_t>(i) % spec.textures.size()];
    for (int p = 0; p < planes; ++p) {
      const int cls = static_cast<int>(rng() % classes);
      // Stay clear of the rounding boundaries at half-integers.
      const double hi = cls == classes - 1 ? cls + 1.5 : cls + 0.45;
      const double radius = std::max(0.0, cls - 0.45) + (hi - std::max(0.0, cls - 0.45)) * unit(rng);
      const bool far_side = rng() % 2;
      s.depths.push_back(depth_for_blur_radius(radius, cam, far_side));
    }
    s.seed = rng();
    Scene scene = make_synthetic_scene(s);
    std::ostringstream id;
    id << std::setw(3) << std::setfill('0') << i;
    scene.id = id.str();
    discretize_scene(scene, cam);
    scenes.push_back(std::move(scene));
  }
  return scenes;
}

PatchSampler::PatchSampler(const std::vector<Scene>& scenes, int patch_size) : patch_size_(patch_size) {
  const int p = patch_size;
  for (const Scene& scene : scenes) {
    if (!scene.sizes) throw InvalidArgument("patch sampling needs discretized scenes");
    const BlurSizeMap& sizes = *scene.sizes;
    const int h = static_cast<int>(sizes.rows());
    const int w = static_cast<int>(sizes.cols());
    Entry entry{&scene, {}};
    if (h >= p && w >= p) {
      // Summed-area table per size value: a window is constant iff the count
      // of its anchor's value fills the window.
      const int max_size = sizes.maxCoeff();
      std::vector<Eigen::ArrayXXi> tables(max_size + 1);
      for (int r = 0; r + p <= h; ++r)
        for (int c = 0; c + p <= w; ++c) {
          const int v = sizes(r, c);
          auto& sat = tables[v];
          if (sat.size() == 0) {
            sat = Eigen::ArrayXXi::Zero(h + 1, w + 1);
            for (int i = 0; i < h; ++i)
              for (int j = 0; j < w; ++j)
                sat(i + 1, j + 1) = (sizes(i, j) == v) + sat(i, j + 1) + sat(i + 1, j) - sat(i, j);
          }
          const int count = sat(r + p, c + p) - sat(r, c + p) - sat(r + p, c) + sat(r, c);
          if (count == p * p) entry.anchors.emplace_back(r, c);
        }
    }
    if (entry.anchors.empty()) {
      std::cerr << "warning: scene " << scene.id << " has no constant-blur " << p << "x" << p
                << " window; skipped\n";
      skipped_.push_back(scene.id);
    } else {
      usable_.push_back(std::move(entry));
    }
  }
}

LabeledPatch PatchSampler::draw(std::mt19937_64& rng) const {
  if (usable_.empty()) throw InvalidArgument("patch sampler has no usable scenes");
  const Entry& e = usable_[rng() % usable_.size()];
  const auto [r, c] = e.anchors[rng() % e.anchors.size()];
  return {e.scene->image.block(r, c, patch_size_, patch_size_),
          (*e.scene->sizes)(r + patch_size_ / 2, c + patch_size_ / 2)};
}

std::vector<Scene> load_scene_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("scene directory not found: " + dir.string());
  std::vector<std::string> ids;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    const std::string suffix = "_image.pgm";
    const std::string suffix_png = "_image.png";
    for (const auto& s : {suffix, suffix_png})
      if (name.size() > s.size() && name.compare(name.size() - s.size(), s.size(), s) == 0)
        ids.push_back(name.substr(0, name.size() - s.size()));
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::vector<Scene> scenes;
  for (const auto& id : ids) {
    Scene scene;
    scene.id = id;
    const auto pgm = dir / (id + "_image.pgm");
    scene.image = load_image(std::filesystem::exists(pgm) ? pgm : dir / (id + "_image.png"));
    const auto depth = dir / (id + "_depth.txt");
    const auto sizes = dir / (id + "_sizes.txt");
    if (std::filesystem::exists(depth)) scene.depth = load_depth_map(depth);
    if (std::filesystem::exists(sizes)) scene.sizes = load_size_map(sizes);
    scene.validate();
    scenes.push_back(std::move(scene));
  }
  return scenes;
}

void save_scene(const std::filesystem::path& dir, const Scene& scene) {
  scene.validate();
  std::filesystem::create_directories(dir);
  save_image(dir / (scene.id + "_image.pgm"), scene.image);
  if (scene.depth) save_depth_map(dir / (scene.id + "_depth.txt"), *scene.depth);
  if (scene.sizes) save_size_map(dir / (scene.id + "_sizes.txt"), *scene.sizes);
}

void save_manifest(const std::filesystem::path& path, const std::vector<Scene>& scenes) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest: " + path.string());
  for (const auto& s : scenes) out << s.id << '\n';
}

}  // namespace cadepth
