#include "cadepth/data_io.hpp"
#include "cadepth/errors.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <string>

using namespace cadepth;

namespace {

std::vector<Scene> numbered(int n) {
  std::vector<Scene> out;
  for (int i = 0; i < n; ++i) {
    Scene s;
    s.id = std::to_string(i);
    s.image = Grid::Constant(4, 4, 0.5);
    s.sizes = IntGrid::Ones(4, 4);
    out.push_back(s);
  }
  return out;
}

std::vector<std::string> ids(const std::vector<Scene>& v) {
  std::vector<std::string> out;
  for (const auto& s : v) out.push_back(s.id);
  return out;
}

}  // namespace

TEST_CASE("discretize_depth examples") {
  const CameraConfig cam;
  const IntGrid focus = discretize_depth(Grid::Constant(5, 7, cam.focus_distance_m), cam);
  CHECK((focus == 1).all());

  const Grid mixed = oracle::random_grid(12, 9, 5, 0.3, 6.0);
  const IntGrid sizes = discretize_depth(mixed, cam);
  for (int r = 0; r < mixed.rows(); ++r)
    for (int c = 0; c < mixed.cols(); ++c) CHECK(sizes(r, c) == oracle::blur_size(mixed(r, c)));

  Grid bad = Grid::Constant(6, 6, 2.0);
  bad(4, 2) = 0.02;  // inside the focal length
  try {
    discretize_depth(bad, cam);
    FAIL("expected an error");
  } catch (const InvalidConfiguration& e) {
    CHECK(std::string(e.what()).find("(4, 2)") != std::string::npos);
  }
}

TEST_CASE("scene validation") {
  Scene s;
  s.id = "x";
  s.image = Grid::Zero(4, 4);
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  s.depth = Grid::Ones(4, 5);
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  s.depth = Grid::Ones(4, 4);
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("split examples") {
  SplitSpec spec;
  spec.seed = 3;
  const auto parts = split(numbered(10), spec);
  CHECK(parts.train.size() == 6);
  CHECK(parts.val.size() == 2);
  CHECK(parts.test.size() == 2);

  SplitSpec all{1.0, 0.0, 0.0, 9};
  const auto whole = split(numbered(7), all);
  CHECK(whole.train.size() == 7);
  CHECK(whole.val.empty());
  CHECK(whole.test.empty());

  const auto again = split(numbered(10), spec);
  CHECK(ids(again.train) == ids(parts.train));
  CHECK(ids(again.val) == ids(parts.val));
  CHECK(ids(again.test) == ids(parts.test));

  CHECK_THROWS_AS(split(numbered(3), SplitSpec{0.5, 0.2, 0.2, 0}), InvalidConfiguration);
  CHECK_THROWS_AS(split(numbered(3), SplitSpec{1.2, -0.1, -0.1, 0}), InvalidConfiguration);
}

TEST_CASE("split partitions are disjoint, exhaustive and seeded") {
  for (size_t n : {0u, 1u, 3u, 10u, 37u, 200u})
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const SplitSpec spec{0.6, 0.2, 0.2, seed};
      const auto parts = split_indices(n, spec);
      std::vector<size_t> all;
      for (const auto& p : parts) all.insert(all.end(), p.begin(), p.end());
      std::sort(all.begin(), all.end());
      REQUIRE(all.size() == n);
      for (size_t i = 0; i < n; ++i) CHECK(all[i] == i);
      CHECK(split_indices(n, spec) == parts);
      CHECK(parts[0].size() == static_cast<size_t>(std::llround(0.6 * n)));
    }
  // Different seeds give different orders on a non-trivial set.
  CHECK(split_indices(50, SplitSpec{0.6, 0.2, 0.2, 1}) != split_indices(50, SplitSpec{0.6, 0.2, 0.2, 2}));
}

TEST_CASE("synthetic scene examples") {
  const CameraConfig cam;
  SyntheticSpec flat;
  flat.depths = {cam.focus_distance_m};
  flat.texture = Texture::flat;
  Scene s = make_synthetic_scene(flat);
  discretize_scene(s, cam);
  CHECK((*s.sizes == 1).all());
  CHECK(s.image.maxCoeff() == s.image.minCoeff());

  SyntheticSpec two;
  two.depths = {0.9, 1.2};
  two.texture = Texture::noise;
  two.seed = 11;
  for (Layout layout : {Layout::planes, Layout::steps}) {
    two.layout = layout;
    Scene t = make_synthetic_scene(two);
    discretize_scene(t, cam);
    const std::set<int> distinct(t.sizes->data(), t.sizes->data() + t.sizes->size());
    CHECK(distinct.size() == 2);
    CHECK(distinct.count(oracle::blur_size(0.9)) == 1);
    CHECK(distinct.count(oracle::blur_size(1.2)) == 1);
  }

  two.layout = Layout::planes;
  const Scene a = make_synthetic_scene(two);
  const Scene b = make_synthetic_scene(two);
  CHECK(a.id == b.id);
  CHECK((a.image == b.image).all());
  CHECK((*a.depth == *b.depth).all());
  two.seed = 12;
  CHECK((make_synthetic_scene(two).image != a.image).any());

  SyntheticSpec slant;
  slant.layout = Layout::slant;
  slant.depths = {0.5, 4.0};
  const Scene sl = make_synthetic_scene(slant);
  CHECK((*sl.depth)(0, 0) == doctest::Approx(0.5));
  CHECK((*sl.depth)(0, slant.width - 1) == doctest::Approx(4.0));
  const double mid_inv = 1.0 / (*sl.depth)(3, (slant.width - 1) / 2);
  CHECK(mid_inv == doctest::Approx((1 / 0.5 + 1 / 4.0) / 2).epsilon(0.02));

  for (Texture t : {Texture::noise, Texture::stripes, Texture::checker, Texture::flat}) {
    SyntheticSpec spec;
    spec.depths = {1.0};
    spec.texture = t;
    const Scene x = make_synthetic_scene(spec);
    CHECK(x.image.minCoeff() >= 0.0);
    CHECK(x.image.maxCoeff() <= 1.0);
    CHECK(parse_texture(to_string(t)) == t);
  }
  for (Layout l : {Layout::planes, Layout::slant, Layout::steps}) CHECK(parse_layout(to_string(l)) == l);
  CHECK_THROWS_AS(parse_layout("spiral"), InvalidConfiguration);

  SyntheticSpec empty;
  CHECK_THROWS_AS(make_synthetic_scene(empty), InvalidArgument);
}

TEST_CASE("corpus covers the size classes") {
  const CameraConfig cam;
  CorpusSpec spec;
  spec.count = 40;
  spec.height = 64;
  spec.width = 64;
  spec.seed = 4;
  const auto scenes = make_corpus(spec, cam);
  REQUIRE(scenes.size() == 40);
  std::set<int> seen;
  for (const auto& s : scenes) {
    REQUIRE(s.sizes);
    CHECK((discretize_depth(*s.depth, cam).array() == s.sizes->array()).all());
    seen.insert(s.sizes->data(), s.sizes->data() + s.sizes->size());
  }
  CHECK(seen.size() == static_cast<size_t>(cam.num_classes()));
  const auto again = make_corpus(spec, cam);
  for (size_t i = 0; i < scenes.size(); ++i) CHECK((again[i].image == scenes[i].image).all());
}

TEST_CASE("patch stream examples") {
  const CameraConfig cam;
  SyntheticSpec one;
  one.depths = {0.7};
  one.seed = 2;
  Scene constant = make_synthetic_scene(one);
  discretize_scene(constant, cam);
  const int size = (*constant.sizes)(0, 0);
  const std::vector<Scene> single{constant};
  const PatchSampler sampler(single);
  PatchLabelStream stream(sampler, 5);
  for (int i = 0; i < 200; ++i) {
    const auto p = stream.next();
    CHECK(p.size == size);
    CHECK(p.patch.rows() == kPatchSize);
  }

  // Two planes of equal width: both classes have the same number of anchors.
  SyntheticSpec two;
  two.depths = {0.9, 1.05};
  two.seed = 8;
  Scene pair = make_synthetic_scene(two);
  discretize_scene(pair, cam);
  const std::vector<Scene> balanced{pair};
  const PatchSampler bs(balanced);
  PatchLabelStream hist(bs, 21);
  const int near = oracle::blur_size(0.9);
  int count = 0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) count += hist.next().size == near;
  CHECK(std::abs(count / double(draws) - 0.5) <= 0.05);

  PatchLabelStream s1(bs, 99), s2(bs, 99);
  for (int i = 0; i < 50; ++i) {
    const auto a = s1.next();
    const auto b = s2.next();
    CHECK(a.size == b.size);
    CHECK((a.patch == b.patch).all());
  }
}

TEST_CASE("patch labels match the center pixel and windows are constant") {
  const CameraConfig cam;
  CorpusSpec spec;
  spec.count = 8;
  spec.height = 96;
  spec.width = 96;
  spec.seed = 13;
  const auto scenes = make_corpus(spec, cam);
  const PatchSampler sampler(scenes);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 20; ++i) {
    const auto p = sampler.draw(rng);
    // Locate the patch in its scene to check the label.
    bool found = false;
    for (const auto& s : scenes) {
      for (int r = 0; r + kPatchSize <= s.image.rows() && !found; ++r)
        for (int c = 0; c + kPatchSize <= s.image.cols() && !found; ++c) {
          if ((s.image.block(r, c, kPatchSize, kPatchSize) != p.patch).any()) continue;
          const IntGrid window = s.sizes->block(r, c, kPatchSize, kPatchSize);
          if (!(window == p.size).all()) continue;
          const Grid depth = s.depth->block(r, c, kPatchSize, kPatchSize);
          found = oracle::blur_size(depth(kPatchSize / 2, kPatchSize / 2)) == p.size;
        }
      if (found) break;
    }
    CHECK(found);
  }
}

TEST_CASE("scenes without a constant window are skipped") {
  Scene busy;
  busy.id = "busy";
  busy.image = oracle::random_grid(40, 40, 1);
  IntGrid sizes(40, 40);
  for (int r = 0; r < 40; ++r)
    for (int c = 0; c < 40; ++c) sizes(r, c) = ((r / 20 + c / 20) % 2) ? 3 : 1;
  busy.sizes = sizes;
  Scene small;
  small.id = "small";
  small.image = Grid::Zero(16, 16);
  small.sizes = IntGrid::Ones(16, 16);
  const std::vector<Scene> scenes{busy, small};
  const PatchSampler sampler(scenes);
  CHECK(sampler.empty());
  CHECK(sampler.skipped() == std::vector<std::string>{"busy", "small"});
  std::mt19937_64 rng(0);
  CHECK_THROWS_AS(sampler.draw(rng), InvalidArgument);

  Scene raw;
  raw.id = "raw";
  raw.image = Grid::Zero(40, 40);
  raw.depth = Grid::Ones(40, 40);
  CHECK_THROWS_AS(PatchSampler(std::vector<Scene>{raw}), InvalidArgument);
}

TEST_CASE("scene files round trip") {
  const auto dir = oracle::scratch_dir("data_io_roundtrip");
  const CameraConfig cam;
  SyntheticSpec spec;
  spec.depths = {0.6, 1.0, 3.5};
  spec.layout = Layout::steps;
  spec.seed = 7;
  spec.height = 48;
  spec.width = 40;
  Scene s = make_synthetic_scene(spec);
  discretize_scene(s, cam);
  s.id = "007";
  save_scene(dir, s);

  Scene only_sizes;
  only_sizes.id = "008";
  only_sizes.image = oracle::random_grid(33, 35, 3);
  only_sizes.sizes = IntGrid::Constant(33, 35, 5);
  save_scene(dir, only_sizes);

  const auto loaded = load_scene_dir(dir);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].id == "007");
  CHECK(loaded[1].id == "008");
  // 8-bit image quantization: within half a level.
  CHECK((loaded[0].image - s.image).abs().maxCoeff() <= 0.5 / 255 + 1e-12);
  CHECK((*loaded[0].depth == *s.depth).all());
  CHECK((*loaded[0].sizes == *s.sizes).all());
  CHECK(!loaded[1].depth);
  CHECK((*loaded[1].sizes == 5).all());

  const auto manifest = dir / "m.txt";
  save_manifest(manifest, loaded);
  std::ifstream in(manifest);
  std::string a, b, c;
  in >> a >> b;
  CHECK(a == "007");
  CHECK(b == "008");
  CHECK(!(in >> c));

  CHECK_THROWS_AS(load_scene_dir(dir / "missing"), IoError);
}
