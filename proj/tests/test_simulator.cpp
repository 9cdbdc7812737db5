#include "cadepth/errors.hpp"
#include "cadepth/fft.hpp"
#include "cadepth/simulator.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace cadepth;

namespace {

ScaledKernel kernel_of(const Grid& v) { return {static_cast<int>(v.rows()), v / v.sum()}; }

}  // namespace

TEST_CASE("convolve_patch examples") {
  const Grid x = oracle::random_grid(32, 32, 1);
  const ScaledKernel delta{1, Grid::Ones(1, 1)};
  CHECK((convolve_patch(x, delta, Boundary::reflect) - x).abs().maxCoeff() == 0.0);
  CHECK((convolve_patch(x, delta, Boundary::cyclic) - x).abs().maxCoeff() == 0.0);

  const Grid flat = Grid::Constant(32, 32, 0.7);
  const auto k = kernel_of(oracle::random_grid(9, 9, 2));
  CHECK((convolve_patch(flat, k, Boundary::reflect) - 0.7).abs().maxCoeff() < 1e-14);

  const auto k3 = kernel_of(oracle::random_grid(3, 3, 3));
  for (char m : {'c', 'r'}) {
    const Grid got = convolve_patch(x, k3, m == 'c' ? Boundary::cyclic : Boundary::reflect);
    CHECK((got - oracle::convolve(x, k3.values, m)).abs().maxCoeff() < 1e-10);
  }
  // Asymmetric kernel: orientation matters.
  const auto k7 = kernel_of(oracle::random_grid(7, 7, 4));
  CHECK((convolve_patch(x, k7, Boundary::reflect) - oracle::convolve(x, k7.values, 'r')).abs().maxCoeff() < 1e-10);

  const auto big = kernel_of(Grid::Ones(33, 33));
  CHECK_THROWS_AS(convolve_patch(x, big, Boundary::cyclic), InvalidArgument);
}

TEST_CASE("cyclic convolution theorem") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Grid x = oracle::random_grid(32, 32, seed);
    const ApertureCode code(oracle::random_binary(11, seed + 50));
    const int s = 1 + 2 * static_cast<int>(seed % 7);
    const auto k = scale_code(code, s);
    const CGrid lhs = oracle::dft(convolve_patch(x, k, Boundary::cyclic));
    const CGrid rhs = oracle::dft(oracle::pad_centered(k.values, 32, 32)) * oracle::dft(x);
    const double scale = rhs.abs().maxCoeff();
    CHECK((lhs - rhs).abs().maxCoeff() / scale < 1e-10);
  }
}

TEST_CASE("simulate_coded_image examples") {
  CameraConfig cam;
  const ApertureCode code(oracle::random_binary(11, 9));
  const Grid img = oracle::random_grid(70, 90, 5);

  SUBCASE("all sizes one leaves the image unchanged") {
    const BlurSizeMap ones = BlurSizeMap::Ones(70, 90);
    CHECK((simulate_coded_image(img, ones, code, cam) - img).abs().maxCoeff() == 0.0);
  }
  SUBCASE("single patch equals convolve_patch") {
    const Grid x = img.topLeftCorner(32, 32);
    const BlurSizeMap five = BlurSizeMap::Constant(32, 32, 5);
    const Grid got = simulate_coded_image(x, five, code, cam);
    CHECK((got - convolve_patch(x, scale_code(code, 5), Boundary::reflect)).abs().maxCoeff() < 1e-14);
  }
  SUBCASE("two regions follow the per-patch oracle") {
    const Grid x = oracle::random_grid(32, 64, 8);
    BlurSizeMap sizes(32, 64);
    sizes.leftCols(32).setConstant(3);
    sizes.rightCols(32).setConstant(7);
    const Grid got = simulate_coded_image(x, sizes, code, cam);
    const Grid left = oracle::convolve(x, scale_code(code, 3).values, 'r');
    const Grid right = oracle::convolve(x, scale_code(code, 7).values, 'r');
    CHECK((got.leftCols(32) - left.leftCols(32)).abs().maxCoeff() < 1e-10);
    CHECK((got.rightCols(32) - right.rightCols(32)).abs().maxCoeff() < 1e-10);
  }
  SUBCASE("constant size equals whole-image convolution") {
    const BlurSizeMap nine = BlurSizeMap::Constant(70, 90, 9);
    const Grid whole = oracle::convolve(img, scale_code(code, 9).values, 'r');
    CHECK((simulate_coded_image(img, nine, code, cam) - whole).abs().maxCoeff() < 1e-10);
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(simulate_coded_image(img, BlurSizeMap::Ones(70, 89), code, cam), InvalidArgument);
  }
}

TEST_CASE("noisy simulation is seeded and clamped") {
  CameraConfig cam;
  const ApertureCode code(oracle::random_binary(11, 2));
  const Grid img = oracle::random_grid(64, 64, 5);
  const BlurSizeMap sizes = BlurSizeMap::Constant(64, 64, 5);
  SimulationOptions opts;
  opts.noise_sigma = 0.05;
  opts.seed = 42;
  const Grid a = simulate_coded_image(img, sizes, code, cam, opts);
  const Grid b = simulate_coded_image(img, sizes, code, cam, opts);
  CHECK((a - b).abs().maxCoeff() == 0.0);
  CHECK(a.minCoeff() >= 0.0);
  CHECK(a.maxCoeff() <= 1.0);
  opts.seed = 43;
  CHECK((simulate_coded_image(img, sizes, code, cam, opts) - a).abs().maxCoeff() > 0.0);
  const Grid clean = simulate_coded_image(img, sizes, code, cam);
  CHECK((a - clean).abs().maxCoeff() > 0.0);
}

TEST_CASE("extract_patches") {
  CHECK(extract_patches(Grid::Zero(64, 64), 8).size() == 25);
  CHECK(extract_patches(Grid::Zero(32, 32), 8).size() == 1);
  CHECK(extract_patches(Grid::Zero(32, 32), 3).size() == 1);
  const auto p = extract_patches(Grid::Zero(40, 32), 8);
  REQUIRE(p.size() == 2);
  CHECK(p[0].row == 0);
  CHECK(p[1].row == 8);
  CHECK(extract_patches(Grid::Zero(31, 64), 8).empty());
  CHECK(patch_anchor_count(160, 8) == 17);

  const Grid img = oracle::random_grid(48, 56, 1);
  const auto all = extract_patches(img, 8);
  for (size_t i = 1; i < all.size(); ++i)
    CHECK((all[i - 1].row < all[i].row || (all[i - 1].row == all[i].row && all[i - 1].col < all[i].col)));
  for (const auto& pr : all) CHECK((pr.patch - img.block(pr.row, pr.col, 32, 32)).abs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(extract_patches(img, 0), InvalidArgument);
}

TEST_CASE("spectral_feature examples") {
  const double c = 0.3;
  const Grid f = spectral_feature(Grid::Constant(32, 32, c));
  CHECK(f(16, 16) == doctest::Approx(std::log1p(c * 1024)).epsilon(1e-12));
  Grid g = f;
  g(16, 16) = 0.0;
  CHECK(g.abs().maxCoeff() < 1e-12);

  Grid impulse = Grid::Zero(32, 32);
  impulse(5, 19) = 1.0;
  CHECK((spectral_feature(impulse) - std::log(2.0)).abs().maxCoeff() < 1e-12);

  const Grid x = oracle::random_grid(32, 32, 3);
  const Grid raw = spectral_feature(x, SpectrumMode::magnitude);
  const Grid shifted = fft::fftshift(Grid(oracle::dft(x).abs()));
  CHECK((raw - shifted).abs().maxCoeff() < 1e-9);
  CHECK(spectral_feature(x).minCoeff() >= 0.0);
  CHECK((spectral_feature(x) - spectral_feature(x)).abs().maxCoeff() == 0.0);
}

TEST_CASE("spectral feature magnitude factorizes under cyclic blur") {
  const Grid x = oracle::random_grid(32, 32, 12);
  const auto k = scale_code(ApertureCode(oracle::random_binary(11, 13)), 9);
  const Grid lhs = spectral_feature(convolve_patch(x, k, Boundary::cyclic), SpectrumMode::magnitude);
  const Grid rhs = fft::fftshift(Grid(oracle::dft(oracle::pad_centered(k.values, 32, 32)).abs() * oracle::dft(x).abs()));
  CHECK((lhs - rhs).abs().maxCoeff() < 1e-8);
}

TEST_CASE("spectral feature is centrosymmetric") {
  const Grid f = spectral_feature(oracle::random_grid(32, 32, 4));
  for (int r = 1; r < 32; ++r)
    for (int c = 1; c < 32; ++c) CHECK(f(r, c) == doctest::Approx(f(32 - r, 32 - c)).epsilon(1e-12));
}

TEST_CASE("derive_seed") {
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
  CHECK(derive_seed(1, 2) != derive_seed(2, 2));
}

TEST_CASE("boundary names") {
  CHECK(parse_boundary("reflect") == Boundary::reflect);
  CHECK(parse_boundary("cyclic") == Boundary::cyclic);
  CHECK(std::string(to_string(Boundary::cyclic)) == "cyclic");
  CHECK_THROWS_AS(parse_boundary("zero"), InvalidConfiguration);
}
