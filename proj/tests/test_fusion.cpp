#include "cadepth/fusion.hpp"
#include "cadepth/errors.hpp"

#include <doctest.h>

using namespace cadepth;

TEST_CASE("single patch fills the map") {
  const auto m = fuse_votes(32, 32, 32, {{0, 0, 7, true}}, 13);
  CHECK((m == 7).all());
}

TEST_CASE("majority with small-size tie break") {
  // Two patches overlap on rows 8..31: one votes 3, one votes 5.
  const auto m = fuse_votes(40, 32, 32, {{0, 0, 5, true}, {8, 0, 3, true}}, 13);
  CHECK(m(0, 0) == 5);
  CHECK(m(20, 5) == 3);
  CHECK(m(39, 5) == 3);

  const auto m3 = fuse_votes(40, 32, 32, {{0, 0, 5, true}, {4, 0, 5, true}, {8, 0, 3, true}}, 13);
  CHECK(m3(20, 0) == 5);
}

TEST_CASE("low-confidence patches do not vote") {
  const auto m = fuse_votes(64, 32, 32, {{0, 0, 9, true}, {32, 0, 1, false}}, 13);
  // The lower half has no confident voter and inherits from above.
  CHECK((m == 9).all());
}

TEST_CASE("nearest voted pixel fills gaps") {
  const auto m = fuse_votes(32, 96, 32, {{0, 0, 3, true}, {0, 32, 1, false}, {0, 64, 11, true}}, 13);
  CHECK(m(10, 40) == 3);
  CHECK(m(10, 56) == 11);
  // Equidistant columns 47 / 48 around the gap's middle.
  CHECK(m(0, 47) == 3);
  CHECK(m(0, 48) == 11);
}

TEST_CASE("no confident patch falls back to all votes") {
  const auto m = fuse_votes(32, 32, 32, {{0, 0, 5, false}}, 13);
  CHECK((m == 5).all());
}

TEST_CASE("fusion is order independent") {
  std::vector<PatchVote> v = {{0, 0, 3, true}, {0, 8, 5, true}, {8, 0, 7, true}, {8, 8, 5, true}};
  const auto a = fuse_votes(40, 40, 32, v, 13);
  std::reverse(v.begin(), v.end());
  const auto b = fuse_votes(40, 40, 32, v, 13);
  CHECK((a == b).all());
}
