#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "njcr/core.hpp"
#include "njcr/raster_io.hpp"
#include "oracles.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>

using namespace njcr;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "njcr_test_core";
  fs::create_directories(dir);
  return dir / name;
}

void write_file(const fs::path& path, const std::string& header, const std::vector<float>& payload) {
  std::ofstream out(path, std::ios::binary);
  out << header << '\n';
  out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size() * 4));
}

HsiCube random_cube(std::size_t w, std::size_t h, std::size_t b, std::uint64_t seed) {
  const Eigen::MatrixXd m = oracle::random_matrix(static_cast<Eigen::Index>(w * h * b), 1, seed);
  std::vector<double> v(m.data(), m.data() + m.size());
  // Representable in f32 so round-trips can be compared exactly.
  for (auto& x : v) x = static_cast<float>(x);
  return HsiCube(w, h, b, v);
}

}  // namespace

TEST_CASE("cube invariants are enforced") {
  CHECK_THROWS_AS(HsiCube(2, 2, 0, {}), ConfigError);
  CHECK_THROWS_AS(HsiCube(0, 2, 1, {}), ConfigError);
  CHECK_THROWS_AS(HsiCube(2, 2, 1, {1, 2, 3}), ConfigError);
  CHECK_THROWS_AS(HsiCube(1, 1, 1, {std::numeric_limits<double>::quiet_NaN()}), NumericError);
  const HsiCube c(2, 1, 2, {1, 3, 2, 4});
  CHECK(c.value(0, 1) == 3);
  CHECK(c.value(1, 0) == 2);
  CHECK(c.pixel(1) == Eigen::Vector2d(3, 4));
}

TEST_CASE("flatten of a single pixel is its spectrum") {
  const HsiCube c(1, 1, 3, {0.5, 1.5, 2.5});
  const PixelMatrix x = flatten(c);
  CHECK(x.rows() == 3);
  CHECK(x.cols() == 1);
  CHECK(x.col(0) == Eigen::Vector3d(0.5, 1.5, 2.5));
}

TEST_CASE("flatten lays pixels out as columns in raster order") {
  // Pixels (1,2) and (3,4) of a 2x1 cube, stored band-sequentially.
  const HsiCube c(2, 1, 2, {1, 3, 2, 4});
  Eigen::Matrix2d expected;
  expected << 1, 3, 2, 4;
  CHECK(flatten(c) == expected);
}

TEST_CASE("flatten and unflatten are inverse") {
  const HsiCube c = random_cube(5, 4, 7, 11);
  CHECK(unflatten(flatten(c), 5, 4) == c);
  const Eigen::MatrixXd m = oracle::random_matrix(6, 12, 3);
  CHECK(flatten(unflatten(m, 4, 3)) == m);
  CHECK_THROWS_AS(unflatten(m, 5, 3), ConfigError);
}

TEST_CASE("normalize_scores maps onto [0, 1]") {
  const auto n = normalize_scores(std::vector<double>{2, 4, 6});
  CHECK(n == std::vector<double>{0.0, 0.5, 1.0});
  CHECK(normalize_scores(std::vector<double>{5, 5}) == std::vector<double>{0.0, 0.0});
  CHECK_THROWS_AS(normalize_scores(std::vector<double>{}), ConfigError);
}

TEST_CASE("normalize_scores preserves order and ties") {
  std::vector<double> s(200);
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> u(0, 40);
  for (auto& v : s) v = 0.25 * u(rng);
  const auto n = normalize_scores(s);
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(n[i] >= 0.0);
    CHECK(n[i] <= 1.0);
    for (std::size_t j = 0; j < s.size(); ++j) {
      CHECK((s[i] <= s[j]) == (n[i] <= n[j]));
    }
  }
}

TEST_CASE("score map and mask invariants") {
  CHECK_THROWS_AS(ScoreMap(1, 2, std::vector<double>{1.0, -0.5}), NumericError);
  CHECK_THROWS_AS(GroundTruthMask(1, 2, {0, 2}), ConfigError);
  CHECK(GroundTruthMask(2, 2, {0, 1, 1, 0}).anomaly_count() == 2);
  CHECK_THROWS_AS(SuperpixelMap(1, 3, {0, 2, 2}), ConfigError);
  const SuperpixelMap sp(3, 1, {1, 0, 1});
  CHECK(sp.label_count() == 2);
  CHECK(sp.members() == std::vector<std::vector<std::size_t>>{{1}, {0, 2}});
}

TEST_CASE("pixel-interleaved cube files put each pixel's bands together") {
  const fs::path p = scratch("bip.bin");
  write_file(p, R"({"width":2,"height":2,"bands":3,"dtype":"f32","interleave":"bip","byte_order":"little"})",
             {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12});
  const HsiCube c = load_cube(p);
  CHECK(c.pixel(0, 0) == Eigen::Vector3d(1, 2, 3));
  CHECK(c.pixel(1, 1) == Eigen::Vector3d(10, 11, 12));
}

TEST_CASE("band-sequential cube files hold one band plane after another") {
  const fs::path p = scratch("bsq.bin");
  write_file(p, R"({"width":2,"height":1,"bands":2,"dtype":"f32","interleave":"bsq","byte_order":"little"})",
             {1, 3, 2, 4});
  CHECK(flatten(load_cube(p)) == (Eigen::Matrix2d() << 1, 3, 2, 4).finished());
}

TEST_CASE("malformed raster files are rejected") {
  const fs::path p = scratch("bad.bin");
  write_file(p, R"({"width":2,"height":2,"bands":0,"dtype":"f32"})", {});
  CHECK_THROWS_AS(load_cube(p), IoError);
  write_file(p, R"({"width":2,"height":2,"bands":1,"dtype":"f32"})", {1, 2, 3});
  CHECK_THROWS_AS(load_cube(p), IoError);
  write_file(p, "not json", {1});
  CHECK_THROWS_AS(load_cube(p), IoError);
  write_file(p, R"({"width":1,"height":1,"bands":1,"dtype":"f32"})", {std::numeric_limits<float>::infinity()});
  CHECK_THROWS_AS(load_cube(p), IoError);
  write_file(p, R"({"width":1,"height":1,"bands":1,"dtype":"f64"})", {1, 2});
  CHECK_THROWS_AS(load_cube(p), IoError);
  CHECK_THROWS_AS(load_cube(scratch("missing.bin")), IoError);
}

TEST_CASE("cube save/load round-trips bit-exactly") {
  const HsiCube c = random_cube(8, 8, 16, 21);
  const fs::path a = scratch("rt1.bin");
  const fs::path b = scratch("rt2.bin");
  save_cube(c, a);
  const HsiCube back = load_cube(a);
  CHECK(back == c);
  save_cube(back, b);
  CHECK(read_text(a) == read_text(b));
  const auto h = read_header(a);
  CHECK(h.width == 8);
  CHECK(h.bands == 16);
  CHECK(h.dtype == "f32");
  CHECK(h.interleave == "bsq");
}

TEST_CASE("mask, label and score rasters round-trip") {
  const GroundTruthMask m(3, 2, {0, 1, 0, 0, 1, 1});
  save_mask(m, scratch("m.bin"));
  CHECK(load_mask(scratch("m.bin")) == m);
  CHECK(read_header(scratch("m.bin")).dtype == "u8");

  const SuperpixelMap sp(3, 2, {0, 0, 1, 2, 2, 1});
  save_labels(sp, scratch("l.bin"));
  CHECK(load_labels(scratch("l.bin")) == sp);
  CHECK(read_header(scratch("l.bin")).dtype == "u32");

  const ScoreMap s(3, 2, std::vector<double>{0.0, 0.5, 1.25, 3.0, 0.125, 7.0});
  save_scores(s, scratch("s.bin"));
  CHECK(load_scores(scratch("s.bin")) == s);
  CHECK_THROWS_AS(load_mask(scratch("s.bin")), IoError);
}

TEST_CASE("score CSV lists pixel index, row, column and score") {
  const ScoreMap s(2, 2, std::vector<double>{0.0, 0.5, 1.0, 2.0});
  CHECK(scores_csv(s) == "pixel_index,row,col,score\n0,0,0,0\n1,0,1,0.5\n2,1,0,1\n3,1,1,2\n");
}
