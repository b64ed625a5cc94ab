#include "doctest.h"

#include <filesystem>

#include "common/errors.hpp"
#include "masks/image.hpp"
#include "masks/masks.hpp"
#include "support/helpers.hpp"
#include "tensor/atnt.hpp"
#include "tensor/rng.hpp"

using namespace attn;

namespace {

RgbImage random_image(int w, int h, Rng& rng) {
  RgbImage img(w, h);
  for (auto& v : img.data) v = static_cast<std::uint8_t>(rng.below(256));
  return img;
}

}  // namespace

TEST_CASE("derive_gt_mask examples") {
  Rng rng(4);
  const RgbImage src = random_image(6, 5, rng);
  CHECK(derive_gt_mask(src, src).count() == 0);

  RgbImage small = src;
  small.at(2, 3, 0) = static_cast<std::uint8_t>(src.at(2, 3, 0) < 128 ? src.at(2, 3, 0) + 30 : src.at(2, 3, 0) - 30);
  CHECK(derive_gt_mask(src, small, 0.1).count() == 0);

  RgbImage black(4, 4), white(4, 4);
  for (auto& v : white.data) v = 255;
  RgbImage one = black;
  for (int c = 0; c < 3; ++c) one.at(1, 2, c) = 255;
  const auto m = derive_gt_mask(black, one, 0.1);
  CHECK(m.count() == 1);
  CHECK(m.at(1, 2) == 1);
  CHECK(derive_gt_mask(black, white, 0.1).count() == 16);

  CHECK_THROWS_AS(derive_gt_mask(RgbImage(4, 4), RgbImage(4, 5)), UsageError);
}

TEST_CASE("constant masks") {
  CHECK(constant_mask(ConstantMaskKind::Real, 2, 2).values() == std::vector<std::uint8_t>{0, 0, 0, 0});
  CHECK(constant_mask(ConstantMaskKind::EntireFake, 2, 2).values() == std::vector<std::uint8_t>{1, 1, 1, 1});
  CHECK(constant_mask(ConstantMaskKind::EntireFake, 8, 8).count() == 64);
}

TEST_CASE("downsample_mask examples") {
  const auto full = downsample_mask(ManipMask(64, 64, 1), 8, 8);
  CHECK(full.width() == 8);
  for (float v : full.values()) CHECK(v == 1.0f);

  CHECK(downsample_mask(ManipMask(2, 2, std::vector<std::uint8_t>{1, 0, 0, 0}), 1, 1)[0] == 0.25f);

  std::vector<std::uint8_t> checker(64);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) checker[static_cast<std::size_t>(y * 8 + x)] = (x + y) % 2;
  const auto half = downsample_mask(ManipMask(8, 8, checker), 4, 4);
  for (float v : half.values()) CHECK(v == 0.5f);

  CHECK_THROWS_AS(downsample_mask(ManipMask(10, 10), 4, 4), UsageError);
}

TEST_CASE("binarize examples") {
  CHECK(binarize(ProbMap(3, 3, 0.05f), 0.1).count() == 0);
  CHECK(binarize(ProbMap(3, 3, 0.11f), 0.1).count() == 9);
  CHECK(binarize(ProbMap(1, 1, 0.1f), 0.1).count() == 0);
  CHECK_THROWS_AS(binarize(ProbMap(1, 1, 0.5f), 1.0), UsageError);
}

TEST_CASE("upsample_nearest replicates blocks") {
  const ProbMap m(2, 1, std::vector<float>{0.25f, 0.75f});
  const auto u = upsample_nearest(m, 2, 4);
  CHECK(u.values() == std::vector<float>{0.25f, 0.25f, 0.75f, 0.75f, 0.25f, 0.25f, 0.75f, 0.75f});
  CHECK_THROWS_AS(upsample_nearest(m, 2, 3), UsageError);
}

TEST_CASE("mask and map value checks") {
  CHECK_THROWS_AS(ManipMask(2, 1, std::vector<std::uint8_t>{0, 2}), UsageError);
  CHECK_THROWS_AS(ProbMap(2, 1, std::vector<float>{0.0f, 1.5f}), UsageError);
  CHECK_THROWS_AS(ProbMap(1, 1, std::vector<float>{NAN}), UsageError);
}

TEST_CASE("image file round trips") {
  namespace fs = std::filesystem;
  const fs::path dir = testing_support::scratch_dir("images");
  Rng rng(12);
  const RgbImage img = random_image(7, 3, rng);
  write_ppm((dir / "a.ppm").string(), img);
  CHECK(read_ppm((dir / "a.ppm").string()) == img);

  std::vector<std::uint8_t> bits(21);
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng.below(2));
  const ManipMask mask(7, 3, bits);
  write_pgm((dir / "m.pgm").string(), mask);
  CHECK(read_pgm((dir / "m.pgm").string()) == mask);

  const ProbMap map(3, 2, std::vector<float>{0.0f, 0.125f, 0.3f, 0.999f, 1.0f, 0.5f});
  write_mapf((dir / "p.mapf").string(), map);
  CHECK(read_mapf((dir / "p.mapf").string()) == map);
  CHECK(encode_mapf(map).rfind("MAPF 3 2\n", 0) == 0);

  CHECK_THROWS_AS(read_ppm((dir / "missing.ppm").string()), IoError);
  write_file((dir / "bad.ppm").string(), "P3\n2 2\n255\n");
  CHECK_THROWS_AS(read_ppm((dir / "bad.ppm").string()), FormatError);
  write_file((dir / "short.pgm").string(), "P5\n4 4\n255\nab");
  CHECK_THROWS_AS(read_pgm((dir / "short.pgm").string()), FormatError);
  CHECK_THROWS_AS(decode_mapf("MAPF 2 2\n\x01"), FormatError);
}
