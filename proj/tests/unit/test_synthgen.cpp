#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <map>

#include "common/errors.hpp"
#include "masks/image.hpp"
#include "masks/masks.hpp"
#include "metrics/localization.hpp"
#include "support/helpers.hpp"
#include "synthgen/manifest.hpp"
#include "synthgen/synthgen.hpp"
#include "tensor/atnt.hpp"

using namespace attn;
namespace fs = std::filesystem;

namespace {

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = read_file(e.path().string());
  return files;
}

}  // namespace

TEST_CASE("gen_real is deterministic and fingerprinted") {
  Rng a(5), b(5);
  const auto x = gen_real(a, 64, 0.08);
  const auto y = gen_real(b, 64, 0.08);
  CHECK(x.image == y.image);
  CHECK(x.mask.count() == 0);

  Rng c(5);
  const auto plain = gen_real(c, 64, 0.0);
  for (std::size_t i = 0; i < plain.base.size(); ++i)
    CHECK(plain.image.data[i] == static_cast<std::uint8_t>(std::lround(plain.base[i] * 255.0)));

  int higher = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng r1(100 + s), r2(100 + s);
    const auto fp = gen_real(r1, 64, 0.08);
    const auto base = gen_real(r2, 64, 0.0);
    higher += block_difference_statistic(fp.image) > block_difference_statistic(base.image);
  }
  CHECK(higher == 20);
}

TEST_CASE("gen_partial_fake respects its region") {
  GenConfig cfg;
  double iou_sum = 0.0;
  const int trials = 40;
  for (int i = 0; i < trials; ++i) {
    Rng rs(image_seed(7, Category::Real, static_cast<std::uint64_t>(i)));
    const auto src = gen_real(rs, cfg.image_size, cfg.fingerprint_strength);
    Rng rf(image_seed(7, Category::PartialFake, static_cast<std::uint64_t>(i)));
    const auto fake = gen_partial_fake(src, rf, cfg);
    const double frac = static_cast<double>(fake.mask.count()) / (64.0 * 64.0);
    CHECK(frac >= cfg.area_min);
    CHECK(frac <= cfg.area_max);
    for (int y = 0; y < 64; ++y)
      for (int x = 0; x < 64; ++x)
        if (!fake.mask.at(x, y))
          for (int c = 0; c < 3; ++c) CHECK(fake.image.at(x, y, c) == src.image.at(x, y, c));
    const auto derived = derive_gt_mask(src.image, fake.image, 0.1);
    iou_sum += iou(derived, fake.mask).value_or(0.0);
  }
  CHECK(iou_sum / trials >= 0.6);
}

TEST_CASE("gen_entire_fake") {
  GenConfig cfg;
  Rng a(9), b(9);
  const auto x = gen_entire_fake(a, cfg);
  CHECK(x.image == gen_entire_fake(b, cfg).image);
  CHECK(x.mask.count() == 64u * 64u);
  double mean = 0.0;
  for (auto v : x.image.data) mean += v / 255.0;
  mean /= static_cast<double>(x.image.data.size());
  CHECK(mean >= 0.2 - cfg.fingerprint_strength);
  CHECK(mean <= 0.8 + cfg.fingerprint_strength);
}

TEST_CASE("gen config validation") {
  GenConfig c;
  c.image_size = 60;
  CHECK_THROWS_AS(c.validate(), UsageError);
  c = GenConfig{};
  c.area_min = 0.6;
  CHECK_THROWS_AS(c.validate(), UsageError);
  c = GenConfig{};
  c.counts.partial_fake = 3;
  CHECK_THROWS_AS(c.validate(), UsageError);
}

TEST_CASE("gen_dataset layout, splits and determinism") {
  GenConfig cfg;
  cfg.counts = {100, 100, 100};
  const fs::path d1 = testing_support::scratch_dir("gen1"), d2 = testing_support::scratch_dir("gen2");
  const auto m = gen_dataset(cfg, d1.string());
  REQUIRE(m.records.size() == 300);
  std::map<Split, int> sizes;
  for (const auto& r : m.records) {
    ++sizes[r.split];
    CHECK(fs::exists(d1 / r.image_path));
    CHECK(fs::exists(d1 / r.mask_path));
    CHECK(r.source_path.has_value() == (r.label == Category::PartialFake));
  }
  CHECK(std::abs(sizes[Split::Train] - 150) <= 1);
  CHECK(std::abs(sizes[Split::Val] - 15) <= 1);
  CHECK(std::abs(sizes[Split::Test] - 135) <= 1);

  // a partial fake shares its source's split
  std::map<std::string, Split> by_path;
  for (const auto& r : m.records) by_path[r.image_path] = r.split;
  for (const auto& r : m.records)
    if (r.source_path) CHECK(by_path.at(*r.source_path) == r.split);

  CHECK(read_manifest((d1 / "manifest.jsonl").string()).records == m.records);
  gen_dataset(cfg, d2.string());
  CHECK(snapshot(d1) == snapshot(d2));

  const fs::path d3 = testing_support::scratch_dir("gen_empty");
  GenConfig empty;
  CHECK(gen_dataset(empty, d3.string()).records.empty());
  CHECK(fs::exists(d3 / "manifest.jsonl"));
}

TEST_CASE("manifest parsing errors") {
  CHECK_THROWS_AS(manifest_from_jsonl("{\"image_path\": 3}\n"), FormatError);
  CHECK_THROWS_AS(manifest_from_jsonl("not json\n"), FormatError);
  CHECK_THROWS_AS(
      manifest_from_jsonl(R"({"image_path":"a","mask_path":"b","label":"morph","split":"train","seed":1})"),
      FormatError);
  const auto m = manifest_from_jsonl(
      R"({"image_path":"a.ppm","mask_path":"a.pgm","label":"real","split":"val","seed":4,"source_path":null})");
  REQUIRE(m.records.size() == 1);
  CHECK(m.records[0].split == Split::Val);
  CHECK(manifest_from_jsonl(manifest_to_jsonl(m)).records == m.records);
}
