#include "synthgen/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>

#include "common/errors.hpp"
#include "common/log.hpp"
#include "masks/masks.hpp"

namespace attn {

namespace {

// sub-stream keys
constexpr std::uint64_t kBaseKey = 0x42415345;        // "BASE"
constexpr std::uint64_t kRealFamilyKey = 0x5245414c;  // "REAL"
constexpr std::uint64_t kFakeFamilyKey = 0x46414b45;  // "FAKE"
constexpr std::uint64_t kRegionKey = 0x52474e;        // "RGN"
constexpr std::uint64_t kShiftKey = 0x534854;         // "SHT"
constexpr std::uint64_t kSplitKey = 0x53504c54;       // "SPLT"

constexpr int kTile = 4;
constexpr int kSinusoids = 4;

// Per-image fingerprint gain ranges, relative to the configured strength.
constexpr double kRealGainLo = 0.7, kRealGainHi = 1.5;
constexpr double kFakeGainLo = 0.4, kFakeGainHi = 1.0;
// Content shift applied inside a partial-fake region, per channel.
constexpr double kShiftLo = 0.2, kShiftHi = 0.35;

std::size_t idx3(int size, int x, int y, int c) {
  return (static_cast<std::size_t>(y) * static_cast<std::size_t>(size) + static_cast<std::size_t>(x)) * 3 +
         static_cast<std::size_t>(c);
}

std::uint8_t quantize(double v) {
  v = std::clamp(v, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(v * 255.0));
}

std::vector<float> smooth_base(Rng rng, int size) {
  struct Wave {
    double fx, fy, phase, amp;
    double color[3];
  };
  Wave waves[kSinusoids];
  for (auto& w : waves) {
    w.fx = rng.uniform(-3.0, 3.0);
    w.fy = rng.uniform(-3.0, 3.0);
    w.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    w.amp = rng.uniform(0.5, 1.0);
    for (double& c : w.color) c = rng.uniform(0.2, 1.0);
  }
  std::vector<double> raw(static_cast<std::size_t>(size) * static_cast<std::size_t>(size) * 3, 0.0);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      for (const auto& w : waves) {
        const double s =
            w.amp * std::sin(2.0 * std::numbers::pi * (w.fx * x + w.fy * y) / static_cast<double>(size) + w.phase);
        for (int c = 0; c < 3; ++c) raw[idx3(size, x, y, c)] += w.color[c] * s;
      }
    }
  }
  std::vector<float> out(raw.size());
  for (int c = 0; c < 3; ++c) {
    double lo = raw[static_cast<std::size_t>(c)], hi = lo;
    for (std::size_t i = static_cast<std::size_t>(c); i < raw.size(); i += 3) {
      lo = std::min(lo, raw[i]);
      hi = std::max(hi, raw[i]);
    }
    for (std::size_t i = static_cast<std::size_t>(c); i < raw.size(); i += 3) {
      const double t = hi > lo ? (raw[i] - lo) / (hi - lo) : 0.5;
      out[i] = static_cast<float>(0.2 + 0.6 * t);
    }
  }
  return out;
}

// 4x4x3 tile, zero mean and unit RMS per channel. Gray tiles share one
// pattern across channels.
std::vector<double> fingerprint_tile(Rng rng, bool gray, double gain) {
  std::vector<double> t(kTile * kTile * 3);
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < kTile * kTile; ++i) {
      t[static_cast<std::size_t>(i * 3 + c)] = (gray && c > 0) ? t[static_cast<std::size_t>(i * 3)] : rng.uniform(-1.0, 1.0);
    }
  }
  for (int c = 0; c < 3; ++c) {
    double mean = 0.0;
    for (int i = 0; i < kTile * kTile; ++i) mean += t[static_cast<std::size_t>(i * 3 + c)];
    mean /= kTile * kTile;
    double ss = 0.0;
    for (int i = 0; i < kTile * kTile; ++i) {
      double& v = t[static_cast<std::size_t>(i * 3 + c)];
      v -= mean;
      ss += v * v;
    }
    const double rms = std::sqrt(ss / (kTile * kTile));
    for (int i = 0; i < kTile * kTile; ++i) {
      t[static_cast<std::size_t>(i * 3 + c)] *= rms > 0.0 ? gain / rms : 0.0;
    }
  }
  return t;
}

double tile_at(const std::vector<double>& tile, int x, int y, int c) {
  return tile[static_cast<std::size_t>(((y % kTile) * kTile + (x % kTile)) * 3 + c)];
}

std::vector<double> real_tile(Rng& rng) {
  Rng fam = rng.derive(kRealFamilyKey);
  const double gain = fam.uniform(kRealGainLo, kRealGainHi);
  return fingerprint_tile(fam, false, gain);
}

std::vector<double> fake_tile(Rng& rng) {
  Rng fam = rng.derive(kFakeFamilyKey);
  const double gain = fam.uniform(kFakeGainLo, kFakeGainHi);
  return fingerprint_tile(fam, true, gain);
}

GeneratedImage compose(std::vector<float> base, const std::vector<double>& tile, int size, double strength,
                       std::uint8_t mask_fill) {
  GeneratedImage g{RgbImage(size, size), ManipMask(size, size, mask_fill), std::move(base)};
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      for (int c = 0; c < 3; ++c) {
        const double v = g.base[idx3(size, x, y, c)] + strength * tile_at(tile, x, y, c);
        g.image.at(x, y, c) = quantize(v);
      }
    }
  }
  return g;
}

ManipMask sample_region(Rng rng, const GenConfig& cfg) {
  const int S = cfg.image_size;
  const double total = static_cast<double>(S) * S;
  for (int attempt = 0; attempt < 100; ++attempt) {
    const double frac = rng.uniform(cfg.area_min, cfg.area_max);
    const double aspect = std::exp(rng.uniform(std::log(0.5), std::log(2.0)));
    const bool ellipse = rng.below(2) == 1;
    ManipMask m(S, S);
    if (!ellipse) {
      const int w = static_cast<int>(std::lround(std::sqrt(frac * total * aspect)));
      if (w < 1 || w > S) continue;
      const int h = static_cast<int>(std::lround(frac * total / w));
      if (h < 1 || h > S) continue;
      const int x0 = static_cast<int>(rng.below(static_cast<std::uint32_t>(S - w + 1)));
      const int y0 = static_cast<int>(rng.below(static_cast<std::uint32_t>(S - h + 1)));
      for (int y = y0; y < y0 + h; ++y) {
        for (int x = x0; x < x0 + w; ++x) m.set(x, y, true);
      }
    } else {
      const double a = std::sqrt(frac * total * aspect / std::numbers::pi);
      const double b = frac * total / (std::numbers::pi * a);
      if (2.0 * a > S || 2.0 * b > S) continue;
      const double cx = rng.uniform(a, S - a);
      const double cy = rng.uniform(b, S - b);
      for (int y = 0; y < S; ++y) {
        for (int x = 0; x < S; ++x) {
          const double dx = (x + 0.5 - cx) / a;
          const double dy = (y + 0.5 - cy) / b;
          if (dx * dx + dy * dy <= 1.0) m.set(x, y, true);
        }
      }
    }
    const std::size_t n = m.count();
    const double got = static_cast<double>(n) / total;
    if (n < 4 || got < cfg.area_min || got > cfg.area_max) continue;
    return m;
  }
  throw UsageError("gen_partial_fake: could not place a region within the area range after 100 attempts");
}

// First round(0.5 n) train, next round(0.05 n) val, rest test, over a
// seeded permutation.
std::vector<Split> assign_splits(std::size_t n, Rng rng) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(std::span<std::size_t>(order));
  const auto n_train = static_cast<std::size_t>(std::floor(0.5 * static_cast<double>(n) + 0.5));
  const auto n_val = std::min(n - n_train, static_cast<std::size_t>(std::floor(0.05 * static_cast<double>(n) + 0.5)));
  std::vector<Split> out(n, Split::Test);
  for (std::size_t k = 0; k < n; ++k) {
    out[order[k]] = k < n_train ? Split::Train : (k < n_train + n_val ? Split::Val : Split::Test);
  }
  return out;
}

std::string file_name(Category c, int index, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_%06d.%s", index, ext);
  return std::string(to_string(c)) + buf;
}

}  // namespace

void GenConfig::validate() const {
  if (image_size < 16 || image_size % 8 != 0) {
    throw UsageError("image_size must be >= 16 and divisible by 8, got " + std::to_string(image_size));
  }
  if (counts.real < 0 || counts.partial_fake < 0 || counts.entire_fake < 0) throw UsageError("counts must be >= 0");
  if (counts.partial_fake > 0 && counts.real == 0) throw UsageError("partial fakes need at least one real source");
  if (!(fingerprint_strength >= 0.0 && fingerprint_strength <= 1.0)) {
    throw UsageError("fingerprint_strength must lie in [0, 1]");
  }
  if (!(area_min > 0.0 && area_max < 1.0 && area_min <= area_max)) {
    throw UsageError("region area range must satisfy 0 < min <= max < 1");
  }
}

std::uint64_t image_seed(std::uint64_t global_seed, Category category, std::uint64_t index) {
  return hash_seed(hash_seed(global_seed, static_cast<std::uint64_t>(category) + 1), index);
}

GeneratedImage gen_real(Rng& rng, int size, double strength) {
  if (size < 16) throw UsageError("gen_real: size must be >= 16");
  auto base = smooth_base(rng.derive(kBaseKey), size);
  return compose(std::move(base), real_tile(rng), size, strength, 0);
}

GeneratedImage gen_entire_fake(Rng& rng, const GenConfig& cfg) {
  auto base = smooth_base(rng.derive(kBaseKey), cfg.image_size);
  return compose(std::move(base), fake_tile(rng), cfg.image_size, cfg.fingerprint_strength, 1);
}

GeneratedImage gen_partial_fake(const GeneratedImage& source, Rng& rng, const GenConfig& cfg) {
  const int S = cfg.image_size;
  if (source.image.width != S || source.image.height != S ||
      source.base.size() != static_cast<std::size_t>(S) * static_cast<std::size_t>(S) * 3) {
    throw UsageError("gen_partial_fake: source does not match image_size " + std::to_string(S));
  }
  ManipMask region = sample_region(rng.derive(kRegionKey), cfg);

  // shift each channel towards mid-grey so the new content stays in range
  Rng srng = rng.derive(kShiftKey);
  double shift[3];
  for (int c = 0; c < 3; ++c) {
    double mean = 0.0;
    for (int y = 0; y < S; ++y) {
      for (int x = 0; x < S; ++x) {
        if (region.at(x, y)) mean += source.base[idx3(S, x, y, c)];
      }
    }
    mean /= static_cast<double>(region.count());
    const double mag = srng.uniform(kShiftLo, kShiftHi);
    shift[c] = mean > 0.5 ? -mag : mag;
  }

  const auto tile = fake_tile(rng);
  std::vector<double> comp(source.base.size());
  for (int y = 0; y < S; ++y) {
    for (int x = 0; x < S; ++x) {
      for (int c = 0; c < 3; ++c) {
        const std::size_t i = idx3(S, x, y, c);
        comp[i] = region.at(x, y)
                      ? std::clamp(source.base[i] + shift[c] + cfg.fingerprint_strength * tile_at(tile, x, y, c), 0.0, 1.0)
                      : source.image.data[i] / 255.0;
      }
    }
  }

  GeneratedImage out{source.image, region, source.base};
  for (int y = 0; y < S; ++y) {
    for (int x = 0; x < S; ++x) {
      if (!region.at(x, y)) continue;
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int xx = std::clamp(x + dx, 0, S - 1);
            const int yy = std::clamp(y + dy, 0, S - 1);
            acc += comp[idx3(S, xx, yy, c)];
          }
        }
        out.image.at(x, y, c) = quantize(acc / 9.0);
      }
    }
  }
  return out;
}

DatasetManifest gen_dataset(const GenConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  namespace fs = std::filesystem;
  const fs::path root(out_dir);
  std::error_code ec;
  for (const char* sub : {"images", "masks"}) {
    fs::create_directories(root / sub, ec);
    if (ec) throw IoError((root / sub).string(), "cannot create directory: " + ec.message());
  }

  const Rng split_rng = Rng(cfg.seed).derive(kSplitKey);
  const auto real_splits = assign_splits(static_cast<std::size_t>(cfg.counts.real), split_rng.derive(0));
  const auto entire_splits = assign_splits(static_cast<std::size_t>(cfg.counts.entire_fake), split_rng.derive(2));

  DatasetManifest manifest;
  auto emit = [&](Category cat, int index, const GeneratedImage& g, Split split, std::uint64_t seed,
                  std::optional<std::string> source) {
    ManifestRecord r;
    r.image_path = "images/" + file_name(cat, index, "ppm");
    r.mask_path = "masks/" + file_name(cat, index, "pgm");
    r.label = cat;
    r.split = split;
    r.seed = seed;
    r.source_path = std::move(source);
    write_ppm((root / r.image_path).string(), g.image);
    write_pgm((root / r.mask_path).string(), g.mask);
    manifest.records.push_back(std::move(r));
  };

  auto make_real = [&](int i) {
    Rng rng(image_seed(cfg.seed, Category::Real, static_cast<std::uint64_t>(i)));
    return gen_real(rng, cfg.image_size, cfg.fingerprint_strength);
  };

  for (int i = 0; i < cfg.counts.real; ++i) {
    emit(Category::Real, i, make_real(i), real_splits[static_cast<std::size_t>(i)],
         image_seed(cfg.seed, Category::Real, static_cast<std::uint64_t>(i)), std::nullopt);
  }
  for (int j = 0; j < cfg.counts.partial_fake; ++j) {
    const int src = j % cfg.counts.real;
    const GeneratedImage source = make_real(src);
    const std::uint64_t seed = image_seed(cfg.seed, Category::PartialFake, static_cast<std::uint64_t>(j));
    Rng rng(seed);
    emit(Category::PartialFake, j, gen_partial_fake(source, rng, cfg), real_splits[static_cast<std::size_t>(src)], seed,
         "images/" + file_name(Category::Real, src, "ppm"));
  }
  for (int k = 0; k < cfg.counts.entire_fake; ++k) {
    const std::uint64_t seed = image_seed(cfg.seed, Category::EntireFake, static_cast<std::uint64_t>(k));
    Rng rng(seed);
    emit(Category::EntireFake, k, gen_entire_fake(rng, cfg), entire_splits[static_cast<std::size_t>(k)], seed,
         std::nullopt);
  }

  write_manifest((root / "manifest.jsonl").string(), manifest);
  logger()->info("generated {} records in {}", manifest.records.size(), out_dir);
  return manifest;
}

double block_difference_statistic(const RgbImage& img) {
  const int bw = img.width / 2, bh = img.height / 2;
  if (bw < 1 || bh < 1) throw UsageError("block_difference_statistic: image smaller than 2x2");
  double total = 0.0;
  for (int by = 0; by < bh; ++by) {
    for (int bx = 0; bx < bw; ++bx) {
      for (int c = 0; c < 3; ++c) {
        double m = 0.0;
        for (int k = 0; k < 4; ++k) m += img.at(2 * bx + (k & 1), 2 * by + (k >> 1), c);
        m /= 4.0;
        for (int k = 0; k < 4; ++k) total += std::abs(img.at(2 * bx + (k & 1), 2 * by + (k >> 1), c) - m);
      }
    }
  }
  return total / (static_cast<double>(bw) * bh * 4 * 3 * 255.0);
}

}  // namespace attn
