#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tensor/tensor.hpp"

namespace attn {

/// 8-bit interleaved RGB, row-major.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, 0) {}

  std::uint8_t& at(int x, int y, int c) {
    return data[(static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3 +
                static_cast<std::size_t>(c)];
  }
  std::uint8_t at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3 +
                static_cast<std::size_t>(c)];
  }
  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

/// Binary per-pixel map; every value is exactly 0 or 1.
class ManipMask {
 public:
  ManipMask() = default;
  ManipMask(int width, int height, std::uint8_t fill = 0);
  /// Throws UsageError unless every value is 0 or 1.
  ManipMask(int width, int height, std::vector<std::uint8_t> values);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return values_.size(); }
  const std::vector<std::uint8_t>& values() const { return values_; }

  std::uint8_t operator[](std::size_t i) const { return values_[i]; }
  std::uint8_t at(int x, int y) const {
    return values_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)];
  }
  void set(int x, int y, bool on) {
    values_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)] = on ? 1 : 0;
  }
  std::size_t count() const;

  friend bool operator==(const ManipMask&, const ManipMask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> values_;
};

/// Continuous per-pixel map with values in [0, 1].
class ProbMap {
 public:
  ProbMap() = default;
  ProbMap(int width, int height, float fill = 0.0f);
  /// Throws UsageError if any value is outside [0, 1] or not finite.
  ProbMap(int width, int height, std::vector<float> values);

  static ProbMap from_mask(const ManipMask& m);
  /// H x W (or H x W x 1) tensor.
  static ProbMap from_tensor(const Tensor& t);
  Tensor to_tensor() const;

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return values_.size(); }
  const std::vector<float>& values() const { return values_; }
  float operator[](std::size_t i) const { return values_[i]; }
  float at(int x, int y) const {
    return values_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)];
  }

  friend bool operator==(const ProbMap&, const ProbMap&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<float> values_;
};

// Binary PPM (P6, maxval 255).
void write_ppm(const std::string& path, const RgbImage& img);
RgbImage read_ppm(const std::string& path);

// Binary PGM (P5, maxval 255); masks are stored as 0 / 255 and read back with
// values >= 128 as 1.
void write_pgm(const std::string& path, const ManipMask& mask);
ManipMask read_pgm(const std::string& path);

// MAPF: ASCII "MAPF <W> <H>\n" then W*H little-endian f32, row-major.
std::string encode_mapf(const ProbMap& map);
ProbMap decode_mapf(const std::string& bytes);
void write_mapf(const std::string& path, const ProbMap& map);
ProbMap read_mapf(const std::string& path);

}  // namespace attn
