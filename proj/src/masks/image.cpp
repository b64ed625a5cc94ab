#include "masks/image.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <string_view>

#include "common/errors.hpp"
#include "tensor/atnt.hpp"

namespace attn {

namespace {

std::size_t pixels(int w, int h) { return static_cast<std::size_t>(w) * static_cast<std::size_t>(h); }

void check_dims(int w, int h) {
  if (w < 1 || h < 1) throw UsageError("image dimensions must be >= 1, got " + std::to_string(w) + "x" + std::to_string(h));
}

struct PnmHeader {
  int width;
  int height;
  std::size_t data_offset;
};

// Parses "P<k> <w> <h> <maxval>" with '#' comments and exactly one whitespace
// byte before the raster.
PnmHeader parse_pnm(const std::string& bytes, std::string_view magic, const std::string& path) {
  if (bytes.size() < 2 || bytes.compare(0, 2, magic) != 0) {
    throw FormatError(path + ": expected " + std::string(magic) + " header");
  }
  std::size_t pos = 2;
  long fields[3] = {0, 0, 0};
  for (long& field : fields) {
    for (;;) {
      while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
      if (pos < bytes.size() && bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    if (pos >= bytes.size() || !std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      throw FormatError(path + ": malformed " + std::string(magic) + " header");
    }
    long v = 0;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      v = v * 10 + (bytes[pos] - '0');
      if (v > 1'000'000) throw FormatError(path + ": header value too large");
      ++pos;
    }
    field = v;
  }
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw FormatError(path + ": malformed header terminator");
  }
  ++pos;
  if (fields[2] != 255) throw FormatError(path + ": only maxval 255 is supported");
  if (fields[0] < 1 || fields[1] < 1) throw FormatError(path + ": empty image");
  return {static_cast<int>(fields[0]), static_cast<int>(fields[1]), pos};
}

}  // namespace

ManipMask::ManipMask(int width, int height, std::uint8_t fill) : width_(width), height_(height) {
  check_dims(width, height);
  if (fill > 1) throw UsageError("mask fill must be 0 or 1");
  values_.assign(pixels(width, height), fill);
}

ManipMask::ManipMask(int width, int height, std::vector<std::uint8_t> values)
    : width_(width), height_(height), values_(std::move(values)) {
  check_dims(width, height);
  if (values_.size() != pixels(width, height)) throw ShapeError("mask value count does not match dimensions");
  if (std::any_of(values_.begin(), values_.end(), [](std::uint8_t v) { return v > 1; })) {
    throw UsageError("mask values must be 0 or 1");
  }
}

std::size_t ManipMask::count() const {
  return static_cast<std::size_t>(std::count(values_.begin(), values_.end(), std::uint8_t{1}));
}

ProbMap::ProbMap(int width, int height, float fill) : width_(width), height_(height) {
  check_dims(width, height);
  if (!(fill >= 0.0f && fill <= 1.0f)) throw UsageError("probability map fill must lie in [0, 1]");
  values_.assign(pixels(width, height), fill);
}

ProbMap::ProbMap(int width, int height, std::vector<float> values)
    : width_(width), height_(height), values_(std::move(values)) {
  check_dims(width, height);
  if (values_.size() != pixels(width, height)) throw ShapeError("map value count does not match dimensions");
  if (std::any_of(values_.begin(), values_.end(), [](float v) { return !(v >= 0.0f && v <= 1.0f); })) {
    throw UsageError("probability map values must lie in [0, 1]");
  }
}

ProbMap ProbMap::from_mask(const ManipMask& m) {
  std::vector<float> v(m.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<float>(m[i]);
  return ProbMap(m.width(), m.height(), std::move(v));
}

ProbMap ProbMap::from_tensor(const Tensor& t) {
  if (!(t.ndim() == 2 || (t.ndim() == 3 && t.dim(2) == 1))) {
    throw ShapeError("probability map tensor must be H x W, got " + shape_str(t.shape()));
  }
  return ProbMap(t.dim(1), t.dim(0), std::vector<float>(t.data().begin(), t.data().end()));
}

Tensor ProbMap::to_tensor() const { return Tensor({height_, width_}, values_); }

void write_ppm(const std::string& path, const RgbImage& img) {
  if (img.data.size() != pixels(img.width, img.height) * 3) throw ShapeError("RGB buffer does not match dimensions");
  std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.data.data()), img.data.size());
  write_file(path, out);
}

RgbImage read_ppm(const std::string& path) {
  const std::string bytes = read_file(path);
  const PnmHeader h = parse_pnm(bytes, "P6", path);
  const std::size_t n = pixels(h.width, h.height) * 3;
  if (bytes.size() - h.data_offset < n) throw FormatError(path + ": truncated PPM raster");
  RgbImage img(h.width, h.height);
  std::copy_n(reinterpret_cast<const std::uint8_t*>(bytes.data() + h.data_offset), n, img.data.begin());
  return img;
}

void write_pgm(const std::string& path, const ManipMask& mask) {
  std::string out = "P5\n" + std::to_string(mask.width()) + " " + std::to_string(mask.height()) + "\n255\n";
  for (std::uint8_t v : mask.values()) out.push_back(static_cast<char>(v ? 255 : 0));
  write_file(path, out);
}

ManipMask read_pgm(const std::string& path) {
  const std::string bytes = read_file(path);
  const PnmHeader h = parse_pnm(bytes, "P5", path);
  const std::size_t n = pixels(h.width, h.height);
  if (bytes.size() - h.data_offset < n) throw FormatError(path + ": truncated PGM raster");
  std::vector<std::uint8_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<unsigned char>(bytes[h.data_offset + i]) >= 128 ? 1 : 0;
  return ManipMask(h.width, h.height, std::move(v));
}

std::string encode_mapf(const ProbMap& map) {
  std::string out = "MAPF " + std::to_string(map.width()) + " " + std::to_string(map.height()) + "\n";
  for (float f : map.values()) {
    const auto u = std::bit_cast<std::uint32_t>(f);
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((u >> (8 * b)) & 0xffu));
  }
  return out;
}

ProbMap decode_mapf(const std::string& bytes) {
  const std::size_t nl = bytes.find('\n');
  if (bytes.compare(0, 5, "MAPF ") != 0 || nl == std::string::npos) throw FormatError("MAPF: bad header");
  int w = 0, h = 0;
  const std::string header = bytes.substr(5, nl - 5);
  std::size_t space = header.find(' ');
  try {
    if (space == std::string::npos) throw FormatError("MAPF: bad header");
    std::size_t used = 0;
    w = std::stoi(header.substr(0, space), &used);
    if (used != space) throw FormatError("MAPF: bad width");
    const std::string hs = header.substr(space + 1);
    h = std::stoi(hs, &used);
    if (used != hs.size()) throw FormatError("MAPF: bad height");
  } catch (const std::logic_error&) {
    throw FormatError("MAPF: bad header");
  }
  if (w < 1 || h < 1) throw FormatError("MAPF: empty map");
  const std::size_t n = pixels(w, h);
  if (bytes.size() - (nl + 1) != n * 4) throw FormatError("MAPF: payload size does not match " + header);
  std::vector<float> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t u = 0;
    for (int b = 0; b < 4; ++b) {
      u |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[nl + 1 + i * 4 + static_cast<std::size_t>(b)])) << (8 * b);
    }
    v[i] = std::bit_cast<float>(u);
  }
  try {
    return ProbMap(w, h, std::move(v));
  } catch (const UsageError& e) {
    throw FormatError(std::string("MAPF: ") + e.what());
  }
}

void write_mapf(const std::string& path, const ProbMap& map) { write_file(path, encode_mapf(map)); }

ProbMap read_mapf(const std::string& path) {
  try {
    return decode_mapf(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

}  // namespace attn
