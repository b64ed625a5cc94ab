#include "tensor/atnt.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "common/errors.hpp"

namespace attn {

namespace {

constexpr char kMagic[4] = {'A', 'T', 'N', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put_le(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<T>(static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i));
    }
    pos_ += sizeof(T);
    return v;
  }

  std::string_view take(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw FormatError("ATNT: truncated container");
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_atnt(const std::vector<NamedTensor>& tensors) {
  std::string out(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& nt : tensors) {
    if (nt.name.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw UsageError("ATNT: tensor name too long: " + nt.name.substr(0, 32) + "...");
    }
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(nt.name.size()));
    out += nt.name;
    put_le<std::uint8_t>(out, static_cast<std::uint8_t>(nt.tensor.ndim()));
    for (int d : nt.tensor.shape()) put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    for (float v : nt.tensor.data()) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

std::vector<NamedTensor> decode_atnt(std::string_view bytes) {
  Reader r(bytes);
  auto magic = r.take(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0) throw FormatError("ATNT: bad magic");
  const auto version = r.get<std::uint32_t>();
  if (version != kVersion) throw FormatError("ATNT: unsupported version " + std::to_string(version));
  const auto count = r.get<std::uint32_t>();
  std::vector<NamedTensor> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor nt;
    const auto name_len = r.get<std::uint16_t>();
    nt.name = std::string(r.take(name_len));
    const auto ndim = r.get<std::uint8_t>();
    if (ndim > Tensor::kMaxDims) throw FormatError("ATNT: tensor '" + nt.name + "' has rank above 4");
    Shape shape;
    std::uint64_t elements = 1;
    for (std::uint8_t d = 0; d < ndim; ++d) {
      const auto extent = r.get<std::uint32_t>();
      if (extent > static_cast<std::uint32_t>(std::numeric_limits<int>::max())) {
        throw FormatError("ATNT: extent overflow in '" + nt.name + "'");
      }
      shape.push_back(static_cast<int>(extent));
      elements *= extent;
      if (elements > bytes.size()) throw FormatError("ATNT: truncated container");
    }
    std::vector<float> data(static_cast<std::size_t>(elements));
    for (auto& v : data) v = std::bit_cast<float>(r.get<std::uint32_t>());
    nt.tensor = Tensor(std::move(shape), std::move(data));
    out.push_back(std::move(nt));
  }
  if (!r.done()) throw FormatError("ATNT: trailing bytes after last tensor");
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError(path, "read failed");
  return bytes;
}

void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(path, "write failed");
}

void write_atnt(const std::string& path, const std::vector<NamedTensor>& tensors) {
  write_file(path, encode_atnt(tensors));
}

std::vector<NamedTensor> read_atnt(const std::string& path) {
  const std::string bytes = read_file(path);
  try {
    return decode_atnt(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

const Tensor& find_tensor(const std::vector<NamedTensor>& tensors, std::string_view name) {
  for (const auto& nt : tensors) {
    if (nt.name == name) return nt.tensor;
  }
  throw FormatError("ATNT: missing tensor '" + std::string(name) + "'");
}

}  // namespace attn
