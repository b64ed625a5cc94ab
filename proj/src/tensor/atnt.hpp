#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tensor/tensor.hpp"

namespace attn {

// ATNT tensor container:
//   "ATNT" | u32 version (=1) | u32 count |
//   count x { u16 name_len | name (UTF-8) | u8 ndim | ndim x u32 dim | f32 data }
// All integers and floats little-endian.

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

std::string encode_atnt(const std::vector<NamedTensor>& tensors);
/// Throws FormatError on bad magic, unsupported version, or truncation.
std::vector<NamedTensor> decode_atnt(std::string_view bytes);

void write_atnt(const std::string& path, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> read_atnt(const std::string& path);

/// Looks up `name`; throws FormatError when absent.
const Tensor& find_tensor(const std::vector<NamedTensor>& tensors, std::string_view name);

// Whole-file helpers shared by the format readers and writers.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view bytes);

}  // namespace attn
