#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace attn {

enum class Category { Real, PartialFake, EntireFake };
enum class Split { Train, Val, Test };

std::string_view to_string(Category c);
std::string_view to_string(Split s);
Category category_from_string(std::string_view s);
Split split_from_string(std::string_view s);

inline int binary_label(Category c) { return c == Category::Real ? 0 : 1; }

struct ManifestRecord {
  std::string image_path;  // relative to the manifest directory
  std::string mask_path;
  Category label = Category::Real;
  Split split = Split::Train;
  std::uint64_t seed = 0;
  std::optional<std::string> source_path;  // partial fakes only

  friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

struct DatasetManifest {
  std::vector<ManifestRecord> records;
};

std::string manifest_to_jsonl(const DatasetManifest& manifest);
/// Throws FormatError on malformed lines or unknown label / split names.
DatasetManifest manifest_from_jsonl(std::string_view text);

void write_manifest(const std::string& path, const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::string& path);

}  // namespace attn
