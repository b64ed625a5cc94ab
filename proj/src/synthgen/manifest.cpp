#include "synthgen/manifest.hpp"

#include <json.hpp>

#include "common/errors.hpp"
#include "tensor/atnt.hpp"

namespace attn {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(Category c) {
  switch (c) {
    case Category::Real: return "real";
    case Category::PartialFake: return "partial_fake";
    case Category::EntireFake: return "entire_fake";
  }
  return "?";
}

std::string_view to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "?";
}

Category category_from_string(std::string_view s) {
  if (s == "real") return Category::Real;
  if (s == "partial_fake") return Category::PartialFake;
  if (s == "entire_fake") return Category::EntireFake;
  throw FormatError("unknown label '" + std::string(s) + "'");
}

Split split_from_string(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "val") return Split::Val;
  if (s == "test") return Split::Test;
  throw UsageError("unknown split '" + std::string(s) + "' (expected train, val or test)");
}

std::string manifest_to_jsonl(const DatasetManifest& manifest) {
  std::string out;
  for (const auto& r : manifest.records) {
    ordered_json j;
    j["image_path"] = r.image_path;
    j["mask_path"] = r.mask_path;
    j["label"] = std::string(to_string(r.label));
    j["split"] = std::string(to_string(r.split));
    j["seed"] = r.seed;
    if (r.source_path) j["source_path"] = *r.source_path;
    out += j.dump();
    out += '\n';
  }
  return out;
}

DatasetManifest manifest_from_jsonl(std::string_view text) {
  DatasetManifest m;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      ManifestRecord r;
      r.image_path = j.at("image_path").get<std::string>();
      r.mask_path = j.at("mask_path").get<std::string>();
      r.label = category_from_string(j.at("label").get<std::string>());
      const auto split = j.at("split").get<std::string>();
      if (split != "train" && split != "val" && split != "test") throw FormatError("unknown split '" + split + "'");
      r.split = split_from_string(split);
      r.seed = j.at("seed").get<std::uint64_t>();
      if (j.contains("source_path") && !j.at("source_path").is_null()) r.source_path = j.at("source_path").get<std::string>();
      m.records.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("manifest line " + std::to_string(line_no) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError("manifest line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return m;
}

void write_manifest(const std::string& path, const DatasetManifest& manifest) {
  write_file(path, manifest_to_jsonl(manifest));
}

DatasetManifest read_manifest(const std::string& path) {
  try {
    return manifest_from_jsonl(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

}  // namespace attn
