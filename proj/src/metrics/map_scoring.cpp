#include "metrics/map_scoring.hpp"

#include <filesystem>
#include <map>

#include <json.hpp>

#include "common/errors.hpp"
#include "masks/masks.hpp"

namespace attn {

namespace {

namespace fs = std::filesystem;

std::map<std::string, fs::path> list_maps(const std::string& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError(dir, "not a directory");
  std::map<std::string, fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    if (ext != ".mapf" && ext != ".pgm") continue;
    const auto stem = entry.path().stem().string();
    if (out.count(stem)) throw UsageError(dir + ": more than one map named '" + stem + "'");
    out[stem] = entry.path();
  }
  if (ec) throw IoError(dir, ec.message());
  return out;
}

ProbMap read_pred(const fs::path& p) {
  if (p.extension() == ".mapf") return read_mapf(p.string());
  return ProbMap::from_mask(read_pgm(p.string()));
}

ManipMask read_gt(const fs::path& p, double thresh) {
  if (p.extension() == ".mapf") return binarize(read_mapf(p.string()), thresh);
  return read_pgm(p.string());
}

}  // namespace

MapScoreReport score_map_dirs(const std::string& pred_dir, const std::string& gt_dir, double thresh) {
  const auto preds = list_maps(pred_dir);
  const auto gts = list_maps(gt_dir);
  std::string unmatched;
  for (const auto& [name, _] : preds) {
    if (!gts.count(name)) unmatched += " " + name + " (prediction only)";
  }
  for (const auto& [name, _] : gts) {
    if (!preds.count(name)) unmatched += " " + name + " (ground truth only)";
  }
  if (!unmatched.empty()) throw UsageError("unpaired maps:" + unmatched);
  if (preds.empty()) throw UsageError("no .mapf or .pgm maps found in " + pred_dir);

  MapScoreReport r;
  std::size_t n_iou = 0, n_cos = 0;
  double iou_sum = 0.0, cos_sum = 0.0;
  for (const auto& [name, pred_path] : preds) {
    ProbMap pred = read_pred(pred_path);
    const ManipMask gt = read_gt(gts.at(name), thresh);
    if (pred.width() != gt.width() || pred.height() != gt.height()) {
      pred = upsample_nearest(pred, gt.height(), gt.width());
    }
    ScoredPair sp{name, score_localization(pred, gt, thresh)};
    r.mean_iinc += sp.scores.iinc;
    r.mean_pbca += sp.scores.pbca;
    if (sp.scores.iou) {
      ++n_iou;
      iou_sum += *sp.scores.iou;
    }
    if (sp.scores.cosine) {
      ++n_cos;
      cos_sum += 1.0 - *sp.scores.cosine;
    }
    r.pairs.push_back(std::move(sp));
  }
  const auto n = static_cast<double>(r.pairs.size());
  r.mean_iinc /= n;
  r.mean_pbca /= n;
  if (n_iou > 0) r.mean_iou = iou_sum / static_cast<double>(n_iou);
  if (n_cos > 0) r.mean_cosine_distance = cos_sum / static_cast<double>(n_cos);
  return r;
}

std::string map_score_report_to_json(const MapScoreReport& r) {
  using ordered_json = nlohmann::ordered_json;
  auto opt = [](const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); };
  ordered_json j;
  j["count"] = r.pairs.size();
  j["mean_iinc"] = r.mean_iinc;
  j["mean_iou"] = opt(r.mean_iou);
  j["mean_cosine_distance"] = opt(r.mean_cosine_distance);
  j["mean_pbca"] = r.mean_pbca;
  ordered_json files = ordered_json::array();
  for (const auto& p : r.pairs) {
    ordered_json f;
    f["name"] = p.name;
    f["iinc"] = p.scores.iinc;
    f["iou"] = opt(p.scores.iou);
    f["cosine"] = opt(p.scores.cosine);
    f["pbca"] = p.scores.pbca;
    files.push_back(f);
  }
  j["files"] = files;
  return j.dump(2) + "\n";
}

}  // namespace attn
