#include "model/evaluate.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <json.hpp>

#include "common/errors.hpp"
#include "metrics/localization.hpp"

namespace attn {

using ordered_json = nlohmann::ordered_json;

void EvalConfig::validate() const {
  if (!(map_threshold > 0.0 && map_threshold < 1.0)) throw UsageError("eval.map_threshold must lie in (0, 1)");
  if (batch < 1) throw UsageError("eval.batch must be >= 1");
}

std::vector<Prediction> predict(PatchNet& model, const Dataset& ds, std::span<const std::size_t> indices, int batch) {
  if (batch < 1) throw UsageError("predict: batch must be >= 1");
  std::vector<Prediction> out;
  out.reserve(indices.size());
  for (std::size_t start = 0; start < indices.size(); start += static_cast<std::size_t>(batch)) {
    const auto chunk = indices.subspan(start, std::min(indices.size() - start, static_cast<std::size_t>(batch)));
    Tape tape;
    const auto fwd = model.forward(tape, image_batch(ds, chunk), false);
    const auto scores = fake_probabilities(fwd.logits.value());
    for (std::size_t k = 0; k < chunk.size(); ++k) {
      Prediction p{scores[k], std::nullopt};
      if (fwd.attention) {
        const Tensor& pm = fwd.attention->prob_map.value();  // N x H x W x 1
        const int h = pm.dim(1), w = pm.dim(2);
        const auto per = static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
        std::vector<float> v(pm.data().begin() + static_cast<std::ptrdiff_t>(k * per),
                             pm.data().begin() + static_cast<std::ptrdiff_t>((k + 1) * per));
        p.map = ProbMap(w, h, std::move(v));
      }
      out.push_back(std::move(p));
    }
  }
  return out;
}

namespace {

struct LocAccumulator {
  std::size_t n = 0, n_iou = 0, n_cos = 0;
  double iinc = 0.0, iou = 0.0, cos_dist = 0.0, pbca = 0.0;

  void add(const LocalizationScores& s) {
    ++n;
    iinc += s.iinc;
    pbca += s.pbca;
    if (s.iou) {
      ++n_iou;
      iou += *s.iou;
    }
    if (s.cosine) {
      ++n_cos;
      cos_dist += 1.0 - *s.cosine;
    }
  }

  std::optional<LocalizationSummary> summary() const {
    if (n == 0) return std::nullopt;
    LocalizationSummary s;
    s.mean_iinc = iinc / static_cast<double>(n);
    s.mean_pbca = pbca / static_cast<double>(n);
    if (n_iou > 0) s.mean_iou = iou / static_cast<double>(n_iou);
    if (n_cos > 0) s.mean_cosine_distance = cos_dist / static_cast<double>(n_cos);
    return s;
  }
};

bool both_labels(std::span<const ScoredSample> s) {
  bool real = false, fake = false;
  for (const auto& x : s) (x.label == 1 ? fake : real) = true;
  return real && fake;
}

}  // namespace

EvalReport build_report(const Dataset& ds, std::span<const std::size_t> indices,
                        std::span<const Prediction> predictions, const EvalConfig& cfg) {
  cfg.validate();
  if (indices.size() != predictions.size()) throw UsageError("build_report: one prediction per sample is required");
  EvalReport r;
  r.split = std::string(to_string(cfg.split));
  r.count = indices.size();

  std::vector<ScoredSample> scored, map_scored;
  bool have_maps = !predictions.empty();
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const Sample& s = ds.samples[indices[k]];
    scored.push_back({predictions[k].score, s.label()});
    if (!predictions[k].map) {
      have_maps = false;
    } else {
      double mean = 0.0;
      for (float v : predictions[k].map->values()) mean += v;
      map_scored.push_back({mean / static_cast<double>(predictions[k].map->size()), s.label()});
    }
  }

  if (both_labels(scored)) {
    r.roc = roc(scored);
    r.auc = auc(*r.roc);
    r.eer = eer(*r.roc);
    r.tdr_at_1pct = tdr_at_fdr(*r.roc, 0.01);
    r.tdr_at_0_1pct = tdr_at_fdr(*r.roc, 0.001);
    if (have_maps) r.map_auc = auc(roc(map_scored));
  }

  LocAccumulator all;
  std::map<Category, LocAccumulator> per;
  std::map<Category, double> score_sum;
  for (Category c : {Category::Real, Category::PartialFake, Category::EntireFake}) {
    r.per_category[c] = CategoryReport{};
    per[c] = LocAccumulator{};
    score_sum[c] = 0.0;
  }
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const Sample& s = ds.samples[indices[k]];
    ++r.per_category[s.category].count;
    score_sum[s.category] += predictions[k].score;
    if (!have_maps) continue;
    if (!s.mask) throw UsageError("no ground-truth mask for record " + s.image_path);
    const ProbMap up = upsample_nearest(*predictions[k].map, s.mask->height(), s.mask->width());
    const LocalizationScores ls = score_localization(up, *s.mask, cfg.map_threshold);
    all.add(ls);
    per[s.category].add(ls);
  }
  for (auto& [c, cr] : r.per_category) {
    if (cr.count > 0) cr.mean_score = score_sum[c] / static_cast<double>(cr.count);
    cr.localization = per[c].summary();
  }
  r.localization = all.summary();
  return r;
}

EvalReport evaluate(PatchNet& model, const Dataset& ds, const EvalConfig& cfg) {
  cfg.validate();
  const auto idx = ds.indices(cfg.split);
  if (idx.empty()) throw UsageError(std::string("split '") + std::string(to_string(cfg.split)) + "' is empty");
  bool real = false, fake = false;
  for (std::size_t i : idx) (ds.samples[i].label() == 1 ? fake : real) = true;
  if (!(real && fake)) {
    throw UsageError(std::string("split '") + std::string(to_string(cfg.split)) +
                     "' holds a single class; detection metrics need both labels");
  }
  const auto preds = predict(model, ds, idx, cfg.batch);
  return build_report(ds, idx, preds, cfg);
}

double split_auc(PatchNet& model, const Dataset& ds, Split split, int batch) {
  const auto idx = ds.indices(split);
  std::vector<ScoredSample> scored;
  const auto preds = predict(model, ds, idx, batch);
  for (std::size_t k = 0; k < idx.size(); ++k) scored.push_back({preds[k].score, ds.samples[idx[k]].label()});
  if (!both_labels(scored)) return std::numeric_limits<double>::quiet_NaN();
  return auc(roc(scored));
}

namespace {

ordered_json opt(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

void put_localization(ordered_json& j, const std::optional<LocalizationSummary>& loc) {
  j["mean_iinc"] = loc ? ordered_json(loc->mean_iinc) : ordered_json(nullptr);
  j["mean_iou"] = loc ? opt(loc->mean_iou) : ordered_json(nullptr);
  j["mean_cosine_distance"] = loc ? opt(loc->mean_cosine_distance) : ordered_json(nullptr);
  j["mean_pbca"] = loc ? ordered_json(loc->mean_pbca) : ordered_json(nullptr);
}

}  // namespace

std::string report_to_json(const EvalReport& r) {
  ordered_json j;
  j["split"] = r.split;
  j["count"] = r.count;
  j["auc"] = opt(r.auc);
  j["eer"] = opt(r.eer);
  j["tdr_at_1pct"] = opt(r.tdr_at_1pct);
  j["tdr_at_0_1pct"] = opt(r.tdr_at_0_1pct);
  j["map_auc"] = opt(r.map_auc);
  put_localization(j, r.localization);
  ordered_json cats = ordered_json::object();
  for (const auto& [c, cr] : r.per_category) {
    ordered_json cj;
    cj["count"] = cr.count;
    cj["mean_score"] = cr.count > 0 ? ordered_json(cr.mean_score) : ordered_json(nullptr);
    put_localization(cj, cr.localization);
    cats[std::string(to_string(c))] = cj;
  }
  j["per_category"] = cats;
  return j.dump(2) + "\n";
}

std::string roc_to_csv(const EvalReport& r) {
  std::string out = "fdr,tdr\n";
  if (!r.roc) return out;
  for (const auto& p : r.roc->points) out += fmt::format("{},{}\n", p.fdr, p.tdr);
  return out;
}

}  // namespace attn
