#include "metrics/localization.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "common/errors.hpp"
#include "masks/masks.hpp"

namespace attn {

namespace {

template <typename A, typename B>
void check_same(const A& a, const B& b, const char* op) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw UsageError(std::string(op) + ": size mismatch (" + std::to_string(a.width()) + "x" +
                     std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                     std::to_string(b.height()) + ")");
  }
}

struct Counts {
  std::size_t pred = 0, gt = 0, inter = 0, uni = 0, agree = 0;
};

Counts count(const ManipMask& pred, const ManipMask& gt) {
  Counts c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] != 0;
    const bool g = gt[i] != 0;
    c.pred += p;
    c.gt += g;
    c.inter += p && g;
    c.uni += p || g;
    c.agree += p == g;
  }
  return c;
}

}  // namespace

double iinc(const ManipMask& pred, const ManipMask& gt) {
  check_same(pred, gt, "iinc");
  const Counts c = count(pred, gt);
  if (c.pred == 0 && c.gt == 0) return 0.0;
  const double u_mean = static_cast<double>(c.uni) / static_cast<double>(pred.size());
  const double pre = 1.0 / (3.0 - u_mean);
  if (c.pred == 0 || c.gt == 0) return pre;
  const double inter = static_cast<double>(c.inter);
  // grouped so swapping the arguments gives a bit-identical result
  return pre * (2.0 - (inter / static_cast<double>(c.pred) + inter / static_cast<double>(c.gt)));
}

std::optional<double> iou(const ManipMask& pred, const ManipMask& gt) {
  check_same(pred, gt, "iou");
  const Counts c = count(pred, gt);
  if (c.uni == 0) return std::nullopt;
  return static_cast<double>(c.inter) / static_cast<double>(c.uni);
}

std::optional<double> cosine_sim(const ProbMap& pred, const ProbMap& gt) {
  check_same(pred, gt, "cosine_sim");
  double dot = 0.0, np = 0.0, ng = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p = pred[i];
    const double g = gt[i];
    dot += p * g;
    np += p * p;
    ng += g * g;
  }
  if (np == 0.0 || ng == 0.0) return std::nullopt;
  return std::min(1.0, dot / (std::sqrt(np) * std::sqrt(ng)));
}

double pbca(const ManipMask& pred, const ManipMask& gt) {
  check_same(pred, gt, "pbca");
  return static_cast<double>(count(pred, gt).agree) / static_cast<double>(pred.size());
}

LocalizationScores score_localization(const ProbMap& pred, const ManipMask& gt, double thresh) {
  check_same(pred, gt, "score_localization");
  const ManipMask bin = binarize(pred, thresh);
  LocalizationScores s;
  s.iinc = iinc(bin, gt);
  s.iou = iou(bin, gt);
  s.cosine = cosine_sim(pred, ProbMap::from_mask(gt));
  s.pbca = pbca(bin, gt);
  return s;
}

}  // namespace attn
