#include "metrics/detection.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "common/errors.hpp"

namespace attn {

RocCurve roc(std::span<const ScoredSample> samples) {
  RocCurve curve;
  for (const auto& s : samples) {
    if (!std::isfinite(s.score)) throw UsageError("roc: scores must be finite");
    if (s.label == 1) {
      ++curve.positives;
    } else if (s.label == 0) {
      ++curve.negatives;
    } else {
      throw UsageError("roc: label must be 0 or 1, got " + std::to_string(s.label));
    }
  }
  if (curve.positives == 0 || curve.negatives == 0) throw UsageError("roc: need samples of both labels");

  std::vector<ScoredSample> sorted(samples.begin(), samples.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.score > b.score; });

  const auto P = static_cast<double>(curve.positives);
  const auto N = static_cast<double>(curve.negatives);
  auto push = [&](std::size_t fp, std::size_t tp) {
    RocPoint p{static_cast<double>(fp) / N, static_cast<double>(tp) / P, fp, tp};
    if (!curve.points.empty() && curve.points.back().false_positives == fp && curve.points.back().true_positives == tp) {
      return;
    }
    curve.points.push_back(p);
  };

  push(0, 0);
  std::size_t fp = 0, tp = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    const double t = sorted[i].score;
    while (i < sorted.size() && sorted[i].score == t) {
      (sorted[i].label == 1 ? tp : fp) += 1;
      ++i;
    }
    push(fp, tp);
  }
  push(curve.negatives, curve.positives);
  return curve;
}

double auc(const RocCurve& curve) {
  // twice the area in count units, kept integral until the final division
  double twice = 0.0;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const auto& a = curve.points[i - 1];
    const auto& b = curve.points[i];
    twice += static_cast<double>(b.false_positives - a.false_positives) *
             static_cast<double>(a.true_positives + b.true_positives);
  }
  return twice / (2.0 * static_cast<double>(curve.positives) * static_cast<double>(curve.negatives));
}

double eer(const RocCurve& curve) {
  const auto& pts = curve.points;
  auto gap = [](const RocPoint& p) { return p.fdr - (1.0 - p.tdr); };
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d = gap(pts[i]);
    if (d == 0.0) return pts[i].fdr;
    if (d > 0.0) {
      if (i == 0) return pts[0].fdr;
      const double dp = gap(pts[i - 1]);
      const double s = -dp / (d - dp);
      return pts[i - 1].fdr + s * (pts[i].fdr - pts[i - 1].fdr);
    }
  }
  return pts.back().fdr;
}

double tdr_at_fdr(const RocCurve& curve, double fdr) {
  if (!(fdr >= 0.0 && fdr <= 1.0)) throw UsageError("tdr_at_fdr: target must lie in [0, 1]");
  const auto& pts = curve.points;
  const double resolution = 1.0 / static_cast<double>(curve.negatives);
  if (fdr < resolution) fdr = 0.0;
  // last point with fdr <= target; points are sorted by (fdr, tdr)
  std::size_t i = 0;
  while (i + 1 < pts.size() && pts[i + 1].fdr <= fdr) ++i;
  if (pts[i].fdr == fdr || i + 1 == pts.size()) return pts[i].tdr;
  const auto& a = pts[i];
  const auto& b = pts[i + 1];
  const double s = (fdr - a.fdr) / (b.fdr - a.fdr);
  return a.tdr + s * (b.tdr - a.tdr);
}

}  // namespace attn
