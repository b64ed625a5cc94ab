#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace attn {

struct ScoredSample {
  double score;  // probability of fake
  int label;     // 0 real, 1 fake
};

struct RocPoint {
  double fdr;
  double tdr;
  std::size_t false_positives;
  std::size_t true_positives;
};

/// Threshold sweep over every distinct score (predict fake when score >= t),
/// bracketed by +inf and -inf. Starts at (0, 0) and ends at (1, 1).
struct RocCurve {
  std::vector<RocPoint> points;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

/// Throws UsageError unless both labels are present.
RocCurve roc(std::span<const ScoredSample> samples);

/// Trapezoidal area; equals the Mann-Whitney statistic with ties counted 1/2.
double auc(const RocCurve& curve);

/// Rate where FDR = 1 - TDR, linearly interpolated between the bracketing
/// points.
double eer(const RocCurve& curve);

/// TDR at the given FDR by linear interpolation. A target below the FDR
/// resolution of the negative set (1 / negatives) gets the TDR at FDR = 0.
double tdr_at_fdr(const RocCurve& curve, double fdr);

}  // namespace attn
