#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "masks/masks.hpp"
#include "metrics/detection.hpp"
#include "model/dataset.hpp"
#include "model/patchnet.hpp"

namespace attn {

struct EvalConfig {
  Split split = Split::Test;
  double map_threshold = kDefaultMaskThreshold;
  int batch = 16;

  void validate() const;
};

struct Prediction {
  double score = 0.0;          // fake probability
  std::optional<ProbMap> map;  // at attention resolution
};

/// Forward passes in batches, in the order of `indices`.
std::vector<Prediction> predict(PatchNet& model, const Dataset& ds, std::span<const std::size_t> indices,
                                int batch = 16);

struct LocalizationSummary {
  double mean_iinc = 0.0;
  std::optional<double> mean_iou;              // over cases where IoU is defined
  std::optional<double> mean_cosine_distance;  // 1 - cosine, over defined cases
  double mean_pbca = 0.0;
};

struct CategoryReport {
  std::size_t count = 0;
  double mean_score = 0.0;
  std::optional<LocalizationSummary> localization;
};

struct EvalReport {
  std::string split;
  std::size_t count = 0;
  // Detection fields are empty when the samples hold only one label.
  std::optional<double> auc, eer, tdr_at_1pct, tdr_at_0_1pct;
  std::optional<RocCurve> roc;
  /// AUC when scoring by the mean attention-map value.
  std::optional<double> map_auc;
  std::optional<LocalizationSummary> localization;
  std::map<Category, CategoryReport> per_category;
};

/// Aggregates metrics for precomputed predictions. Localization needs a map
/// for every prediction and a mask for every sample.
EvalReport build_report(const Dataset& ds, std::span<const std::size_t> indices,
                        std::span<const Prediction> predictions, const EvalConfig& cfg);

/// Runs the model over cfg.split. Throws UsageError when the split is empty or
/// holds a single label.
EvalReport evaluate(PatchNet& model, const Dataset& ds, const EvalConfig& cfg);

std::string report_to_json(const EvalReport& report);
/// "fdr,tdr" rows of the ROC curve; header only when there is no curve.
std::string roc_to_csv(const EvalReport& report);

/// AUC over the given split, or NaN if it does not hold both labels.
double split_auc(PatchNet& model, const Dataset& ds, Split split, int batch = 16);

}  // namespace attn
