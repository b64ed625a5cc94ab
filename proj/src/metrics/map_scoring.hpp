#pragma once

#include <optional>
#include <string>
#include <vector>

#include "metrics/localization.hpp"

namespace attn {

struct ScoredPair {
  std::string name;  // shared basename without extension
  LocalizationScores scores;
};

struct MapScoreReport {
  std::vector<ScoredPair> pairs;  // sorted by name
  double mean_iinc = 0.0;
  std::optional<double> mean_iou;
  std::optional<double> mean_cosine_distance;
  double mean_pbca = 0.0;
};

/// Pairs files by basename across two directories and scores each pair.
/// Predictions may be MAPF (.mapf) or PGM (.pgm); a prediction smaller than
/// its ground truth is enlarged by nearest neighbour. Ground truth PGM is used
/// as is, ground truth MAPF is binarized at `thresh`. A basename present in
/// only one directory throws UsageError listing the unmatched names.
MapScoreReport score_map_dirs(const std::string& pred_dir, const std::string& gt_dir, double thresh);

std::string map_score_report_to_json(const MapScoreReport& report);

}  // namespace attn
