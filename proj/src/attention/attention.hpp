#pragma once

#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "attention/mam_basis.hpp"
#include "tensor/rng.hpp"
#include "tensor/tape.hpp"

namespace attn {

enum class AttentionVariant { None, Regression, Mam };

std::string_view to_string(AttentionVariant v);
AttentionVariant attention_variant_from_string(std::string_view s);

/// Hidden width of the alpha regressor's convolution.
inline constexpr int kMamHiddenChannels = 8;

/// Parameters of the map estimator. Holds exactly one variant's tensors:
/// a 1x1 conv C -> 1 for direct regression, or conv 3x3 C -> 8 plus a dense
/// layer (H*W*8) -> n for the appearance model.
class AttentionHead {
 public:
  struct Regression {
    Parameter weight;  // 1 x 1 x C x 1
    Parameter bias;    // 1
  };
  struct Mam {
    Parameter conv_weight;   // 3 x 3 x C x 8
    Parameter conv_bias;     // 8
    Parameter dense_weight;  // (H*W*8) x n
    Parameter dense_bias;    // n
  };

  static AttentionHead regression(int channels, Rng& rng);
  static AttentionHead mam(int channels, int height, int width, int n, Rng& rng);

  AttentionVariant variant() const;
  int channels() const { return channels_; }

  std::vector<Parameter*> parameters();
  Regression& regression_params() { return std::get<Regression>(params_); }
  Mam& mam_params() { return std::get<Mam>(params_); }

 private:
  AttentionHead(int channels, std::variant<Regression, Mam> params)
      : channels_(channels), params_(std::move(params)) {}

  int channels_;
  std::variant<Regression, Mam> params_;
};

struct AttentionOutput {
  Var raw_map;   // N x H x W x 1, pre-sigmoid
  Var prob_map;  // sigmoid(raw_map)
  Var refined;   // F * prob_map, broadcast over channels
  std::optional<Var> alpha;  // N x n, appearance model only
};

/// F' = F * sigmoid(raw_map), broadcast over the channel dimension.
Var apply_attention(Var features, Var raw_map);

/// raw_map = 1x1 conv (C -> 1) over the N x H x W x C features.
Var phi_regression(Var features, AttentionHead& head);

struct MamMaps {
  Var alpha;
  Var raw_map;
};

/// alpha = dense(flatten(relu(conv3x3(F)))); raw_map = mean + A * alpha, with
/// mean and A held constant.
MamMaps phi_mam(Var features, AttentionHead& head, const MamBasis& basis);

/// Runs the head's estimator, then masks the features.
AttentionOutput attend(Var features, AttentionHead& head, const MamBasis* basis);

}  // namespace attn
