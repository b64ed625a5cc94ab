#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "attention/attention.hpp"
#include "attention/mam_basis.hpp"
#include "tensor/tape.hpp"

namespace attn {

struct PatchNetConfig {
  int image_size = 64;
  std::array<int, 4> widths{16, 32, 64, 64};
  int insertion_stage = 3;  // attention after pooling stage 1, 2 or 3
  AttentionVariant variant = AttentionVariant::Regression;
  std::uint64_t seed = 7;

  void validate() const;
  /// Side length of the attention map.
  int map_size() const { return image_size >> insertion_stage; }
};

/// Three [conv3x3 + relu + maxpool2] stages, the attention layer after stage
/// `insertion_stage`, one more conv3x3 + relu, global average pooling and a
/// dense 2-way classifier.
class PatchNet {
 public:
  struct Output {
    Var logits;                              // N x 2
    std::optional<AttentionOutput> attention;  // absent for the baseline
  };

  /// Backbone parameters are drawn first, so models that differ only in the
  /// attention variant share the same backbone initialization.
  PatchNet(const PatchNetConfig& cfg, std::optional<MamBasis> basis);

  /// images: N x S x S x 3 in [0, 1]. With `trainable` false the pass runs
  /// with gradients disabled on the tape.
  Output forward(Tape& tape, const Tensor& images, bool trainable = true);

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  std::size_t parameter_count() const;

  const PatchNetConfig& config() const { return cfg_; }
  const MamBasis* basis() const { return basis_ ? &*basis_ : nullptr; }
  bool has_attention() const { return head_.has_value(); }
  AttentionHead* head() { return head_ ? &*head_ : nullptr; }

 private:
  struct Conv {
    Parameter weight;
    Parameter bias;
  };

  PatchNetConfig cfg_;
  std::optional<MamBasis> basis_;
  std::vector<Conv> convs_;  // stages 1..4
  Parameter cls_weight_;
  Parameter cls_bias_;
  std::optional<AttentionHead> head_;
};

/// Softmax probability of the fake class for each row of N x 2 logits.
std::vector<double> fake_probabilities(const Tensor& logits);

}  // namespace attn
