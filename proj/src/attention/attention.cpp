#include "attention/attention.hpp"

#include "common/errors.hpp"
#include "tensor/init.hpp"
#include "tensor/ops.hpp"

namespace attn {

std::string_view to_string(AttentionVariant v) {
  switch (v) {
    case AttentionVariant::None: return "none";
    case AttentionVariant::Regression: return "regression";
    case AttentionVariant::Mam: return "mam";
  }
  return "none";
}

AttentionVariant attention_variant_from_string(std::string_view s) {
  if (s == "none") return AttentionVariant::None;
  if (s == "regression") return AttentionVariant::Regression;
  if (s == "mam") return AttentionVariant::Mam;
  throw UsageError("unknown attention variant '" + std::string(s) + "' (expected none|regression|mam)");
}

AttentionHead AttentionHead::regression(int channels, Rng& rng) {
  if (channels < 1) throw UsageError("attention head needs at least one channel");
  Regression p{
      Parameter("attention.reg.weight", uniform_fan_in({1, 1, channels, 1}, channels, rng)),
      Parameter("attention.reg.bias", Tensor({1})),
  };
  return AttentionHead(channels, std::move(p));
}

AttentionHead AttentionHead::mam(int channels, int height, int width, int n, Rng& rng) {
  if (channels < 1 || height < 1 || width < 1 || n < 1) throw UsageError("invalid appearance-model head dimensions");
  const int flat = height * width * kMamHiddenChannels;
  Mam p{
      Parameter("attention.mam.conv.weight",
                uniform_fan_in({3, 3, channels, kMamHiddenChannels}, 9 * channels, rng)),
      Parameter("attention.mam.conv.bias", Tensor({kMamHiddenChannels})),
      Parameter("attention.mam.dense.weight", uniform_fan_in({flat, n}, flat, rng)),
      Parameter("attention.mam.dense.bias", Tensor({n})),
  };
  return AttentionHead(channels, std::move(p));
}

AttentionVariant AttentionHead::variant() const {
  return std::holds_alternative<Regression>(params_) ? AttentionVariant::Regression : AttentionVariant::Mam;
}

std::vector<Parameter*> AttentionHead::parameters() {
  if (auto* r = std::get_if<Regression>(&params_)) return {&r->weight, &r->bias};
  auto& m = std::get<Mam>(params_);
  return {&m.conv_weight, &m.conv_bias, &m.dense_weight, &m.dense_bias};
}

Var apply_attention(Var features, Var raw_map) {
  return elemwise_mul(features, sigmoid(raw_map));
}

Var phi_regression(Var features, AttentionHead& head) {
  if (head.variant() != AttentionVariant::Regression) throw UsageError("phi_regression: head is not a regression head");
  if (features.value().ndim() != 4 || features.shape()[3] != head.channels()) {
    throw ShapeError("phi_regression: features " + shape_str(features.shape()) + " do not match head with " +
                     std::to_string(head.channels()) + " channels");
  }
  auto& p = head.regression_params();
  Tape& tape = features.tape();
  return conv2d(features, tape.param(p.weight), tape.param(p.bias), 1, 0);
}

MamMaps phi_mam(Var features, AttentionHead& head, const MamBasis& basis) {
  if (head.variant() != AttentionVariant::Mam) throw UsageError("phi_mam: head is not an appearance-model head");
  const Shape& fs = features.shape();
  if (fs.size() != 4 || fs[3] != head.channels()) {
    throw ShapeError("phi_mam: features " + shape_str(fs) + " do not match head");
  }
  const int N = fs[0], H = fs[1], W = fs[2];
  if (basis.height != H || basis.width != W) {
    throw ShapeError("phi_mam: basis is " + std::to_string(basis.height) + "x" + std::to_string(basis.width) +
                     " but features are " + std::to_string(H) + "x" + std::to_string(W));
  }
  auto& p = head.mam_params();
  if (p.dense_weight.value.dim(0) != H * W * kMamHiddenChannels || p.dense_weight.value.dim(1) != basis.n) {
    throw ShapeError("phi_mam: head dense layer " + shape_str(p.dense_weight.value.shape()) +
                     " does not match basis with n=" + std::to_string(basis.n));
  }
  Tape& tape = features.tape();
  Var hidden = relu(conv2d(features, tape.param(p.conv_weight), tape.param(p.conv_bias), 1, 1));
  Var flat = reshape(hidden, {N, H * W * kMamHiddenChannels});
  Var alpha = dense(flat, tape.param(p.dense_weight), tape.param(p.dense_bias));

  // A^T as an n x (H*W) weight so that dense(alpha, A^T, mean) = mean + A alpha
  const auto D = static_cast<std::size_t>(H * W);
  const auto n = static_cast<std::size_t>(basis.n);
  Tensor at({basis.n, H * W});
  for (std::size_t j = 0; j < D; ++j) {
    for (std::size_t k = 0; k < n; ++k) at[k * D + j] = basis.basis[j * n + k];
  }
  Var maps = dense(alpha, tape.constant(std::move(at)), tape.constant(basis.mean.reshaped({H * W})));
  return {alpha, reshape(maps, {N, H, W, 1})};
}

AttentionOutput attend(Var features, AttentionHead& head, const MamBasis* basis) {
  AttentionOutput out;
  if (head.variant() == AttentionVariant::Regression) {
    out.raw_map = phi_regression(features, head);
  } else {
    if (basis == nullptr) throw UsageError("appearance-model attention requires a fitted basis");
    auto m = phi_mam(features, head, *basis);
    out.alpha = m.alpha;
    out.raw_map = m.raw_map;
  }
  out.prob_map = sigmoid(out.raw_map);
  out.refined = elemwise_mul(features, out.prob_map);
  return out;
}

}  // namespace attn
