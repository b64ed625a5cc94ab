#include "model/patchnet.hpp"

#include <cmath>
#include <string>

#include "common/errors.hpp"
#include "tensor/init.hpp"
#include "tensor/ops.hpp"

namespace attn {

namespace {

constexpr std::uint64_t kBackboneKey = 1;
constexpr std::uint64_t kAttentionKey = 2;
// [0, 1] pixels are mapped to [-2, 2] before the first convolution.
constexpr float kInputScale = 4.0f;

}  // namespace

void PatchNetConfig::validate() const {
  if (image_size < 16 || image_size % 8 != 0) {
    throw UsageError("model.image_size must be >= 16 and divisible by 8, got " + std::to_string(image_size));
  }
  for (int w : widths) {
    if (w < 1) throw UsageError("model.widths entries must be >= 1");
  }
  if (insertion_stage < 1 || insertion_stage > 3) {
    throw UsageError("model.insertion_stage must be 1, 2 or 3, got " + std::to_string(insertion_stage));
  }
}

PatchNet::PatchNet(const PatchNetConfig& cfg, std::optional<MamBasis> basis)
    : cfg_(cfg),
      basis_(std::move(basis)),
      cls_weight_("classifier.weight", Tensor({cfg.widths[3], 2})),
      cls_bias_("classifier.bias", Tensor({2})) {
  cfg_.validate();
  if (cfg_.variant == AttentionVariant::Mam) {
    if (!basis_) throw UsageError("the mam attention variant requires a fitted basis");
    const int m = cfg_.map_size();
    if (basis_->height != m || basis_->width != m) {
      throw UsageError("basis is " + std::to_string(basis_->height) + "x" + std::to_string(basis_->width) +
                       " but the attention map at stage " + std::to_string(cfg_.insertion_stage) + " is " +
                       std::to_string(m) + "x" + std::to_string(m));
    }
  } else {
    basis_.reset();
  }

  Rng backbone = Rng(cfg_.seed).derive(kBackboneKey);
  int in = 3;
  for (int s = 0; s < 4; ++s) {
    const int out = cfg_.widths[static_cast<std::size_t>(s)];
    const std::string prefix = "stage" + std::to_string(s + 1);
    convs_.push_back(Conv{Parameter(prefix + ".weight", uniform_fan_in({3, 3, in, out}, 9 * in, backbone)),
                          Parameter(prefix + ".bias", Tensor({out}))});
    in = out;
  }
  cls_weight_.value = uniform_fan_in({in, 2}, in, backbone);

  Rng att = Rng(cfg_.seed).derive(kAttentionKey);
  const int channels = cfg_.widths[static_cast<std::size_t>(cfg_.insertion_stage - 1)];
  if (cfg_.variant == AttentionVariant::Regression) {
    head_ = AttentionHead::regression(channels, att);
  } else if (cfg_.variant == AttentionVariant::Mam) {
    head_ = AttentionHead::mam(channels, cfg_.map_size(), cfg_.map_size(), basis_->n, att);
  }
}

PatchNet::Output PatchNet::forward(Tape& tape, const Tensor& images, bool trainable) {
  const int S = cfg_.image_size;
  if (images.ndim() != 4 || images.dim(1) != S || images.dim(2) != S || images.dim(3) != 3) {
    throw ShapeError("PatchNet expects N x " + std::to_string(S) + " x " + std::to_string(S) + " x 3 images, got " +
                     shape_str(images.shape()));
  }
  const bool prev = tape.grad_enabled();
  tape.set_grad_enabled(prev && trainable);

  Output out;
  Tensor centered = images;
  for (auto& v : centered.data()) v = kInputScale * (v - 0.5f);
  Var x = tape.constant(std::move(centered));
  for (int s = 0; s < 3; ++s) {
    auto& c = convs_[static_cast<std::size_t>(s)];
    x = maxpool2d(relu(conv2d(x, tape.param(c.weight), tape.param(c.bias), 1, 1)), 2);
    if (head_ && s + 1 == cfg_.insertion_stage) {
      out.attention = attend(x, *head_, basis());
      x = out.attention->refined;
    }
  }
  auto& c4 = convs_[3];
  x = relu(conv2d(x, tape.param(c4.weight), tape.param(c4.bias), 1, 1));
  out.logits = dense(global_avg_pool(x), tape.param(cls_weight_), tape.param(cls_bias_));
  tape.set_grad_enabled(prev);
  return out;
}
std::vector<Parameter*> PatchNet::parameters() {
  std::vector<Parameter*> ps;
  for (auto& c : convs_) {
    ps.push_back(&c.weight);
    ps.push_back(&c.bias);
  }
  ps.push_back(&cls_weight_);
  ps.push_back(&cls_bias_);
  if (head_) {
    for (Parameter* p : head_->parameters()) ps.push_back(p);
  }
  return ps;
}

std::vector<const Parameter*> PatchNet::parameters() const {
  auto ps = const_cast<PatchNet*>(this)->parameters();
  return {ps.begin(), ps.end()};
}

std::size_t PatchNet::parameter_count() const {
  std::size_t n = 0;
  for (const Parameter* p : parameters()) n += p->value.size();
  return n;
}

std::vector<double> fake_probabilities(const Tensor& logits) {
  if (logits.ndim() != 2 || logits.dim(1) != 2) throw ShapeError("expected N x 2 logits, got " + shape_str(logits.shape()));
  std::vector<double> p(static_cast<std::size_t>(logits.dim(0)));
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = static_cast<double>(logits[2 * i]) - static_cast<double>(logits[2 * i + 1]);
    p[i] = 1.0 / (1.0 + std::exp(d));
  }
  return p;
}

}  // namespace attn
