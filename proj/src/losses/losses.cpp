#include "losses/losses.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "common/errors.hpp"
#include "tensor/ops.hpp"

namespace attn {

namespace {

struct Layout {
  std::size_t samples;
  std::size_t per_sample;
  bool batched;
};

Layout map_layout(const Shape& s) {
  if (s.size() == 2) return {1, shape_size(s), false};
  if (s.size() == 3 || s.size() == 4) {
    if (s.size() == 4 && s[3] != 1) throw ShapeError("map loss: maps must have one channel, got " + shape_str(s));
    const auto n = static_cast<std::size_t>(s[0]);
    return {n, n == 0 ? 0 : shape_size(s) / n, true};
  }
  throw ShapeError("map loss: unsupported map shape " + shape_str(s));
}

Shape per_sample_shape(const Layout& l) {
  return l.batched ? Shape{static_cast<int>(l.samples)} : Shape{};
}

std::vector<std::int32_t> replay_or_record(Tape& tape, std::vector<std::int32_t> decided) {
  BranchLog* log = tape.branches();
  if (log != nullptr && log->replaying()) return log->next(decided.size());
  if (log != nullptr) log->push(decided);
  return decided;
}

void check_label(int label) {
  if (label != kLabelReal && label != kLabelFake) {
    throw UsageError("label must be 0 (real) or 1 (fake), got " + std::to_string(label));
  }
}

}  // namespace

std::string_view to_string(MapRegime r) {
  switch (r) {
    case MapRegime::Supervised: return "supervised";
    case MapRegime::Weak: return "weak";
    case MapRegime::Unsupervised: return "unsupervised";
  }
  return "supervised";
}

MapRegime map_regime_from_string(std::string_view s) {
  if (s == "supervised") return MapRegime::Supervised;
  if (s == "weak") return MapRegime::Weak;
  if (s == "unsupervised") return MapRegime::Unsupervised;
  throw UsageError("unknown loss regime '" + std::string(s) + "' (expected supervised|weak|unsupervised)");
}

void LossConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw UsageError("loss.lambda must be a finite value >= 0");
  if (!(weak_target > 0.0 && weak_target < 1.0)) throw UsageError("loss.weak_target must lie in (0, 1)");
}

Var classification_loss(Var logits, std::span<const int> labels) {
  const Tensor& x = logits.value();
  bool batched = false;
  std::size_t rows = 1, K = 0;
  if (x.ndim() == 1) {
    K = static_cast<std::size_t>(x.dim(0));
  } else if (x.ndim() == 2) {
    batched = true;
    rows = static_cast<std::size_t>(x.dim(0));
    K = static_cast<std::size_t>(x.dim(1));
  } else {
    throw ShapeError("classification_loss: logits must be K or N x K, got " + shape_str(x.shape()));
  }
  if (K < 2) throw ShapeError("classification_loss: need at least two classes");
  if (labels.size() != rows) throw ShapeError("classification_loss: label count does not match batch");
  for (int l : labels) check_label(l);

  Tensor loss(batched ? Shape{static_cast<int>(rows)} : Shape{});
  std::vector<double> probs(rows * K);
  for (std::size_t r = 0; r < rows; ++r) {
    const float* xr = x.ptr() + r * K;
    const std::size_t arg = static_cast<std::size_t>(std::max_element(xr, xr + K) - xr);
    const double m = xr[arg];
    double others = 0.0;
    for (std::size_t j = 0; j < K; ++j) {
      if (j != arg) others += std::exp(static_cast<double>(xr[j]) - m);
    }
    const double lse_shift = std::log1p(others);
    const auto label = static_cast<std::size_t>(labels[r]);
    loss[r] = static_cast<float>((m - static_cast<double>(xr[label])) + lse_shift);
    for (std::size_t j = 0; j < K; ++j) {
      probs[r * K + j] = std::exp(static_cast<double>(xr[j]) - m - lse_shift);
    }
  }
  std::vector<int> lab(labels.begin(), labels.end());
  const int xi = logits.id();
  return logits.tape().record(std::move(loss), {logits}, [xi, rows, K, probs = std::move(probs), lab = std::move(lab)](Tape& t, int yi) {
    const Tensor& dy = t.grad(yi);
    Tensor& dx = t.grad(xi);
    for (std::size_t r = 0; r < rows; ++r) {
      const double g = dy[r];
      for (std::size_t j = 0; j < K; ++j) {
        const double onehot = (j == static_cast<std::size_t>(lab[r])) ? 1.0 : 0.0;
        dx[r * K + j] += static_cast<float>(g * (probs[r * K + j] - onehot));
      }
    }
  });
}

Var map_loss_supervised(Var prob_map, const Tensor& gt) {
  const Tensor& p = prob_map.value();
  if (p.size() != gt.size() || (p.shape() != gt.shape() && map_layout(gt.shape()).samples != map_layout(p.shape()).samples)) {
    throw ShapeError("map_loss_supervised: prediction " + shape_str(p.shape()) + " vs target " + shape_str(gt.shape()));
  }
  const Layout l = map_layout(p.shape());
  std::vector<std::int32_t> sign(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const float d = p[i] - gt[i];
    sign[i] = d > 0.0f ? 1 : (d < 0.0f ? -1 : 0);
  }
  sign = replay_or_record(prob_map.tape(), std::move(sign));
  Tensor loss(per_sample_shape(l));
  for (std::size_t s = 0; s < l.samples; ++s) {
    double acc = 0.0;
    for (std::size_t j = 0; j < l.per_sample; ++j) {
      const std::size_t i = s * l.per_sample + j;
      acc += sign[i] * (static_cast<double>(p[i]) - static_cast<double>(gt[i]));
    }
    loss[s] = static_cast<float>(acc / static_cast<double>(l.per_sample));
  }
  const int pi = prob_map.id();
  return prob_map.tape().record(std::move(loss), {prob_map}, [pi, l, sign = std::move(sign)](Tape& t, int yi) {
    const Tensor& dy = t.grad(yi);
    Tensor& dp = t.grad(pi);
    for (std::size_t s = 0; s < l.samples; ++s) {
      const double g = static_cast<double>(dy[s]) / static_cast<double>(l.per_sample);
      for (std::size_t j = 0; j < l.per_sample; ++j) {
        const std::size_t i = s * l.per_sample + j;
        dp[i] += static_cast<float>(g * sign[i]);
      }
    }
  });
}

Var map_loss_weak(Var prob_map, std::span<const int> labels, float weak_target) {
  const Tensor& p = prob_map.value();
  const Layout l = map_layout(p.shape());
  if (labels.size() != l.samples) throw ShapeError("map_loss_weak: label count does not match batch");
  for (int lb : labels) check_label(lb);

  // Per sample: real -> signs of every pixel; fake -> {argmax, sign(max - t)}.
  std::vector<std::int32_t> decisions;
  for (std::size_t s = 0; s < l.samples; ++s) {
    const float* ps = p.ptr() + s * l.per_sample;
    if (labels[s] == kLabelReal) {
      for (std::size_t j = 0; j < l.per_sample; ++j) decisions.push_back(ps[j] > 0.0f ? 1 : (ps[j] < 0.0f ? -1 : 0));
    } else {
      std::size_t arg = 0;
      for (std::size_t j = 1; j < l.per_sample; ++j) {
        if (ps[j] > ps[arg]) arg = j;
      }
      const float d = ps[arg] - weak_target;
      decisions.push_back(static_cast<std::int32_t>(arg));
      decisions.push_back(d > 0.0f ? 1 : (d < 0.0f ? -1 : 0));
    }
  }
  decisions = replay_or_record(prob_map.tape(), std::move(decisions));

  Tensor loss(per_sample_shape(l));
  std::size_t cursor = 0;
  for (std::size_t s = 0; s < l.samples; ++s) {
    const float* ps = p.ptr() + s * l.per_sample;
    if (labels[s] == kLabelReal) {
      double acc = 0.0;
      for (std::size_t j = 0; j < l.per_sample; ++j) acc += decisions[cursor++] * static_cast<double>(ps[j]);
      loss[s] = static_cast<float>(acc / static_cast<double>(l.per_sample));
    } else {
      const auto arg = static_cast<std::size_t>(decisions[cursor++]);
      const int sg = decisions[cursor++];
      loss[s] = static_cast<float>(sg * (static_cast<double>(ps[arg]) - static_cast<double>(weak_target)));
    }
  }
  std::vector<int> lab(labels.begin(), labels.end());
  const int pi = prob_map.id();
  return prob_map.tape().record(std::move(loss), {prob_map},
                                [pi, l, lab = std::move(lab), decisions = std::move(decisions)](Tape& t, int yi) {
    const Tensor& dy = t.grad(yi);
    Tensor& dp = t.grad(pi);
    std::size_t cursor = 0;
    for (std::size_t s = 0; s < l.samples; ++s) {
      const double g = dy[s];
      if (lab[s] == kLabelReal) {
        for (std::size_t j = 0; j < l.per_sample; ++j) {
          dp[s * l.per_sample + j] += static_cast<float>(g * decisions[cursor++] / static_cast<double>(l.per_sample));
        }
      } else {
        const auto arg = static_cast<std::size_t>(decisions[cursor++]);
        const int sg = decisions[cursor++];
        dp[s * l.per_sample + arg] += static_cast<float>(g * sg);
      }
    }
  });
}

Var total_loss(Var cls, std::optional<Var> map, const LossConfig& cfg) {
  cfg.validate();
  Var total = reduce_mean(cls);
  const double w = cfg.map_weight();
  if (map && w != 0.0) total = add(total, scale(reduce_mean(*map), static_cast<float>(w)));
  return total;
}

double total_loss(double cls, double map, const LossConfig& cfg) {
  cfg.validate();
  return cls + cfg.map_weight() * map;
}

}  // namespace attn
