#include "model/adam.hpp"

#include <cmath>
#include <string>

#include "common/errors.hpp"

namespace attn {

void AdamConfig::validate() const {
  if (!(lr > 0.0)) throw UsageError("train.lr must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw UsageError("train.beta1 and train.beta2 must lie in [0, 1)");
  }
  if (!(eps > 0.0)) throw UsageError("train.eps must be > 0");
}

void adam_step(std::span<Parameter* const> params, AdamState& state, const AdamConfig& cfg) {
  if (state.step < 0) throw UsageError("adam state step must be >= 0");
  if (state.m.empty() && state.v.empty()) {
    for (const Parameter* p : params) {
      state.m.emplace_back(p->value.shape());
      state.v.emplace_back(p->value.shape());
    }
  }
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw ShapeError("adam state holds " + std::to_string(state.m.size()) + " moments for " +
                     std::to_string(params.size()) + " parameters");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    const Parameter& p = *params[k];
    if (state.m[k].shape() != p.value.shape() || state.v[k].shape() != p.value.shape() ||
        p.grad.shape() != p.value.shape()) {
      throw ShapeError("adam state shape mismatch for " + p.name);
    }
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    float* w = p.value.ptr();
    const float* g = p.grad.ptr();
    float* m = state.m[k].ptr();
    float* v = state.v[k].ptr();
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double gi = g[i];
      const double mi = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * gi;
      const double vi = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * gi * gi;
      m[i] = static_cast<float>(mi);
      v[i] = static_cast<float>(vi);
      const double update = cfg.lr * (mi / c1) / (std::sqrt(vi / c2) + cfg.eps);
      w[i] = static_cast<float>(w[i] - update);
    }
  }
}

}  // namespace attn
