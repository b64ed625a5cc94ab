#include "tensor/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "common/errors.hpp"
#include "tensor/rng.hpp"

namespace attn {

namespace {

struct Evaluation {
  double loss;
  std::uint64_t signature;
};

Evaluation evaluate(const LossBuilder& build, BranchLog& log, BranchLog::Mode mode) {
  Tape tape;
  log.start(mode);
  tape.attach(&log);
  Var loss = build(tape);
  if (loss.value().size() != 1) throw UsageError("grad_check: loss must be a scalar");
  return {static_cast<double>(loss.value()[0]), mode == BranchLog::Mode::Record ? log.signature() : 0};
}

}  // namespace

GradCheckResult grad_check(const LossBuilder& build, std::span<Parameter* const> params,
                           const GradCheckOptions& options) {
  if (!(options.eps > 0.0f)) throw UsageError("grad_check: eps must be positive");

  BranchLog base_log;
  std::vector<Tensor> analytic;
  std::uint64_t base_signature = 0;
  {
    Tape tape;
    base_log.start(BranchLog::Mode::Record);
    tape.attach(&base_log);
    Var loss = build(tape);
    tape.backward(loss);
    base_signature = base_log.signature();
    for (Parameter* p : params) analytic.push_back(p->grad);
  }

  Rng rng(options.seed, 0x67726164ULL);
  GradCheckResult result;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Parameter& p = *params[pi];
    std::vector<std::size_t> coords(p.value.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (options.samples_per_param != 0 && options.samples_per_param < coords.size()) {
      rng.shuffle(std::span<std::size_t>(coords));
      coords.resize(options.samples_per_param);
    }
    for (std::size_t c : coords) {
      const float original = p.value[c];
      const float up = original + options.eps;
      const float down = original - options.eps;
      Evaluation plus{}, minus{};
      if (options.freeze_branches) {
        p.value[c] = up;
        plus = evaluate(build, base_log, BranchLog::Mode::Replay);
        p.value[c] = down;
        minus = evaluate(build, base_log, BranchLog::Mode::Replay);
      } else {
        BranchLog log;
        p.value[c] = up;
        plus = evaluate(build, log, BranchLog::Mode::Record);
        p.value[c] = down;
        minus = evaluate(build, log, BranchLog::Mode::Record);
      }
      p.value[c] = original;
      if (!options.freeze_branches &&
          (plus.signature != base_signature || minus.signature != base_signature)) {
        ++result.skipped;
        continue;
      }
      const double h = static_cast<double>(up) - static_cast<double>(down);
      const double numeric = (plus.loss - minus.loss) / h;
      const double err = std::abs(static_cast<double>(analytic[pi][c]) - numeric) / std::max(1.0, std::abs(numeric));
      result.max_rel_error = std::max(result.max_rel_error, err);
      ++result.checked;
    }
  }
  return result;
}

}  // namespace attn
