#include "support/gradients.hpp"

#include <algorithm>
#include <string>

#include "support/helpers.hpp"
#include "tensor/ops.hpp"

namespace testing_support {

using namespace attn;

OpCheckSummary check_op(const OpBuilder& op, const std::vector<Shape>& shapes, int instances, double lo, double hi) {
  OpCheckSummary sum;
  for (int inst = 0; inst < instances; ++inst) {
    Rng rng(1000 + static_cast<std::uint64_t>(inst));
    std::vector<Parameter> params;
    for (std::size_t i = 0; i < shapes.size(); ++i) {
      params.emplace_back("p" + std::to_string(i), random_tensor(shapes[i], rng, lo, hi));
    }
    // output weights drawn after a probe pass fixes the output shape
    Tensor probe;
    {
      Tape t;
      std::vector<Var> in;
      for (auto& p : params) in.push_back(t.param(p));
      probe = op(t, in).value();
    }
    const Tensor w = random_tensor(probe.shape(), rng);
    std::vector<Parameter*> ptrs;
    for (auto& p : params) ptrs.push_back(&p);
    const auto res = grad_check(
        [&](Tape& t) {
          std::vector<Var> in;
          for (auto& p : params) in.push_back(t.param(p));
          return reduce_mean(elemwise_mul(op(t, in), t.constant(w)));
        },
        ptrs, GradCheckOptions{1e-3f, 0, static_cast<std::uint64_t>(inst), true});
    sum.worst = std::max(sum.worst, res.max_rel_error);
    sum.checked += res.checked;
    ++sum.instances;
  }
  return sum;
}

}  // namespace testing_support
