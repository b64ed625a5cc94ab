#include "doctest.h"

#include <cmath>

#include "common/errors.hpp"
#include "losses/losses.hpp"
#include "support/helpers.hpp"
#include "tensor/gradcheck.hpp"
#include "tensor/ops.hpp"

using namespace attn;
using testing_support::random_tensor;

namespace {

double cls(std::vector<float> logits, int label) {
  Tape t;
  const int labels[1] = {label};
  return classification_loss(t.constant(Tensor({2}, std::move(logits))), labels).value()[0];
}

double sup(Tensor pred, Tensor gt) {
  Tape t;
  return map_loss_supervised(t.constant(std::move(pred)), gt).value()[0];
}

double weak(Tensor pred, int label, float target = 0.75f) {
  Tape t;
  const int labels[1] = {label};
  return map_loss_weak(t.constant(std::move(pred)), labels, target).value()[0];
}

}  // namespace

TEST_CASE("classification loss examples") {
  CHECK(cls({0, 0}, 0) == doctest::Approx(std::log(2.0)));
  CHECK(cls({0, 0}, 1) == doctest::Approx(std::log(2.0)));
  CHECK(cls({10, -10}, 0) == doctest::Approx(2.06e-9).epsilon(0.01));
  CHECK(cls({10, -10}, 1) == doctest::Approx(20.0).epsilon(1e-6));
  CHECK_THROWS_AS(cls({0, 0}, 2), UsageError);

  Tape t;
  const std::vector<int> labels{0, 1, 1};
  const Var v = classification_loss(t.constant(Tensor({3, 2}, {0, 0, 10, -10, 10, -10})), labels);
  CHECK(v.shape() == Shape{3});
  CHECK(v.value()[2] == doctest::Approx(20.0).epsilon(1e-6));
  CHECK_THROWS(classification_loss(t.constant(Tensor({3, 2})), std::vector<int>{0, 1}));
}

TEST_CASE("supervised map loss examples") {
  Rng rng(2);
  const Tensor a = random_tensor({4, 4}, rng, 0.0, 1.0);
  CHECK(sup(a, a) == 0.0);
  CHECK(sup(Tensor({3, 3}, 0.5f), Tensor({3, 3}, 0.0f)) == 0.5);
  CHECK(sup(Tensor({2, 2}, {0, 1, 1, 0}), Tensor({2, 2}, {1, 1, 0, 0})) == 0.5);
  const Tensor b = random_tensor({4, 4}, rng, 0.0, 1.0);
  CHECK(sup(a, b) == doctest::Approx(sup(b, a)));
  CHECK_THROWS_AS(sup(Tensor({2, 2}), Tensor({3, 3})), ShapeError);
}

TEST_CASE("weak map loss examples") {
  CHECK(weak(Tensor({3, 3}, 0.0f), 0) == 0.0);
  Tensor m({3, 3}, 0.2f);
  m[4] = 0.75f;
  CHECK(weak(m, 1) == doctest::Approx(0.0).epsilon(1e-7));
  CHECK(weak(Tensor({3, 3}, 0.5f), 0) == 0.5);
  CHECK(weak(Tensor({3, 3}, 0.5f), 1) == doctest::Approx(0.25));

  // gradient of the max goes to the first maximal pixel only
  Tape t;
  Parameter p("m", Tensor({2, 2}, {0.1f, 0.9f, 0.9f, 0.0f}));
  const std::vector<int> fake{1};
  const Var loss = map_loss_weak(t.param(p), fake, 0.75f);
  t.backward(loss);
  CHECK(p.grad[0] == 0.0f);
  CHECK(p.grad[1] == 1.0f);
  CHECK(p.grad[2] == 0.0f);
}

TEST_CASE("total loss examples") {
  LossConfig c;
  CHECK(total_loss(0.7, 0.2, c) == doctest::Approx(0.9));
  c.lambda = 0.0;
  CHECK(total_loss(0.7, 5.0, c) == 0.7);
  c.lambda = 0.5;
  CHECK(total_loss(1.0, 2.0, c) == 2.0);
  c.lambda = 1.0;
  c.regime = MapRegime::Unsupervised;
  CHECK(total_loss(0.7, 0.2, c) == 0.7);

  LossConfig bad;
  bad.lambda = -1.0;
  CHECK_THROWS_AS(bad.validate(), UsageError);
  bad = LossConfig{};
  bad.weak_target = 1.0;
  CHECK_THROWS_AS(bad.validate(), UsageError);
  CHECK_THROWS_AS(map_regime_from_string("strong"), UsageError);
}

TEST_CASE("loss gradients match central differences") {
  for (int inst = 0; inst < 5; ++inst) {
    Rng rng(500 + static_cast<std::uint64_t>(inst));
    Parameter logits("logits", random_tensor({4, 2}, rng, -3.0, 3.0));
    Parameter map("map", random_tensor({4, 3, 3, 1}, rng, 0.05, 0.95));
    const Tensor gt = random_tensor({4, 3, 3, 1}, rng, 0.0, 1.0);
    const std::vector<int> labels{0, 1, 0, 1};
    for (MapRegime regime : {MapRegime::Supervised, MapRegime::Weak, MapRegime::Unsupervised}) {
      LossConfig lc;
      lc.regime = regime;
      std::vector<Parameter*> ps{&logits, &map};
      if (regime == MapRegime::Unsupervised) ps.pop_back();
      const auto res = grad_check(
          [&](Tape& t) {
            const Var c = classification_loss(t.param(logits), labels);
            std::optional<Var> m;
            if (regime == MapRegime::Supervised) m = map_loss_supervised(t.param(map), gt);
            if (regime == MapRegime::Weak) m = map_loss_weak(t.param(map), labels, 0.75f);
            return total_loss(c, m, lc);
          },
          ps, GradCheckOptions{1e-3f, 0, static_cast<std::uint64_t>(inst), true});
      CHECK(res.max_rel_error <= 1e-3);
    }
  }
}
