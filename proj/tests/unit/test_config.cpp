#include "doctest.h"

#include "common/errors.hpp"
#include "config/run_config.hpp"

using namespace attn;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_run_config(text);
  } catch (const UsageError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("defaults follow the training recipe") {
  const RunConfig c = parse_run_config("{}");
  CHECK(c.seed == 7);
  CHECK(c.train.adam.lr == 2e-4);
  CHECK(c.train.batch == 16);
  CHECK(c.loss.lambda == 1.0);
  CHECK(c.loss.weak_target == 0.75);
  CHECK(c.eval.map_threshold == 0.1);
  CHECK(c.model.variant == AttentionVariant::Regression);
  CHECK(c.model.insertion_stage == 3);
}

TEST_CASE("sections override defaults and the top-level seed") {
  const RunConfig c = parse_run_config(R"({
    "seed": 11,
    "gen": {"counts": {"real": 5, "partial_fake": 4, "entire_fake": 3}, "area_range": [0.2, 0.3]},
    "model": {"variant": "none", "seed": 2},
    "train": {"epochs": 3, "lr": 0.001},
    "loss": {"regime": "weak", "lambda": 0.5},
    "eval": {"split": "val"}
  })");
  CHECK(c.seed == 11);
  CHECK(c.gen.seed == 11);
  CHECK(c.train.seed == 11);
  CHECK(c.model.seed == 2);
  CHECK(c.gen.counts.partial_fake == 4);
  CHECK(c.gen.area_min == 0.2);
  CHECK(c.model.variant == AttentionVariant::None);
  CHECK(c.train.epochs == 3);
  CHECK(c.train.adam.lr == 0.001);
  CHECK(c.loss.regime == MapRegime::Weak);
  CHECK(c.eval.split == Split::Val);

  // round trip through the serialized form
  const RunConfig again = parse_run_config(to_json(c).dump());
  CHECK(to_json(again) == to_json(c));

  RunConfig o = c;
  o.override_seed(99);
  CHECK(o.model.seed == 99);
  CHECK(o.gen.seed == 99);
}

TEST_CASE("config errors") {
  CHECK(error_of("{bad").find("malformed JSON") != std::string::npos);
  CHECK(error_of(R"({"trian": {}})").find("unknown key 'trian'") != std::string::npos);
  CHECK(error_of(R"({"train": {"epochs": 2, "momentum": 0.9}})").find("momentum") != std::string::npos);
  CHECK_FALSE(error_of(R"({"train": {"epochs": "ten"}})").empty());
  CHECK_FALSE(error_of(R"({"loss": {"regime": "strong"}})").empty());
  CHECK_FALSE(error_of(R"({"gen": {"area_range": [0.5, 0.2]}})").empty());
  CHECK_FALSE(error_of(R"({"model": {"insertion_stage": 0}})").empty());
  CHECK_FALSE(error_of(R"({"eval": {"map_threshold": 1.5}})").empty());
  CHECK_FALSE(error_of(R"({"seed": -1})").empty());
  CHECK_FALSE(error_of("[]").empty());
  CHECK_THROWS_AS(load_run_config("/nonexistent/run.json"), IoError);
}
