#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <json.hpp>

#include "common/errors.hpp"
#include "losses/losses.hpp"
#include "masks/masks.hpp"
#include "model/adam.hpp"
#include "model/checkpoint.hpp"
#include "model/dataset.hpp"
#include "model/evaluate.hpp"
#include "model/mam_fit.hpp"
#include "model/patchnet.hpp"
#include "model/train.hpp"
#include "support/helpers.hpp"
#include "synthgen/synthgen.hpp"
#include "tensor/atnt.hpp"

using namespace attn;
using testing_support::random_tensor;
namespace fs = std::filesystem;

namespace {

// 32 px dataset held in memory: n of each category, split round-robin so
// every split sees both labels.
Dataset small_dataset(int n, std::uint64_t seed) {
  GenConfig cfg;
  cfg.image_size = 32;
  Dataset ds;
  ds.image_size = 32;
  const Split order[4] = {Split::Train, Split::Train, Split::Val, Split::Test};
  for (int i = 0; i < n; ++i) {
    Rng rr(image_seed(seed, Category::Real, static_cast<std::uint64_t>(i)));
    const auto real = gen_real(rr, 32, cfg.fingerprint_strength);
    Rng rp(image_seed(seed, Category::PartialFake, static_cast<std::uint64_t>(i)));
    const auto partial = gen_partial_fake(real, rp, cfg);
    Rng re(image_seed(seed, Category::EntireFake, static_cast<std::uint64_t>(i)));
    const auto entire = gen_entire_fake(re, cfg);
    const Split split = order[i % 4];
    const std::string id = std::to_string(i);
    ds.samples.push_back({"real_" + id, Category::Real, split, real.image, real.mask});
    ds.samples.push_back({"partial_fake_" + id, Category::PartialFake, split, partial.image, partial.mask});
    ds.samples.push_back({"entire_fake_" + id, Category::EntireFake, split, entire.image, entire.mask});
  }
  return ds;
}

PatchNetConfig small_config(AttentionVariant v) {
  PatchNetConfig c;
  c.image_size = 32;
  c.variant = v;
  return c;
}

MamBasis basis_for(const Dataset& ds, int map_size) {
  std::vector<Tensor> masks;
  for (const auto& s : ds.samples)
    if (s.category == Category::PartialFake) masks.push_back(downsample_mask(*s.mask, map_size, map_size).to_tensor());
  return fit_mam_basis(masks, 4);
}

Tensor forward_logits(PatchNet& m, const Tensor& x) {
  Tape t;
  return m.forward(t, x, false).logits.value();
}

}  // namespace

TEST_CASE("parameter counts") {
  PatchNetConfig none;
  none.variant = AttentionVariant::None;
  const PatchNet base(none, std::nullopt);
  CHECK(base.parameter_count() == 60642);
  CHECK_FALSE(base.has_attention());
  const PatchNet reg(PatchNetConfig{}, std::nullopt);
  CHECK(reg.parameter_count() == 60642 + 65);

  PatchNetConfig early;
  early.insertion_stage = 1;
  const PatchNet e(early, std::nullopt);
  CHECK(e.parameter_count() == 60642 + 17);
  CHECK(e.config().map_size() == 32);
}

TEST_CASE("build_model errors") {
  PatchNetConfig mam;
  mam.variant = AttentionVariant::Mam;
  CHECK_THROWS_AS(PatchNet(mam, std::nullopt), UsageError);
  PatchNetConfig bad;
  bad.insertion_stage = 4;
  CHECK_THROWS_AS(bad.validate(), UsageError);
  bad = PatchNetConfig{};
  bad.image_size = 36;
  CHECK_THROWS_AS(bad.validate(), UsageError);
}

TEST_CASE("forward examples") {
  Rng rng(3);
  const Tensor x = random_tensor({16, 64, 64, 3}, rng, 0.0, 1.0);
  PatchNet a(PatchNetConfig{}, std::nullopt), b(PatchNetConfig{}, std::nullopt);
  const Tensor la = forward_logits(a, x);
  CHECK(la == forward_logits(b, x));
  for (float v : la.data()) CHECK(std::isfinite(v));
  for (double p : fake_probabilities(la)) {
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
  }

  // no batch coupling
  for (int k : {0, 7, 15}) {
    const Tensor one({1, 64, 64, 3}, std::vector<float>(x.ptr() + k * 64 * 64 * 3, x.ptr() + (k + 1) * 64 * 64 * 3));
    const Tensor lo = forward_logits(a, one);
    CHECK(std::abs(lo[0] - la[static_cast<std::size_t>(k * 2)]) <= 1e-6);
    CHECK(std::abs(lo[1] - la[static_cast<std::size_t>(k * 2 + 1)]) <= 1e-6);
  }

  auto& head = a.head()->regression_params();
  head.weight.value = Tensor(head.weight.value.shape());
  head.bias.value = Tensor(head.bias.value.shape());
  Tape t;
  const auto out = a.forward(t, x);
  CHECK(out.attention->prob_map.shape() == Shape{16, 8, 8, 1});
  for (float v : out.attention->prob_map.value().data()) CHECK(v == 0.5f);

  PatchNetConfig early;
  early.insertion_stage = 1;
  PatchNet e(early, std::nullopt);
  Tape t2;
  CHECK(e.forward(t2, Tensor({1, 64, 64, 3})).attention->prob_map.shape() == Shape{1, 32, 32, 1});

  Tape t3;
  CHECK_THROWS_AS(a.forward(t3, Tensor({1, 32, 32, 3})), ShapeError);
}

TEST_CASE("adam examples") {
  AdamConfig cfg;
  Parameter p("p", Tensor({3}, {1.0f, -2.0f, 0.5f}));
  p.grad = Tensor({3}, {0.3f, -7.0f, 1e-3f});
  std::vector<Parameter*> ps{&p};
  AdamState st;
  adam_step(ps, st, cfg);
  CHECK(p.value[0] == doctest::Approx(1.0 - 2e-4).epsilon(1e-6));
  CHECK(p.value[1] == doctest::Approx(-2.0 + 2e-4).epsilon(1e-6));
  CHECK(p.value[2] == doctest::Approx(0.5 - 2e-4).epsilon(1e-4));
  CHECK(st.step == 1);

  Parameter z("z", Tensor({2}, {0.25f, 4.0f}));
  std::vector<Parameter*> zs{&z};
  AdamState zst;
  for (int i = 0; i < 20; ++i) adam_step(zs, zst, cfg);
  CHECK(z.value == Tensor({2}, {0.25f, 4.0f}));

  // 1/2 x^2 from x = 1 with lr 0.1, against the update written out in
  // double. The iterate descends in steps of about lr, overshoots zero once
  // momentum has built up, and settles.
  AdamConfig fast;
  fast.lr = 0.1;
  Parameter x("x", Tensor({1}, {1.0f}));
  std::vector<Parameter*> xs{&x};
  AdamState xst;
  double ox = 1.0, om = 0.0, ov = 0.0;
  bool crossed = false;
  for (int i = 1; i <= 50; ++i) {
    const double before = std::abs(x.value[0]);
    x.grad[0] = x.value[0];
    adam_step(xs, xst, fast);
    om = 0.9 * om + 0.1 * ox;
    ov = 0.999 * ov + 0.001 * ox * ox;
    ox -= 0.1 * (om / (1.0 - std::pow(0.9, i))) / (std::sqrt(ov / (1.0 - std::pow(0.999, i))) + 1e-8);
    CHECK(x.value[0] == doctest::Approx(ox).epsilon(1e-4).scale(1.0));
    crossed = crossed || x.value[0] < 0.0f;
    if (!crossed) CHECK(std::abs(x.value[0]) < before);
  }
  CHECK(std::abs(x.value[0]) < 0.01);

  Parameter other("o", Tensor({4}));
  std::vector<Parameter*> os{&other};
  CHECK_THROWS_AS(adam_step(os, st, cfg), ShapeError);
  AdamConfig bad;
  bad.lr = -1.0;
  CHECK_THROWS_AS(bad.validate(), UsageError);
}

TEST_CASE("map targets follow the category") {
  const Dataset ds = small_dataset(2, 4);
  const std::vector<std::size_t> idx{0, 1, 2};
  const Tensor t = map_targets(ds, idx, 4);
  const ProbMap expect = downsample_mask(*ds.samples[1].mask, 4, 4);
  for (std::size_t p = 0; p < 16; ++p) {
    CHECK(t[p] == 0.0f);
    CHECK(t[16 + p] == expect[p]);
    CHECK(t[32 + p] == 1.0f);
  }
}

TEST_CASE("training is deterministic and reduces loss") {
  const Dataset ds = small_dataset(24, 11);
  TrainConfig tc;
  tc.epochs = 2;
  tc.adam.lr = 1e-3;
  LossConfig lc;
  auto run = [&](AttentionVariant v, const LossConfig& l) {
    std::optional<MamBasis> basis;
    if (v == AttentionVariant::Mam) basis = basis_for(ds, 4);
    PatchNet m(small_config(v), basis);
    AdamState st;
    return train(m, st, ds, tc, l).to_csv();
  };
  const auto h1 = run(AttentionVariant::Regression, lc);
  CHECK(h1 == run(AttentionVariant::Regression, lc));
  CHECK(h1.rfind("epoch,cls_loss,map_loss,total_loss,val_auc\n", 0) == 0);
  CHECK(run(AttentionVariant::Mam, lc) == run(AttentionVariant::Mam, lc));

  LossConfig unsup;
  unsup.regime = MapRegime::Unsupervised;
  PatchNet m(small_config(AttentionVariant::Regression), std::nullopt);
  AdamState st;
  const History h = train(m, st, ds, tc, unsup);
  REQUIRE(h.epochs.size() == 2);
  for (const auto& e : h.epochs) {
    CHECK(e.map_loss == 0.0);
    CHECK(e.total_loss == doctest::Approx(e.cls_loss).epsilon(1e-6));
  }
  CHECK(st.step > 0);
}

TEST_CASE("training errors") {
  Dataset ds = small_dataset(8, 2);
  ds.samples[1].mask.reset();
  PatchNet m(small_config(AttentionVariant::Regression), std::nullopt);
  AdamState st;
  TrainConfig tc;
  tc.epochs = 1;
  try {
    train(m, st, ds, tc, LossConfig{});
    FAIL("expected a missing-mask error");
  } catch (const UsageError& e) {
    CHECK(std::string(e.what()).find(ds.samples[1].image_path) != std::string::npos);
  }
  // the weak regime does not need masks
  tc.batch = 4;
  CHECK_NOTHROW(train(m, st, ds, tc, LossConfig{1.0, MapRegime::Weak, 0.75}));
  tc.batch = 3;
  CHECK_THROWS_AS(tc.validate(), UsageError);
}

TEST_CASE("report from injected predictions") {
  const Dataset ds = small_dataset(8, 6);
  const auto idx = ds.indices(Split::Train);
  EvalConfig ec;
  ec.split = Split::Train;

  std::vector<Prediction> oracle;
  for (auto i : idx) {
    const Sample& s = ds.samples[i];
    oracle.push_back({static_cast<double>(s.label()), downsample_mask(*s.mask, 4, 4)});
  }
  const auto r = build_report(ds, idx, oracle, ec);
  CHECK(r.auc.value() == 1.0);
  CHECK(r.eer.value() == 0.0);
  CHECK(r.tdr_at_1pct.value() == 1.0);
  CHECK(r.count == idx.size());
  CHECK(r.per_category.at(Category::Real).count == idx.size() / 3);
  const auto j = nlohmann::json::parse(report_to_json(r));
  CHECK(j["auc"] == 1.0);
  CHECK(j.contains("mean_iinc"));
  CHECK(roc_to_csv(r).rfind("fdr,tdr\n", 0) == 0);

  // maps identically zero on an all-real subset
  std::vector<std::size_t> reals;
  std::vector<Prediction> zeros;
  for (auto i : idx)
    if (ds.samples[i].category == Category::Real) {
      reals.push_back(i);
      zeros.push_back({0.2, ProbMap(4, 4, 0.0f)});
    }
  const auto rr = build_report(ds, reals, zeros, ec);
  CHECK_FALSE(rr.auc.has_value());
  REQUIRE(rr.localization.has_value());
  CHECK(rr.localization->mean_pbca == 1.0);
  CHECK(rr.localization->mean_iinc == 0.0);
  CHECK_FALSE(rr.localization->mean_iou.has_value());

  // baseline predictions carry no maps
  std::vector<Prediction> bare;
  for (auto i : idx) bare.push_back({ds.samples[i].label() * 0.5 + 0.1, std::nullopt});
  const auto rb = build_report(ds, idx, bare, ec);
  CHECK_FALSE(rb.localization.has_value());
  const auto jb = nlohmann::json::parse(report_to_json(rb));
  CHECK(jb["mean_iinc"].is_null());
  CHECK(jb["auc"].is_number());
}

TEST_CASE("evaluate rejects single-class splits") {
  Dataset ds = small_dataset(4, 8);
  for (auto& s : ds.samples)
    if (s.split == Split::Test && s.category != Category::Real) s.split = Split::Val;
  PatchNet m(small_config(AttentionVariant::Regression), std::nullopt);
  CHECK_THROWS_AS(evaluate(m, ds, EvalConfig{}), UsageError);
  EvalConfig val;
  val.split = Split::Val;
  const auto r = evaluate(m, ds, val);
  CHECK(r.auc.has_value());
  CHECK(r.localization.has_value());
}

TEST_CASE("checkpoint round trip") {
  const Dataset ds = small_dataset(8, 3);
  const fs::path dir = testing_support::scratch_dir("checkpoint");
  Rng rng(2);
  const Tensor x = random_tensor({3, 32, 32, 3}, rng, 0.0, 1.0);
  for (auto v : {AttentionVariant::None, AttentionVariant::Regression, AttentionVariant::Mam}) {
    CAPTURE(to_string(v));
    std::optional<MamBasis> basis;
    if (v == AttentionVariant::Mam) basis = basis_for(ds, 4);
    PatchNet m(small_config(v), basis);
    AdamState st;
    TrainConfig tc;
    tc.epochs = 1;
    tc.batch = 4;
    train(m, st, ds, tc, LossConfig{});
    const std::string path = (dir / (std::string(to_string(v)) + ".atnt")).string();
    save_checkpoint(path, m, st, tc, LossConfig{});
    CHECK(fs::exists(path + ".meta.json"));

    auto ck = load_checkpoint(path);
    CHECK(ck.adam.step == st.step);
    CHECK(ck.train.batch == 4);
    CHECK(forward_logits(ck.model, x) == forward_logits(m, x));

    const auto tensors = read_atnt(path);
    bool has_mean = false, has_moment = false;
    for (const auto& t : tensors) {
      has_mean = has_mean || t.name == "mam.mean";
      has_moment = has_moment || t.name == "adam.m.classifier.weight";
    }
    CHECK(has_mean == (v == AttentionVariant::Mam));
    CHECK(has_moment);

    // saving the reloaded model reproduces the file
    const std::string again = path + ".again";
    save_checkpoint(again, ck.model, ck.adam, ck.train, ck.loss);
    CHECK(read_file(again) == read_file(path));

    const std::string bytes = read_file(path);
    write_file(path, bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_AS(load_checkpoint(path), FormatError);
  }
  CHECK_THROWS_AS(load_checkpoint((dir / "missing.atnt").string()), IoError);
}
