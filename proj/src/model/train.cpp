#include "model/train.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "common/errors.hpp"
#include "common/log.hpp"
#include "masks/masks.hpp"
#include "model/evaluate.hpp"
#include "tensor/ops.hpp"

namespace attn {

void TrainConfig::validate() const {
  adam.validate();
  if (batch < 2 || batch % 2 != 0) throw UsageError("train.batch must be even and >= 2, got " + std::to_string(batch));
  if (epochs < 0) throw UsageError("train.epochs must be >= 0");
}

std::string History::to_csv() const {
  std::string out = "epoch,cls_loss,map_loss,total_loss,val_auc\n";
  for (const auto& e : epochs) {
    out += fmt::format("{},{},{},{},{}\n", e.epoch, e.cls_loss, e.map_loss, e.total_loss,
                       std::isnan(e.val_auc) ? std::string("nan") : fmt::format("{}", e.val_auc));
  }
  return out;
}

Tensor map_targets(const Dataset& ds, std::span<const std::size_t> indices, int map_size) {
  Tensor t({static_cast<int>(indices.size()), map_size, map_size, 1});
  const auto per = static_cast<std::size_t>(map_size) * static_cast<std::size_t>(map_size);
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const Sample& s = ds.samples[indices[k]];
    float* dst = t.ptr() + k * per;
    if (s.category == Category::Real) continue;
    if (s.category == Category::EntireFake) {
      std::fill(dst, dst + per, 1.0f);
      continue;
    }
    if (!s.mask) throw UsageError("supervised training needs a mask for record " + s.image_path);
    const ProbMap m = downsample_mask(*s.mask, map_size, map_size);
    std::copy(m.values().begin(), m.values().end(), dst);
  }
  return t;
}

History train(PatchNet& model, AdamState& state, const Dataset& ds, const TrainConfig& cfg, const LossConfig& loss) {
  cfg.validate();
  loss.validate();
  if (ds.image_size != model.config().image_size) {
    throw UsageError("dataset images are " + std::to_string(ds.image_size) + " px but the model expects " +
                     std::to_string(model.config().image_size));
  }
  std::vector<std::size_t> reals, fakes;
  for (std::size_t i : ds.indices(Split::Train)) (ds.samples[i].label() == 0 ? reals : fakes).push_back(i);
  if (reals.empty() || fakes.empty()) throw UsageError("the train split must contain both real and fake records");

  const bool use_map = model.has_attention() && loss.regime != MapRegime::Unsupervised;
  if (use_map && loss.regime == MapRegime::Supervised) {
    for (std::size_t i : fakes) {
      if (!ds.samples[i].mask) throw UsageError("supervised training needs a mask for record " + ds.samples[i].image_path);
    }
  }

  const std::size_t half = static_cast<std::size_t>(cfg.batch / 2);
  const std::size_t batches = std::min(reals.size() / half, fakes.size() / half);
  if (batches == 0) {
    throw UsageError("the train split is too small for one balanced batch of " + std::to_string(cfg.batch));
  }
  const int map_size = model.config().map_size();
  auto params = model.parameters();
  const Rng root = Rng(cfg.seed).derive(0x545241494e);  // "TRAIN"

  History history;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng rng = root.derive(static_cast<std::uint64_t>(epoch));
    rng.shuffle(std::span<std::size_t>(reals));
    rng.shuffle(std::span<std::size_t>(fakes));

    double cls_sum = 0.0, map_sum = 0.0, total_sum = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
      std::vector<std::size_t> idx(reals.begin() + static_cast<std::ptrdiff_t>(b * half),
                                   reals.begin() + static_cast<std::ptrdiff_t>((b + 1) * half));
      idx.insert(idx.end(), fakes.begin() + static_cast<std::ptrdiff_t>(b * half),
                 fakes.begin() + static_cast<std::ptrdiff_t>((b + 1) * half));
      std::vector<int> labels;
      for (std::size_t i : idx) labels.push_back(ds.samples[i].label());

      Tape tape;
      const auto fwd = model.forward(tape, image_batch(ds, idx));
      const Var cls = classification_loss(fwd.logits, labels);
      std::optional<Var> map;
      if (use_map) {
        const Var prob = fwd.attention->prob_map;
        map = loss.regime == MapRegime::Supervised
                  ? map_loss_supervised(prob, map_targets(ds, idx, map_size))
                  : map_loss_weak(prob, labels, static_cast<float>(loss.weak_target));
      }
      const Var total = total_loss(cls, map, loss);
      tape.backward(total);
      adam_step(params, state, cfg.adam);

      auto mean_of = [](const Tensor& t) {
        double s = 0.0;
        for (float v : t.data()) s += v;
        return s / static_cast<double>(t.size());
      };
      cls_sum += mean_of(cls.value());
      if (map) map_sum += mean_of(map->value());
      total_sum += total.value().item();
    }
    EpochStats e;
    e.epoch = epoch;
    e.cls_loss = cls_sum / static_cast<double>(batches);
    e.map_loss = map_sum / static_cast<double>(batches);
    e.total_loss = total_sum / static_cast<double>(batches);
    e.val_auc = split_auc(model, ds, Split::Val);
    history.epochs.push_back(e);
    logger()->info("epoch {}: cls {:.4f} map {:.4f} total {:.4f} val_auc {:.4f}", epoch, e.cls_loss, e.map_loss,
                   e.total_loss, e.val_auc);
  }
  return history;
}

}  // namespace attn
