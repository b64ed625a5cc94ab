#include "attn/attn.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <optional>
#include <string>

#include "common/errors.hpp"
#include "config/run_config.hpp"
#include "masks/masks.hpp"
#include "metrics/detection.hpp"
#include "metrics/localization.hpp"
#include "metrics/map_scoring.hpp"
#include "model/checkpoint.hpp"
#include "model/dataset.hpp"
#include "model/evaluate.hpp"
#include "model/mam_fit.hpp"
#include "model/train.hpp"
#include "synthgen/synthgen.hpp"
#include "tensor/atnt.hpp"

struct attn_config {
  attn::RunConfig cfg;
};

struct attn_model {
  attn::PatchNet net;
  attn::AdamState adam;
  attn::TrainConfig train;
  attn::LossConfig loss;
};

namespace {

thread_local std::string g_last_error;

template <typename F>
attn_status guard(F&& f) {
  try {
    f();
    g_last_error.clear();
    return ATTN_OK;
  } catch (const attn::UsageError& e) {
    g_last_error = e.what();
    return ATTN_ERR_USAGE;
  } catch (const attn::IoError& e) {
    g_last_error = e.what();
    return ATTN_ERR_IO;
  } catch (const attn::ShapeError& e) {
    g_last_error = e.what();
    return ATTN_ERR_SHAPE;
  } catch (const attn::FormatError& e) {
    g_last_error = e.what();
    return ATTN_ERR_FORMAT;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return ATTN_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ATTN_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return ATTN_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw attn::UsageError(std::string(what) + " must not be NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

attn::ManipMask mask_view(const uint8_t* v, size_t count) {
  if (count == 0) throw attn::UsageError("masks must not be empty");
  return attn::ManipMask(static_cast<int>(count), 1, std::vector<std::uint8_t>(v, v + count));
}

}  // namespace

extern "C" {

const char* attn_last_error(void) { return g_last_error.c_str(); }

const char* attn_version(void) { return "1.0.0"; }

void attn_string_free(char* s) { std::free(s); }

attn_status attn_config_default(attn_config** out) {
  return guard([&] {
    require(out, "out");
    *out = new attn_config{};
  });
}

attn_status attn_config_parse(const char* json, attn_config** out) {
  return guard([&] {
    require(json, "json");
    require(out, "out");
    *out = new attn_config{attn::parse_run_config(json)};
  });
}

attn_status attn_config_load(const char* path, attn_config** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = new attn_config{attn::load_run_config(path)};
  });
}

attn_status attn_config_set_seed(attn_config* cfg, uint64_t seed) {
  return guard([&] {
    require(cfg, "cfg");
    cfg->cfg.override_seed(seed);
  });
}

attn_status attn_config_to_json(const attn_config* cfg, char** out_json) {
  return guard([&] {
    require(cfg, "cfg");
    require(out_json, "out_json");
    *out_json = dup_string(attn::to_json(cfg->cfg).dump(2));
  });
}

attn_status attn_config_map_size(const attn_config* cfg, int* out) {
  return guard([&] {
    require(cfg, "cfg");
    require(out, "out");
    *out = cfg->cfg.model.map_size();
  });
}

void attn_config_free(attn_config* cfg) { delete cfg; }

attn_status attn_gen_dataset(const attn_config* cfg, const char* out_dir, size_t* out_records) {
  return guard([&] {
    require(cfg, "cfg");
    require(out_dir, "out_dir");
    const auto m = attn::gen_dataset(cfg->cfg.gen, out_dir);
    if (out_records) *out_records = m.records.size();
  });
}

attn_status attn_fit_mam(const char* manifest_path, int n, int max_masks, int map_size, uint64_t seed,
                         const char* out_path) {
  return guard([&] {
    require(manifest_path, "manifest_path");
    require(out_path, "out_path");
    attn::save_basis(out_path, attn::fit_basis_from_manifest(manifest_path, n, max_masks, map_size, seed));
  });
}

attn_status attn_model_create(const attn_config* cfg, const char* basis_path, attn_model** out) {
  return guard([&] {
    require(cfg, "cfg");
    require(out, "out");
    std::optional<attn::MamBasis> basis;
    if (cfg->cfg.model.variant == attn::AttentionVariant::Mam) {
      if (basis_path == nullptr) throw attn::UsageError("the mam attention variant requires a basis file");
      basis = attn::load_basis(basis_path);
    }
    *out = new attn_model{attn::PatchNet(cfg->cfg.model, std::move(basis)), attn::AdamState{}, cfg->cfg.train,
                          cfg->cfg.loss};
  });
}

attn_status attn_model_load(const char* checkpoint_path, attn_model** out) {
  return guard([&] {
    require(checkpoint_path, "checkpoint_path");
    require(out, "out");
    auto ck = attn::load_checkpoint(checkpoint_path);
    *out = new attn_model{std::move(ck.model), std::move(ck.adam), ck.train, ck.loss};
  });
}

attn_status attn_model_save(const attn_model* model, const char* checkpoint_path) {
  return guard([&] {
    require(model, "model");
    require(checkpoint_path, "checkpoint_path");
    attn::save_checkpoint(checkpoint_path, model->net, model->adam, model->train, model->loss);
  });
}

attn_status attn_model_info_get(const attn_model* model, attn_model_info* out) {
  return guard([&] {
    require(model, "model");
    require(out, "out");
    const auto& c = model->net.config();
    out->parameter_count = model->net.parameter_count();
    out->image_size = c.image_size;
    out->map_size = model->net.has_attention() ? c.map_size() : 0;
    out->insertion_stage = c.insertion_stage;
    out->variant = attn::to_string(c.variant).data();
    out->step = model->adam.step;
  });
}

attn_status attn_model_train(attn_model* model, const char* manifest_path, const char* history_csv) {
  return guard([&] {
    require(model, "model");
    require(manifest_path, "manifest_path");
    const auto ds = attn::load_dataset(manifest_path);
    const auto h = attn::train(model->net, model->adam, ds, model->train, model->loss);
    if (history_csv) attn::write_file(history_csv, h.to_csv());
  });
}

attn_status attn_model_forward(attn_model* model, const float* images, size_t n, double* out_scores,
                               float* out_maps) {
  return guard([&] {
    require(model, "model");
    require(images, "images");
    require(out_scores, "out_scores");
    if (n == 0) throw attn::UsageError("forward needs at least one image");
    if (out_maps && !model->net.has_attention()) throw attn::UsageError("the baseline model produces no maps");
    const int S = model->net.config().image_size;
    const size_t per = static_cast<size_t>(S) * static_cast<size_t>(S) * 3;
    attn::Tensor batch({static_cast<int>(n), S, S, 3}, std::vector<float>(images, images + n * per));
    attn::Tape tape;
    const auto fwd = model->net.forward(tape, batch, false);
    const auto scores = attn::fake_probabilities(fwd.logits.value());
    std::copy(scores.begin(), scores.end(), out_scores);
    if (out_maps) {
      const auto& pm = fwd.attention->prob_map.value();
      std::copy(pm.data().begin(), pm.data().end(), out_maps);
    }
  });
}

attn_status attn_model_evaluate(attn_model* model, const char* manifest_path, const char* split,
                                double map_threshold, const char* report_json, const char* roc_csv,
                                const char* maps_dir) {
  return guard([&] {
    require(model, "model");
    require(manifest_path, "manifest_path");
    require(split, "split");
    require(report_json, "report_json");
    attn::EvalConfig ec;
    ec.split = attn::split_from_string(split);
    ec.map_threshold = map_threshold;
    ec.validate();
    const auto ds = attn::load_dataset(manifest_path);
    const auto report = attn::evaluate(model->net, ds, ec);
    attn::write_file(report_json, attn::report_to_json(report));
    if (roc_csv) attn::write_file(roc_csv, attn::roc_to_csv(report));
    if (maps_dir && model->net.has_attention()) {
      namespace fs = std::filesystem;
      std::error_code err;
      fs::create_directories(maps_dir, err);
      if (err) throw attn::IoError(maps_dir, "cannot create directory: " + err.message());
      const auto idx = ds.indices(ec.split);
      const auto preds = attn::predict(model->net, ds, idx, ec.batch);
      for (size_t k = 0; k < idx.size(); ++k) {
        const auto stem = fs::path(ds.samples[idx[k]].image_path).stem().string();
        attn::write_mapf((fs::path(maps_dir) / (stem + ".mapf")).string(), *preds[k].map);
      }
    }
  });
}

void attn_model_free(attn_model* model) { delete model; }

attn_status attn_iinc(const uint8_t* pred, const uint8_t* gt, size_t count, double* out) {
  return guard([&] {
    require(pred, "pred");
    require(gt, "gt");
    require(out, "out");
    *out = attn::iinc(mask_view(pred, count), mask_view(gt, count));
  });
}

attn_status attn_iou(const uint8_t* pred, const uint8_t* gt, size_t count, double* out, int* out_defined) {
  return guard([&] {
    require(pred, "pred");
    require(gt, "gt");
    require(out, "out");
    const auto v = attn::iou(mask_view(pred, count), mask_view(gt, count));
    *out = v.value_or(0.0);
    if (out_defined) *out_defined = v.has_value() ? 1 : 0;
  });
}

attn_status attn_pbca(const uint8_t* pred, const uint8_t* gt, size_t count, double* out) {
  return guard([&] {
    require(pred, "pred");
    require(gt, "gt");
    require(out, "out");
    *out = attn::pbca(mask_view(pred, count), mask_view(gt, count));
  });
}

attn_status attn_cosine(const float* pred, const float* gt, size_t count, double* out, int* out_defined) {
  return guard([&] {
    require(pred, "pred");
    require(gt, "gt");
    require(out, "out");
    if (count == 0) throw attn::UsageError("maps must not be empty");
    const attn::ProbMap p(static_cast<int>(count), 1, std::vector<float>(pred, pred + count));
    const attn::ProbMap g(static_cast<int>(count), 1, std::vector<float>(gt, gt + count));
    const auto v = attn::cosine_sim(p, g);
    *out = v.value_or(0.0);
    if (out_defined) *out_defined = v.has_value() ? 1 : 0;
  });
}

attn_status attn_detection_metrics(const double* scores, const int* labels, size_t n, double* out_auc,
                                   double* out_eer, double* out_tdr_1pct, double* out_tdr_0_1pct) {
  return guard([&] {
    require(scores, "scores");
    require(labels, "labels");
    std::vector<attn::ScoredSample> s(n);
    for (size_t i = 0; i < n; ++i) s[i] = {scores[i], labels[i]};
    const auto curve = attn::roc(s);
    if (out_auc) *out_auc = attn::auc(curve);
    if (out_eer) *out_eer = attn::eer(curve);
    if (out_tdr_1pct) *out_tdr_1pct = attn::tdr_at_fdr(curve, 0.01);
    if (out_tdr_0_1pct) *out_tdr_0_1pct = attn::tdr_at_fdr(curve, 0.001);
  });
}

attn_status attn_derive_gt_mask(const uint8_t* source_rgb, const uint8_t* fake_rgb, int width, int height,
                                double thresh, uint8_t* out_mask) {
  return guard([&] {
    require(source_rgb, "source_rgb");
    require(fake_rgb, "fake_rgb");
    require(out_mask, "out_mask");
    if (width < 1 || height < 1) throw attn::UsageError("image dimensions must be >= 1");
    const size_t n = static_cast<size_t>(width) * static_cast<size_t>(height) * 3;
    attn::RgbImage a(width, height), b(width, height);
    std::copy(source_rgb, source_rgb + n, a.data.begin());
    std::copy(fake_rgb, fake_rgb + n, b.data.begin());
    const auto m = attn::derive_gt_mask(a, b, thresh);
    std::copy(m.values().begin(), m.values().end(), out_mask);
  });
}

attn_status attn_score_maps(const char* pred_dir, const char* gt_dir, double thresh, const char* report_json) {
  return guard([&] {
    require(pred_dir, "pred_dir");
    require(gt_dir, "gt_dir");
    require(report_json, "report_json");
    if (!(thresh > 0.0 && thresh < 1.0)) throw attn::UsageError("threshold must lie in (0, 1)");
    attn::write_file(report_json, attn::map_score_report_to_json(attn::score_map_dirs(pred_dir, gt_dir, thresh)));
  });
}

}  // extern "C"
