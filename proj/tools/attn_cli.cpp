// attn: dataset generation, basis fitting, training, evaluation and map scoring.
#include <attn/attn.h>

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <json.hpp>
#include <memory>
#include <optional>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

struct Failure {
  int code;
};

int exit_code(attn_status s) {
  switch (s) {
    case ATTN_OK:
      return kExitOk;
    case ATTN_ERR_IO:
    case ATTN_ERR_FORMAT:
      return kExitIo;
    default:
      return kExitUsage;
  }
}

void check(attn_status s) {
  if (s == ATTN_OK) return;
  std::fprintf(stderr, "error: %s\n", attn_last_error());
  throw Failure{exit_code(s)};
}

struct ConfigDeleter {
  void operator()(attn_config* c) const { attn_config_free(c); }
};
struct ModelDeleter {
  void operator()(attn_model* m) const { attn_model_free(m); }
};
using ConfigPtr = std::unique_ptr<attn_config, ConfigDeleter>;
using ModelPtr = std::unique_ptr<attn_model, ModelDeleter>;

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string config_path;
};

ConfigPtr load_config(const Globals& g) {
  attn_config* raw = nullptr;
  if (g.config_path.empty()) {
    check(attn_config_default(&raw));
  } else {
    check(attn_config_load(g.config_path.c_str(), &raw));
  }
  ConfigPtr cfg(raw);
  if (g.seed) check(attn_config_set_seed(cfg.get(), *g.seed));
  return cfg;
}

nlohmann::json config_json(const attn_config* cfg) {
  char* text = nullptr;
  check(attn_config_to_json(cfg, &text));
  auto j = nlohmann::json::parse(text);
  attn_string_free(text);
  return j;
}

std::string sibling(const std::string& path, const std::string& suffix) {
  std::filesystem::path p(path);
  if (p.extension() == ".json") p.replace_extension();
  return p.string() + suffix;
}

int cmd_gen(const Globals& g, const std::string& out_dir) {
  auto cfg = load_config(g);
  const auto j = config_json(cfg.get());
  std::size_t records = 0;
  check(attn_gen_dataset(cfg.get(), out_dir.c_str(), &records));
  const auto& counts = j["gen"]["counts"];
  std::printf("manifest: %s\n", (std::filesystem::path(out_dir) / "manifest.jsonl").string().c_str());
  std::printf("records: %zu (real %d, partial_fake %d, entire_fake %d)\n", records, counts["real"].get<int>(),
              counts["partial_fake"].get<int>(), counts["entire_fake"].get<int>());
  return kExitOk;
}

int cmd_fit_mam(const Globals& g, const std::string& manifest, int n, int masks, const std::string& out) {
  auto cfg = load_config(g);
  int map_size = 0;
  check(attn_config_map_size(cfg.get(), &map_size));
  const auto seed = config_json(cfg.get())["seed"].get<std::uint64_t>();
  check(attn_fit_mam(manifest.c_str(), n, masks, map_size, seed, out.c_str()));
  std::printf("basis: %s (n=%d, %dx%d)\n", out.c_str(), n, map_size, map_size);
  return kExitOk;
}

int cmd_train(const Globals& g, const std::string& manifest, const std::string& out, const std::string& basis) {
  auto cfg = load_config(g);
  attn_model* raw = nullptr;
  check(attn_model_create(cfg.get(), basis.empty() ? nullptr : basis.c_str(), &raw));
  ModelPtr model(raw);
  const std::string history = out + ".history.csv";
  check(attn_model_train(model.get(), manifest.c_str(), history.c_str()));
  check(attn_model_save(model.get(), out.c_str()));
  attn_model_info info{};
  check(attn_model_info_get(model.get(), &info));
  std::printf("checkpoint: %s (%s, %zu parameters, %lld steps)\n", out.c_str(), info.variant, info.parameter_count,
              static_cast<long long>(info.step));
  std::printf("history: %s\n", history.c_str());
  return kExitOk;
}

int cmd_eval(const Globals& g, const std::string& checkpoint, const std::string& manifest, std::string split,
             std::optional<double> threshold, const std::string& out, const std::string& maps_dir) {
  auto cfg = load_config(g);
  const auto j = config_json(cfg.get());
  if (split.empty()) split = j["eval"]["split"].get<std::string>();
  const double t = threshold.value_or(j["eval"]["map_threshold"].get<double>());
  attn_model* raw = nullptr;
  check(attn_model_load(checkpoint.c_str(), &raw));
  ModelPtr model(raw);
  const std::string roc = sibling(out, ".roc.csv");
  check(attn_model_evaluate(model.get(), manifest.c_str(), split.c_str(), t, out.c_str(), roc.c_str(),
                            maps_dir.empty() ? nullptr : maps_dir.c_str()));
  std::printf("report: %s\nroc: %s\n", out.c_str(), roc.c_str());
  return kExitOk;
}

int cmd_score_maps(const std::string& pred_dir, const std::string& gt_dir, double threshold, const std::string& out) {
  check(attn_score_maps(pred_dir.c_str(), gt_dir.c_str(), threshold, out.c_str()));
  std::printf("report: %s\n", out.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attention-based forgery detection experiments", "attn"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(attn_version()));

  Globals g;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Override every seed in the config");
  app.add_option("--config", g.config_path, "JSON run config")->check(CLI::ExistingFile);

  std::string out_dir;
  auto* gen = app.add_subcommand("gen", "Generate the synthetic dataset");
  gen->add_option("out_dir", out_dir, "Output directory")->required();

  std::string manifest, out, basis, checkpoint, split, pred_dir, gt_dir, maps_dir;
  int n = 10, masks = 100;
  auto* fit = app.add_subcommand("fit-mam", "Fit the mask appearance basis");
  fit->add_option("manifest", manifest, "manifest.jsonl")->required();
  fit->add_option("--n", n, "Number of components");
  fit->add_option("--masks", masks, "Masks sampled from the train split");
  fit->add_option("--out", out, "Basis file (ATNT)")->required();

  auto* train = app.add_subcommand("train", "Train a model");
  train->add_option("manifest", manifest, "manifest.jsonl")->required();
  train->add_option("--out", out, "Checkpoint path")->required();
  train->add_option("--basis", basis, "Basis file for the mam variant");

  double eval_threshold = 0.0;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval->add_option("checkpoint", checkpoint, "Checkpoint path")->required();
  eval->add_option("manifest", manifest, "manifest.jsonl")->required();
  eval->add_option("--split", split, "train, val or test");
  auto* eval_thresh_opt = eval->add_option("--threshold", eval_threshold, "Map binarization threshold");
  eval->add_option("--out", out, "Report JSON")->required();
  eval->add_option("--maps-dir", maps_dir, "Write predicted maps here");

  double score_threshold = 0.1;
  auto* score = app.add_subcommand("score-maps", "Score prediction maps against ground truth");
  score->add_option("pred_dir", pred_dir, "Predicted maps")->required();
  score->add_option("gt_dir", gt_dir, "Ground-truth maps")->required();
  score->add_option("--threshold", score_threshold, "Binarization threshold");
  score->add_option("--out", out, "Report JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  if (*seed_opt) g.seed = seed;

  try {
    if (*gen) return cmd_gen(g, out_dir);
    if (*fit) return cmd_fit_mam(g, manifest, n, masks, out);
    if (*train) return cmd_train(g, manifest, out, basis);
    if (*eval) {
      std::optional<double> t;
      if (*eval_thresh_opt) t = eval_threshold;
      return cmd_eval(g, checkpoint, manifest, split, t, out, maps_dir);
    }
    if (*score) return cmd_score_maps(pred_dir, gt_dir, score_threshold, out);
  } catch (const Failure& f) {
    return f.code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
