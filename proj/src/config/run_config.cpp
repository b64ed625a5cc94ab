#include "config/run_config.hpp"

#include <set>

#include "common/errors.hpp"
#include "tensor/atnt.hpp"

namespace attn {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

void check_keys(const json& j, const std::string& section, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw UsageError("config: '" + section + "' must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, _] : j.items()) {
    if (!ok.count(k)) throw UsageError("config: unknown key '" + k + "' in '" + section + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& section) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError("config: '" + section + "." + key + "' has the wrong type");
  }
}

// Numbers only; nlohmann happily converts booleans otherwise.
void read_number(const json& j, const char* key, double& out, const std::string& section) {
  if (!j.contains(key)) return;
  if (!j.at(key).is_number()) throw UsageError("config: '" + section + "." + key + "' must be a number");
  out = j.at(key).get<double>();
}

void read_int(const json& j, const char* key, int& out, const std::string& section) {
  if (!j.contains(key)) return;
  if (!j.at(key).is_number_integer()) throw UsageError("config: '" + section + "." + key + "' must be an integer");
  out = j.at(key).get<int>();
}

void read_seed(const json& j, std::uint64_t& out, const std::string& section) {
  if (!j.contains("seed")) return;
  if (!j.at("seed").is_number_unsigned()) {
    throw UsageError("config: '" + section + ".seed' must be a non-negative integer");
  }
  out = j.at("seed").get<std::uint64_t>();
}

}  // namespace

void RunConfig::validate() const {
  gen.validate();
  model.validate();
  train.validate();
  loss.validate();
  eval.validate();
  if (gen.image_size != model.image_size) throw UsageError("config: gen.image_size and model.image_size differ");
}

void RunConfig::override_seed(std::uint64_t s) {
  seed = s;
  gen.seed = s;
  model.seed = s;
  train.seed = s;
}

ordered_json to_json(const PatchNetConfig& c) {
  ordered_json j;
  j["image_size"] = c.image_size;
  j["widths"] = c.widths;
  j["insertion_stage"] = c.insertion_stage;
  j["variant"] = std::string(to_string(c.variant));
  j["seed"] = c.seed;
  return j;
}

ordered_json to_json(const TrainConfig& c) {
  ordered_json j;
  j["lr"] = c.adam.lr;
  j["beta1"] = c.adam.beta1;
  j["beta2"] = c.adam.beta2;
  j["eps"] = c.adam.eps;
  j["batch"] = c.batch;
  j["epochs"] = c.epochs;
  j["seed"] = c.seed;
  return j;
}

ordered_json to_json(const LossConfig& c) {
  ordered_json j;
  j["lambda"] = c.lambda;
  j["regime"] = std::string(to_string(c.regime));
  j["weak_target"] = c.weak_target;
  return j;
}

PatchNetConfig model_config_from_json(const json& j) {
  check_keys(j, "model", {"image_size", "widths", "insertion_stage", "variant", "seed"});
  PatchNetConfig c;
  read_int(j, "image_size", c.image_size, "model");
  read(j, "widths", c.widths, "model");
  read_int(j, "insertion_stage", c.insertion_stage, "model");
  if (j.contains("variant")) {
    std::string v;
    read(j, "variant", v, "model");
    c.variant = attention_variant_from_string(v);
  }
  read_seed(j, c.seed, "model");
  return c;
}

TrainConfig train_config_from_json(const json& j) {
  check_keys(j, "train", {"lr", "beta1", "beta2", "eps", "batch", "epochs", "seed"});
  TrainConfig c;
  read_number(j, "lr", c.adam.lr, "train");
  read_number(j, "beta1", c.adam.beta1, "train");
  read_number(j, "beta2", c.adam.beta2, "train");
  read_number(j, "eps", c.adam.eps, "train");
  read_int(j, "batch", c.batch, "train");
  read_int(j, "epochs", c.epochs, "train");
  read_seed(j, c.seed, "train");
  return c;
}

LossConfig loss_config_from_json(const json& j) {
  check_keys(j, "loss", {"lambda", "regime", "weak_target"});
  LossConfig c;
  read_number(j, "lambda", c.lambda, "loss");
  if (j.contains("regime")) {
    std::string r;
    read(j, "regime", r, "loss");
    c.regime = map_regime_from_string(r);
  }
  read_number(j, "weak_target", c.weak_target, "loss");
  return c;
}

RunConfig parse_run_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("config: malformed JSON: ") + e.what());
  }
  check_keys(j, "config", {"seed", "gen", "model", "train", "loss", "eval"});

  RunConfig c;
  read_seed(j, c.seed, "config");
  c.override_seed(c.seed);

  if (j.contains("gen")) {
    const json& g = j["gen"];
    check_keys(g, "gen", {"image_size", "counts", "fingerprint_strength", "area_range", "seed"});
    read_int(g, "image_size", c.gen.image_size, "gen");
    if (g.contains("counts")) {
      const json& n = g["counts"];
      check_keys(n, "gen.counts", {"real", "partial_fake", "entire_fake"});
      read_int(n, "real", c.gen.counts.real, "gen.counts");
      read_int(n, "partial_fake", c.gen.counts.partial_fake, "gen.counts");
      read_int(n, "entire_fake", c.gen.counts.entire_fake, "gen.counts");
    }
    read_number(g, "fingerprint_strength", c.gen.fingerprint_strength, "gen");
    if (g.contains("area_range")) {
      const json& a = g["area_range"];
      if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number()) {
        throw UsageError("config: 'gen.area_range' must be [min, max]");
      }
      c.gen.area_min = a[0].get<double>();
      c.gen.area_max = a[1].get<double>();
    }
    read_seed(g, c.gen.seed, "gen");
  }
  if (j.contains("model")) {
    const std::uint64_t s = c.model.seed;
    c.model = model_config_from_json(j["model"]);
    if (!j["model"].contains("seed")) c.model.seed = s;
  }
  if (j.contains("train")) {
    const std::uint64_t s = c.train.seed;
    c.train = train_config_from_json(j["train"]);
    if (!j["train"].contains("seed")) c.train.seed = s;
  }
  if (j.contains("loss")) c.loss = loss_config_from_json(j["loss"]);
  if (j.contains("eval")) {
    const json& e = j["eval"];
    check_keys(e, "eval", {"split", "map_threshold", "batch"});
    if (e.contains("split")) {
      std::string s;
      read(e, "split", s, "eval");
      c.eval.split = split_from_string(s);
    }
    read_number(e, "map_threshold", c.eval.map_threshold, "eval");
    read_int(e, "batch", c.eval.batch, "eval");
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) { return parse_run_config(read_file(path)); }

ordered_json to_json(const RunConfig& c) {
  ordered_json j;
  j["seed"] = c.seed;
  ordered_json g;
  g["image_size"] = c.gen.image_size;
  g["counts"] = {{"real", c.gen.counts.real},
                 {"partial_fake", c.gen.counts.partial_fake},
                 {"entire_fake", c.gen.counts.entire_fake}};
  g["fingerprint_strength"] = c.gen.fingerprint_strength;
  g["area_range"] = {c.gen.area_min, c.gen.area_max};
  g["seed"] = c.gen.seed;
  j["gen"] = g;
  j["model"] = to_json(c.model);
  j["train"] = to_json(c.train);
  j["loss"] = to_json(c.loss);
  ordered_json e;
  e["split"] = std::string(to_string(c.eval.split));
  e["map_threshold"] = c.eval.map_threshold;
  e["batch"] = c.eval.batch;
  j["eval"] = e;
  return j;
}

}  // namespace attn
