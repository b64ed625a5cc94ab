#include "model/checkpoint.hpp"

#include <json.hpp>

#include "common/errors.hpp"
#include "config/run_config.hpp"
#include "tensor/atnt.hpp"

namespace attn {

namespace {

constexpr const char* kMetaFormat = "attn-checkpoint";
constexpr int kMetaVersion = 1;

std::string meta_path(const std::string& path) { return path + ".meta.json"; }

}  // namespace

void save_checkpoint(const std::string& path, const PatchNet& model, const AdamState& state, const TrainConfig& train,
                     const LossConfig& loss) {
  const auto params = model.parameters();
  const bool has_moments = !state.m.empty();
  if (has_moments && (state.m.size() != params.size() || state.v.size() != params.size())) {
    throw ShapeError("adam state does not match the model's parameter list");
  }
  std::vector<NamedTensor> tensors;
  for (const Parameter* p : params) tensors.push_back({p->name, p->value});
  for (std::size_t k = 0; k < params.size(); ++k) {
    tensors.push_back({"adam.m." + params[k]->name, has_moments ? state.m[k] : Tensor(params[k]->value.shape())});
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    tensors.push_back({"adam.v." + params[k]->name, has_moments ? state.v[k] : Tensor(params[k]->value.shape())});
  }
  if (const MamBasis* b = model.basis()) {
    for (auto& t : basis_tensors(*b, "mam.")) tensors.push_back(std::move(t));
  }

  nlohmann::ordered_json meta;
  meta["format"] = kMetaFormat;
  meta["version"] = kMetaVersion;
  meta["step"] = state.step;
  meta["model"] = to_json(model.config());
  meta["train"] = to_json(train);
  meta["loss"] = to_json(loss);

  write_atnt(path, tensors);
  write_file(meta_path(path), meta.dump(2) + "\n");
}

Checkpoint load_checkpoint(const std::string& path) {
  const std::string meta_file = meta_path(path);
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_file(meta_file));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(meta_file + ": " + e.what());
  }
  if (!meta.is_object() || meta.value("format", "") != kMetaFormat || meta.value("version", 0) != kMetaVersion) {
    throw FormatError(meta_file + ": not an attn checkpoint sidecar (format/version mismatch)");
  }

  PatchNetConfig mcfg;
  TrainConfig tcfg;
  LossConfig lcfg;
  std::int64_t step = 0;
  try {
    mcfg = model_config_from_json(meta.at("model"));
    tcfg = train_config_from_json(meta.at("train"));
    lcfg = loss_config_from_json(meta.at("loss"));
    step = meta.at("step").get<std::int64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(meta_file + ": " + e.what());
  } catch (const UsageError& e) {
    throw FormatError(meta_file + ": " + e.what());
  }

  std::vector<NamedTensor> tensors;
  try {
    tensors = read_atnt(path);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }

  std::optional<MamBasis> basis;
  if (mcfg.variant == AttentionVariant::Mam) basis = basis_from_tensors(tensors, "mam.");
  Checkpoint ck{PatchNet(mcfg, std::move(basis)), AdamState{}, tcfg, lcfg};
  ck.adam.step = step;
  auto assign = [&](const std::string& name, const Shape& shape) {
    const Tensor& t = find_tensor(tensors, name);
    if (t.shape() != shape) {
      throw FormatError(path + ": tensor " + name + " has shape " + shape_str(t.shape()) + ", expected " +
                        shape_str(shape));
    }
    return t;
  };
  for (Parameter* p : ck.model.parameters()) {
    p->value = assign(p->name, p->value.shape());
    ck.adam.m.push_back(assign("adam.m." + p->name, p->value.shape()));
    ck.adam.v.push_back(assign("adam.v." + p->name, p->value.shape()));
  }
  return ck;
}

}  // namespace attn
