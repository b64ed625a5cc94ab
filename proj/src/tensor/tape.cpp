#include "tensor/tape.hpp"

#include <algorithm>

#include "common/errors.hpp"

namespace attn {

const Tensor& Var::value() const {
  if (tape_ == nullptr) throw UsageError("access through an unbound Var");
  return tape_->value(id_);
}

void BranchLog::start(Mode mode) {
  mode_ = mode;
  cursor_ = 0;
  if (mode == Mode::Record) log_.clear();
}

void BranchLog::push(std::vector<std::int32_t> decisions) {
  log_.push_back(std::move(decisions));
}

const std::vector<std::int32_t>& BranchLog::next(std::size_t expected_size) {
  if (cursor_ >= log_.size() || log_[cursor_].size() != expected_size) {
    throw UsageError("branch replay does not match the recorded graph");
  }
  return log_[cursor_++];
}

std::uint64_t BranchLog::signature() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& entry : log_) {
    for (std::int32_t v : entry) {
      h ^= static_cast<std::uint32_t>(v);
      h *= 1099511628211ULL;
    }
    h ^= 0xffu;
    h *= 1099511628211ULL;
  }
  return h;
}

Var Tape::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::param(Parameter& p) {
  Node n;
  n.value = p.value;
  if (grad_enabled_) {
    n.param = &p;
    n.requires_grad = true;
  }
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn) {
  Node n;
  n.value = std::move(value);
  for (const Var& v : inputs) {
    if (&v.tape() != this) throw UsageError("operator inputs come from a different tape");
    n.requires_grad = n.requires_grad || needs_grad(v.id());
  }
  if (n.requires_grad) n.fn = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

void Tape::backward(Var loss) {
  if (&loss.tape() != this) throw UsageError("backward on a Var from another tape");
  if (loss.value().size() != 1) {
    throw UsageError("backward requires a scalar loss, got shape " + shape_str(loss.shape()));
  }
  for (auto& n : nodes_) {
    if (n.param != nullptr) n.param->grad.fill(0.0f);
    n.grad = n.requires_grad ? Tensor(n.value.shape()) : Tensor();
  }
  auto& root = nodes_[static_cast<std::size_t>(loss.id())];
  if (!root.requires_grad) return;
  root.grad[0] = 1.0f;
  for (int id = loss.id(); id >= 0; --id) {
    auto& n = nodes_[static_cast<std::size_t>(id)];
    if (n.requires_grad && n.fn) n.fn(*this, id);
  }
  for (auto& n : nodes_) {
    if (n.param == nullptr) continue;
    auto dst = n.param->grad.data();
    auto src = n.grad.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
}

}  // namespace attn
