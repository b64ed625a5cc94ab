#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "tensor/tensor.hpp"

namespace attn {

/// Trainable tensor with its gradient buffer. Owned by models, referenced by
/// tapes for the duration of one forward/backward pass.
struct Parameter {
  Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}

  std::string name;
  Tensor value;
  Tensor grad;
};

class Tape;

/// Handle to a node recorded on a tape.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  Tape& tape() const { return *tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

/// Decisions taken at non-differentiable points (relu sign, pooling argmax,
/// abs sign, max index). In Record mode operators append what they chose; in
/// Replay mode they reuse the recorded choice, which pins the forward pass to
/// one smooth piece of a piecewise function.
class BranchLog {
 public:
  enum class Mode { Record, Replay };

  void start(Mode mode);
  Mode mode() const { return mode_; }
  bool replaying() const { return mode_ == Mode::Replay; }

  void push(std::vector<std::int32_t> decisions);
  /// Next recorded entry; throws UsageError if the graph shape diverged.
  const std::vector<std::int32_t>& next(std::size_t expected_size);

  std::uint64_t signature() const;
  std::size_t entries() const { return log_.size(); }

 private:
  Mode mode_ = Mode::Record;
  std::vector<std::vector<std::int32_t>> log_;
  std::size_t cursor_ = 0;
};

/// Reverse-mode tape. Nodes are appended in execution order and backward
/// visits them strictly in reverse. Single-threaded; independent tapes may
/// run on different threads.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, int self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var param(Parameter& p);
  /// Appends an operator output. `fn` receives the output's node id; it must
  /// read grad(self) and accumulate into grad(input) for every input with
  /// needs_grad(input).
  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn);

  const Tensor& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  Tensor& grad(int id) { return nodes_[static_cast<std::size_t>(id)].grad; }
  bool needs_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }

  /// Populates Parameter::grad for every parameter registered on this tape.
  /// Parameters the loss does not depend on receive zeros.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

  /// When disabled, param() records a constant copy and no operator keeps a
  /// backward closure. Used for inference.
  void set_grad_enabled(bool on) { grad_enabled_ = on; }
  bool grad_enabled() const { return grad_enabled_; }

  void attach(BranchLog* log) { branches_ = log; }
  BranchLog* branches() const { return branches_; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    BackwardFn fn;
    Parameter* param = nullptr;
    bool requires_grad = false;
  };

  std::deque<Node> nodes_;
  BranchLog* branches_ = nullptr;
  bool grad_enabled_ = true;
};

}  // namespace attn
