#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <vector>

#include "bgnn/matrix.hpp"

namespace bgnn {

class Tape;

// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  const Matrix& value() const;
  // Gradient of the last backward() root w.r.t. this node. Zero matrix of
  // the value's shape if nothing flowed here.
  const Matrix& grad() const;
  bool requires_grad() const;

  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  std::size_t id() const { return id_; }
  Tape& tape() const { return *tape_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Records matrix operations in execution order and replays their backward
// rules in exact reverse order. One tape per forward/backward pass; not
// thread-safe.
class Tape {
 public:
  // Backward rule: receives the accumulated output gradient and pushes
  // contributions into parents through Tape::accumulate.
  using Backward = std::function<void(Tape&, const Matrix& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Matrix value, bool requires_grad = true);
  Var constant(Matrix value);
  // Non-owning constant; `value` must outlive the tape.
  Var constant_view(const Matrix& value);

  // Records an op result. The node requires grad iff any parent does; the
  // backward rule is dropped otherwise.
  Var record(Matrix value, std::initializer_list<Var> parents, Backward backward);

  // Seeds d(root)/d(root) = 1 for a 1x1 root and runs every recorded rule
  // after it, last to first.
  void backward(Var root);

  void accumulate(const Var& target, const Matrix& contribution);
  // Adds into the target's gradient in place through a callback, avoiding a
  // temporary for scattered updates.
  void accumulate_with(const Var& target, const std::function<void(Matrix&)>& update);

  const Matrix& value(std::size_t id) const;
  const Matrix& grad(std::size_t id);
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix owned;
    const Matrix* view = nullptr;
    Matrix grad;
    bool grad_ready = false;
    bool requires_grad = false;
    Backward backward;

    const Matrix& value() const { return view ? *view : owned; }
  };

  Matrix& grad_slot(std::size_t id);

  std::deque<Node> nodes_;
};

}  // namespace bgnn
