#include "bgnn/tape.hpp"

#include "bgnn/error.hpp"

namespace bgnn {

const Matrix& Var::value() const { return tape_->value(id_); }
const Matrix& Var::grad() const { return tape_->grad(id_); }
bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Var Tape::leaf(Matrix value, bool requires_grad) {
  Node& n = nodes_.emplace_back();
  n.owned = std::move(value);
  n.requires_grad = requires_grad;
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Matrix value) { return leaf(std::move(value), false); }

Var Tape::constant_view(const Matrix& value) {
  Node& n = nodes_.emplace_back();
  n.view = &value;
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Matrix value, std::initializer_list<Var> parents, Backward backward) {
  bool needs = false;
  for (const Var& p : parents) {
    if (&p.tape() != this) throw std::logic_error("Tape::record: parent from another tape");
    needs = needs || nodes_[p.id()].requires_grad;
  }
  Node& n = nodes_.emplace_back();
  n.owned = std::move(value);
  n.requires_grad = needs;
  if (needs) n.backward = std::move(backward);
  return Var(this, nodes_.size() - 1);
}

void Tape::backward(Var root) {
  if (&root.tape() != this) throw std::logic_error("Tape::backward: root from another tape");
  const Matrix& rv = value(root.id());
  if (rv.rows() != 1 || rv.cols() != 1) {
    throw ShapeError("backward root must be 1x1, got " + rv.shape_string());
  }
  for (auto& n : nodes_) {
    n.grad_ready = false;
  }
  grad_slot(root.id())(0, 0) = 1.0;
  for (std::size_t id = root.id() + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.requires_grad || !n.grad_ready || !n.backward) continue;
    n.backward(*this, n.grad);
  }
}

Matrix& Tape::grad_slot(std::size_t id) {
  Node& n = nodes_[id];
  if (!n.grad_ready) {
    const Matrix& v = n.value();
    if (n.grad.same_shape(v)) {
      n.grad.fill(0.0);
    } else {
      n.grad = Matrix(v.rows(), v.cols());
    }
    n.grad_ready = true;
  }
  return n.grad;
}

void Tape::accumulate(const Var& target, const Matrix& contribution) {
  if (!nodes_[target.id()].requires_grad) return;
  Matrix& g = grad_slot(target.id());
  if (!g.same_shape(contribution)) {
    throw ShapeError("gradient shape " + contribution.shape_string() + " for value " +
                     g.shape_string());
  }
  g += contribution;
}

void Tape::accumulate_with(const Var& target, const std::function<void(Matrix&)>& update) {
  if (!nodes_[target.id()].requires_grad) return;
  update(grad_slot(target.id()));
}

const Matrix& Tape::value(std::size_t id) const { return nodes_[id].value(); }

const Matrix& Tape::grad(std::size_t id) { return grad_slot(id); }

}  // namespace bgnn
