#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "ggae/types.hpp"

namespace ggae {

class Tape;

// Handle to a node on a Tape. Cheap to copy. Valid until the tape is rewound
// past the node it names.
class Tensor {
 public:
  Tensor() = default;

  Index rows() const;
  Index cols() const;
  const Mat& value() const;
  bool requires_grad() const;
  bool has_grad() const;
  // Populated gradient of the same shape as value(); ContractError when no
  // backward pass has filled it.
  const Mat& grad() const;
  // Leaf nodes only; the replacement must keep the shape.
  void set_value(Mat value);

  bool valid() const { return tape_ != nullptr; }
  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }

 private:
  friend class Tape;
  Tensor(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Records forward operations in topological order and replays them in exact
// reverse to accumulate gradients. A tape and its tensors form one
// single-threaded training context; independent tapes may run concurrently.
//
// The usual training cycle is
//   create parameters -> mark = checkpoint()
//   per epoch: forward ops, backward(loss), optimizer step, rewind(mark)
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = delete;
  Tape& operator=(Tape&&) = delete;

  // Leaf without gradient tracking.
  Tensor constant(Mat value);
  // Trainable leaf.
  Tensor parameter(Mat value);

  std::size_t checkpoint() const { return nodes_.size(); }
  // Drops every node recorded after the checkpoint and any stale gradients
  // on the survivors.
  void rewind(std::size_t mark);

  // Populates grad on every requires_grad node reachable from loss, visiting
  // nodes in exact reverse recording order. Fan-out accumulates additively.
  // loss must be 1x1.
  void backward(const Tensor& loss);

  std::size_t size() const { return nodes_.size(); }

  // --- node access for the operator layer ---
  // Checks the new value for finiteness and throws DivergenceError citing
  // `op` otherwise.
  Tensor emit(Mat value, bool requires_grad, BackwardFn backward, const char* op);
  const Mat& value_at(std::size_t id) const;
  Mat& value_mut(std::size_t id);
  bool requires_grad_at(std::size_t id) const;
  bool grad_present(std::size_t id) const;
  // Zero-initialised on first touch.
  Mat& grad_at(std::size_t id);
  const Mat& grad_ro(std::size_t id) const;
  void drop_grad(std::size_t id);
  bool is_leaf(std::size_t id) const;

 private:
  struct Node {
    Mat value;
    Mat grad;  // 0x0 when absent
    bool requires_grad = false;
    BackwardFn backward;  // empty for leaves
  };

  Node& node_checked(std::size_t id);
  const Node& node_checked(std::size_t id) const;

  std::vector<Node> nodes_;
};

// Primitive differentiable operators. All of them record onto the operands'
// tape and raise DimensionError (naming both shapes) on incompatible inputs.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor hadamard(const Tensor& a, const Tensor& b);
// [a | b] side by side; row counts must match.
Tensor concat_cols(const Tensor& a, const Tensor& b);
// Subgradient at 0 is taken as 0.
Tensor relu(const Tensor& a);
Tensor sigmoid(const Tensor& a);
// w * a + b elementwise with 1x1 tensors w, b.
Tensor scalar_affine(const Tensor& a, const Tensor& w, const Tensor& b);
// a (n x k) plus bias (1 x k) broadcast over rows.
Tensor add_rowwise(const Tensor& a, const Tensor& bias);
// column (n x 1) repeated across `cols` columns.
Tensor broadcast_cols(const Tensor& column, Index cols);
// Row lookup a[rows[i], :]; backward scatters (and accumulates) by index.
Tensor gather_rows(const Tensor& a, const std::vector<int>& rows);
// Mean of elementwise squared differences, as a 1x1 tensor.
Tensor mse_loss(const Tensor& pred, const Tensor& target);

}  // namespace ggae
