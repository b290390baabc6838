#include "ggae/autodiff.hpp"

#include <sstream>
#include <utility>

namespace ggae {

namespace {

std::string shape_of(const Mat& m) {
  std::ostringstream out;
  out << m.rows() << "x" << m.cols();
  return out.str();
}

std::string shape_pair(const char* op, const Mat& a, const Mat& b) {
  std::ostringstream out;
  out << op << ": incompatible shapes " << shape_of(a) << " and " << shape_of(b);
  return out.str();
}

Tape& same_tape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.valid() || !b.valid()) {
    throw ContractError(std::string(op) + ": operand has no tape");
  }
  if (a.tape() != b.tape()) {
    throw ContractError(std::string(op) + ": operands live on different tapes");
  }
  return *a.tape();
}

Tape& own_tape(const Tensor& a, const char* op) {
  if (!a.valid()) {
    throw ContractError(std::string(op) + ": operand has no tape");
  }
  return *a.tape();
}

}  // namespace

Mat glorot_uniform(Index rows, Index cols, Rng& rng) {
  const Scalar limit = std::sqrt(6.0 / static_cast<Scalar>(rows + cols));
  Mat out(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      out(i, j) = rng.uniform(-limit, limit);
    }
  }
  return out;
}

// --- Tensor ---

Index Tensor::rows() const { return value().rows(); }
Index Tensor::cols() const { return value().cols(); }

const Mat& Tensor::value() const {
  if (!valid()) throw ContractError("Tensor: default-constructed handle");
  return tape_->value_at(id_);
}

bool Tensor::requires_grad() const {
  if (!valid()) throw ContractError("Tensor: default-constructed handle");
  return tape_->requires_grad_at(id_);
}

bool Tensor::has_grad() const {
  if (!valid()) throw ContractError("Tensor: default-constructed handle");
  return tape_->grad_present(id_);
}

const Mat& Tensor::grad() const {
  if (!valid()) throw ContractError("Tensor: default-constructed handle");
  if (!tape_->grad_present(id_)) {
    throw ContractError("Tensor: gradient not populated; run backward first");
  }
  return tape_->grad_ro(id_);
}

void Tensor::set_value(Mat value) {
  if (!valid()) throw ContractError("Tensor: default-constructed handle");
  if (!tape_->is_leaf(id_)) {
    throw ContractError("Tensor: set_value is restricted to leaf nodes");
  }
  Mat& current = tape_->value_mut(id_);
  if (current.rows() != value.rows() || current.cols() != value.cols()) {
    throw DimensionError(shape_pair("set_value", current, value));
  }
  if (!value.allFinite()) {
    throw DivergenceError("set_value: non-finite values");
  }
  current = std::move(value);
}

// --- Tape ---

Tensor Tape::constant(Mat value) { return emit(std::move(value), false, {}, "constant"); }

Tensor Tape::parameter(Mat value) { return emit(std::move(value), true, {}, "parameter"); }

Tensor Tape::emit(Mat value, bool requires_grad, BackwardFn backward, const char* op) {
  if (!value.allFinite()) {
    throw DivergenceError(std::string(op) + ": non-finite values produced");
  }
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Tensor(this, nodes_.size() - 1);
}

void Tape::rewind(std::size_t mark) {
  if (mark > nodes_.size()) {
    throw ContractError("Tape: rewind past the end of the tape");
  }
  nodes_.resize(mark);
  for (Node& node : nodes_) {
    node.grad.resize(0, 0);
  }
}

void Tape::backward(const Tensor& loss) {
  if (loss.tape() != this) {
    throw ContractError("Tape: loss recorded on a different tape");
  }
  const Node& loss_node = node_checked(loss.id());
  if (loss_node.value.rows() != 1 || loss_node.value.cols() != 1) {
    throw ContractError("Tape: backward requires a 1x1 loss, got " + shape_of(loss_node.value));
  }
  for (Node& node : nodes_) {
    node.grad.resize(0, 0);
  }
  if (!loss_node.requires_grad) {
    return;  // nothing reachable is trainable
  }
  grad_at(loss.id()) = Mat::Ones(1, 1);
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (node.grad.size() == 0 || !node.backward) continue;
    node.backward(*this, i);
  }
}

Tape::Node& Tape::node_checked(std::size_t id) {
  if (id >= nodes_.size()) {
    throw ContractError("Tape: stale tensor handle (node was rewound away)");
  }
  return nodes_[id];
}

const Tape::Node& Tape::node_checked(std::size_t id) const {
  if (id >= nodes_.size()) {
    throw ContractError("Tape: stale tensor handle (node was rewound away)");
  }
  return nodes_[id];
}

const Mat& Tape::value_at(std::size_t id) const { return node_checked(id).value; }

Mat& Tape::value_mut(std::size_t id) { return node_checked(id).value; }

bool Tape::requires_grad_at(std::size_t id) const { return node_checked(id).requires_grad; }

bool Tape::grad_present(std::size_t id) const { return node_checked(id).grad.size() != 0; }

Mat& Tape::grad_at(std::size_t id) {
  Node& node = node_checked(id);
  if (node.grad.size() == 0) {
    node.grad = Mat::Zero(node.value.rows(), node.value.cols());
  }
  return node.grad;
}

const Mat& Tape::grad_ro(std::size_t id) const { return node_checked(id).grad; }

void Tape::drop_grad(std::size_t id) { node_checked(id).grad.resize(0, 0); }

bool Tape::is_leaf(std::size_t id) const { return !node_checked(id).backward; }

// --- operators ---

Tensor matmul(const Tensor& a, const Tensor& b) {
  Tape& tape = same_tape(a, b, "matmul");
  const Mat& av = a.value();
  const Mat& bv = b.value();
  if (av.cols() != bv.rows()) {
    throw DimensionError(shape_pair("matmul", av, bv));
  }
  const bool rg = a.requires_grad() || b.requires_grad();
  const std::size_t ia = a.id(), ib = b.id();
  return tape.emit(av * bv, rg,
                   [ia, ib](Tape& t, std::size_t self) {
                     const Mat& g = t.grad_ro(self);
                     if (t.requires_grad_at(ia)) {
                       t.grad_at(ia).noalias() += g * t.value_at(ib).transpose();
                     }
                     if (t.requires_grad_at(ib)) {
                       t.grad_at(ib).noalias() += t.value_at(ia).transpose() * g;
                     }
                   },
                   "matmul");
}

namespace {

enum class Elementwise { kAdd, kSub, kMul };

Tensor elementwise(const Tensor& a, const Tensor& b, Elementwise kind, const char* op) {
  Tape& tape = same_tape(a, b, op);
  const Mat& av = a.value();
  const Mat& bv = b.value();
  if (av.rows() != bv.rows() || av.cols() != bv.cols()) {
    throw DimensionError(shape_pair(op, av, bv));
  }
  Mat out;
  switch (kind) {
    case Elementwise::kAdd: out = av + bv; break;
    case Elementwise::kSub: out = av - bv; break;
    case Elementwise::kMul: out = av.cwiseProduct(bv); break;
  }
  const bool rg = a.requires_grad() || b.requires_grad();
  const std::size_t ia = a.id(), ib = b.id();
  return tape.emit(std::move(out), rg,
                   [ia, ib, kind](Tape& t, std::size_t self) {
                     const Mat& g = t.grad_ro(self);
                     switch (kind) {
                       case Elementwise::kAdd:
                         if (t.requires_grad_at(ia)) t.grad_at(ia) += g;
                         if (t.requires_grad_at(ib)) t.grad_at(ib) += g;
                         break;
                       case Elementwise::kSub:
                         if (t.requires_grad_at(ia)) t.grad_at(ia) += g;
                         if (t.requires_grad_at(ib)) t.grad_at(ib) -= g;
                         break;
                       case Elementwise::kMul:
                         if (t.requires_grad_at(ia)) {
                           t.grad_at(ia) += g.cwiseProduct(t.value_at(ib));
                         }
                         if (t.requires_grad_at(ib)) {
                           t.grad_at(ib) += g.cwiseProduct(t.value_at(ia));
                         }
                         break;
                     }
                   },
                   op);
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) { return elementwise(a, b, Elementwise::kAdd, "add"); }

Tensor sub(const Tensor& a, const Tensor& b) { return elementwise(a, b, Elementwise::kSub, "sub"); }

Tensor hadamard(const Tensor& a, const Tensor& b) {
  return elementwise(a, b, Elementwise::kMul, "hadamard");
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  Tape& tape = same_tape(a, b, "concat_cols");
  const Mat& av = a.value();
  const Mat& bv = b.value();
  if (av.rows() != bv.rows()) {
    throw DimensionError(shape_pair("concat_cols", av, bv));
  }
  Mat out(av.rows(), av.cols() + bv.cols());
  out.leftCols(av.cols()) = av;
  out.rightCols(bv.cols()) = bv;
  const bool rg = a.requires_grad() || b.requires_grad();
  const std::size_t ia = a.id(), ib = b.id();
  const Index ac = av.cols(), bc = bv.cols();
  return tape.emit(std::move(out), rg,
                   [ia, ib, ac, bc](Tape& t, std::size_t self) {
                     const Mat& g = t.grad_ro(self);
                     if (t.requires_grad_at(ia)) t.grad_at(ia) += g.leftCols(ac);
                     if (t.requires_grad_at(ib)) t.grad_at(ib) += g.rightCols(bc);
                   },
                   "concat_cols");
}

Tensor relu(const Tensor& a) {
  Tape& tape = own_tape(a, "relu");
  const std::size_t ia = a.id();
  return tape.emit(a.value().cwiseMax(0.0), a.requires_grad(),
                   [ia](Tape& t, std::size_t self) {
                     if (!t.requires_grad_at(ia)) return;
                     const Mat& g = t.grad_ro(self);
                     const Mat& x = t.value_at(ia);
                     t.grad_at(ia) += (x.array() > 0.0).select(g, Mat::Zero(g.rows(), g.cols()));
                   },
                   "relu");
}

Tensor sigmoid(const Tensor& a) {
  Tape& tape = own_tape(a, "sigmoid");
  // split by sign so exp never overflows
  Mat out = a.value().unaryExpr([](Scalar x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const Scalar e = std::exp(x);
    return e / (1.0 + e);
  });
  const std::size_t ia = a.id();
  return tape.emit(std::move(out), a.requires_grad(),
                   [ia](Tape& t, std::size_t self) {
                     if (!t.requires_grad_at(ia)) return;
                     const Mat& g = t.grad_ro(self);
                     const Mat& s = t.value_at(self);
                     t.grad_at(ia).array() += g.array() * s.array() * (1.0 - s.array());
                   },
                   "sigmoid");
}

Tensor scalar_affine(const Tensor& a, const Tensor& w, const Tensor& b) {
  Tape& tape = same_tape(a, w, "scalar_affine");
  same_tape(a, b, "scalar_affine");
  if (w.rows() != 1 || w.cols() != 1) {
    throw DimensionError(shape_pair("scalar_affine: w must be 1x1", w.value(), a.value()));
  }
  if (b.rows() != 1 || b.cols() != 1) {
    throw DimensionError(shape_pair("scalar_affine: b must be 1x1", b.value(), a.value()));
  }
  const Scalar wv = w.value()(0, 0);
  const Scalar bv = b.value()(0, 0);
  Mat out = (a.value().array() * wv + bv).matrix();
  const bool rg = a.requires_grad() || w.requires_grad() || b.requires_grad();
  const std::size_t ia = a.id(), iw = w.id(), ib = b.id();
  return tape.emit(std::move(out), rg,
                   [ia, iw, ib](Tape& t, std::size_t self) {
                     const Mat& g = t.grad_ro(self);
                     const Scalar wv = t.value_at(iw)(0, 0);
                     if (t.requires_grad_at(ia)) t.grad_at(ia) += wv * g;
                     if (t.requires_grad_at(iw)) {
                       t.grad_at(iw)(0, 0) += g.cwiseProduct(t.value_at(ia)).sum();
                     }
                     if (t.requires_grad_at(ib)) t.grad_at(ib)(0, 0) += g.sum();
                   },
                   "scalar_affine");
}

Tensor add_rowwise(const Tensor& a, const Tensor& bias) {
  Tape& tape = same_tape(a, bias, "add_rowwise");
  const Mat& av = a.value();
  const Mat& bv = bias.value();
  if (bv.rows() != 1 || bv.cols() != av.cols()) {
    throw DimensionError(shape_pair("add_rowwise", av, bv));
  }
  Mat out = av.rowwise() + bv.row(0);
  const bool rg = a.requires_grad() || bias.requires_grad();
  const std::size_t ia = a.id(), ib = bias.id();
  return tape.emit(std::move(out), rg,
                   [ia, ib](Tape& t, std::size_t self) {
                     const Mat& g = t.grad_ro(self);
                     if (t.requires_grad_at(ia)) t.grad_at(ia) += g;
                     if (t.requires_grad_at(ib)) t.grad_at(ib) += g.colwise().sum();
                   },
                   "add_rowwise");
}

Tensor broadcast_cols(const Tensor& column, Index cols) {
  Tape& tape = own_tape(column, "broadcast_cols");
  const Mat& cv = column.value();
  if (cv.cols() != 1) {
    throw DimensionError("broadcast_cols: expected an nx1 column, got " + shape_of(cv));
  }
  if (cols < 1) {
    throw DimensionError("broadcast_cols: target column count must be positive");
  }
  const std::size_t ic = column.id();
  return tape.emit(cv.replicate(1, cols), column.requires_grad(),
                   [ic](Tape& t, std::size_t self) {
                     if (!t.requires_grad_at(ic)) return;
                     t.grad_at(ic) += t.grad_ro(self).rowwise().sum();
                   },
                   "broadcast_cols");
}

Tensor gather_rows(const Tensor& a, const std::vector<int>& rows) {
  Tape& tape = own_tape(a, "gather_rows");
  const Mat& av = a.value();
  Mat out(static_cast<Index>(rows.size()), av.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= av.rows()) {
      throw DimensionError("gather_rows: row index " + std::to_string(rows[i]) +
                           " outside matrix " + shape_of(av));
    }
    out.row(static_cast<Index>(i)) = av.row(rows[i]);
  }
  const std::size_t ia = a.id();
  return tape.emit(std::move(out), a.requires_grad(),
                   [ia, rows](Tape& t, std::size_t self) {
                     if (!t.requires_grad_at(ia)) return;
                     const Mat& g = t.grad_ro(self);
                     Mat& ga = t.grad_at(ia);
                     for (std::size_t i = 0; i < rows.size(); ++i) {
                       ga.row(rows[i]) += g.row(static_cast<Index>(i));
                     }
                   },
                   "gather_rows");
}

Tensor mse_loss(const Tensor& pred, const Tensor& target) {
  Tape& tape = same_tape(pred, target, "mse_loss");
  const Mat& pv = pred.value();
  const Mat& tv = target.value();
  if (pv.rows() != tv.rows() || pv.cols() != tv.cols()) {
    throw DimensionError(shape_pair("mse_loss", pv, tv));
  }
  const Scalar n = static_cast<Scalar>(pv.size());
  Mat out(1, 1);
  out(0, 0) = (pv - tv).squaredNorm() / n;
  const bool rg = pred.requires_grad() || target.requires_grad();
  const std::size_t ip = pred.id(), it = target.id();
  return tape.emit(std::move(out), rg,
                   [ip, it, n](Tape& t, std::size_t self) {
                     const Scalar g = t.grad_ro(self)(0, 0);
                     const Mat diff = t.value_at(ip) - t.value_at(it);
                     if (t.requires_grad_at(ip)) t.grad_at(ip) += (2.0 / n) * g * diff;
                     if (t.requires_grad_at(it)) t.grad_at(it) -= (2.0 / n) * g * diff;
                   },
                   "mse_loss");
}

}  // namespace ggae
