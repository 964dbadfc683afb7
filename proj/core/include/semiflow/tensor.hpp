#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <vector>

#include "semiflow/errors.hpp"

namespace semiflow::nn {

using Mat = Eigen::MatrixXd;

class Tape;

/// Lightweight handle to a tape node. Vectors are stored as n-by-1 matrices,
/// scalars as 1-by-1.
struct Var {
  Tape* tape = nullptr;
  int id = -1;
  bool valid() const { return tape != nullptr && id >= 0; }
};

/// Arena that records a computation as matrix-valued nodes with reverse-mode
/// backward closures. A single reverse sweep from a scalar root accumulates
/// gradients into every reachable leaf.
///
/// Nodes created after mark() can be discarded with rewind(); evaluation-only
/// callers use this to keep memory flat across repeated field evaluations.
class Tape {
 public:
  using Vjp = std::function<void(Tape&, int id)>;

  Var constant(Mat value) { return push(std::move(value), false, {}); }
  Var leaf(Mat value) { return push(std::move(value), true, {}); }
  Var scalar(double v) { return constant(Mat::Constant(1, 1, v)); }

  const Mat& val(Var v) const { return node(v).value; }
  const Mat& val(int id) const { return nodes_[id].value; }
  bool requires_grad(Var v) const { return node(v).requires_grad; }

  /// Gradient accumulated for v by the last backward(); zero-shaped if none.
  Mat grad(Var v) const {
    const Node& n = node(v);
    if (n.grad_set) return n.grad;
    return Mat::Zero(n.value.rows(), n.value.cols());
  }

  /// Reverse sweep from a 1x1 root. Clears previous gradients first.
  void backward(Var root);

  std::size_t mark() const { return nodes_.size(); }
  void rewind(std::size_t mark) { nodes_.resize(mark); }
  std::size_t size() const { return nodes_.size(); }

  /// Records a node. The vjp closure reads grad_of(id) and calls accum() on
  /// its input ids; it is dropped entirely when no input requires a gradient.
  Var make(Mat value, const std::vector<Var>& inputs, Vjp vjp);

  void accum(int id, const Eigen::Ref<const Mat>& g);
  const Mat& grad_of(int id) const { return nodes_[id].grad; }

 private:
  struct Node {
    Mat value;
    Mat grad;
    Vjp vjp;
    bool requires_grad = false;
    bool grad_set = false;
  };

  Var push(Mat value, bool requires_grad, Vjp vjp) {
    nodes_.push_back(Node{std::move(value), {}, std::move(vjp), requires_grad, false});
    return Var{this, static_cast<int>(nodes_.size() - 1)};
  }

  const Node& node(Var v) const {
    if (!v.valid() || v.tape != this ||
        v.id >= static_cast<int>(nodes_.size()))
      throw Error("Var does not belong to this tape");
    return nodes_[v.id];
  }

  std::vector<Node> nodes_;
};

// ---- primitive operations ---------------------------------------------------

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);  // elementwise
Var scale(Var a, double c);
Var add_scalar(Var a, double c);
Var matmul(Var a, Var b);
Var add_col(Var x, Var bias);  // bias (r x 1) added to every column of x

Var silu(Var x);
Var tanh_act(Var x);
Var sigmoid(Var x);
Var sqrt_pos(Var x);  // elementwise sqrt, domain x > 0
Var log_pos(Var x);
Var exp_all(Var x);

Var softmax_cols(Var x);
Var log_softmax_cols(Var x);

/// Sums columns of x into groups: out(:, s) = sum over {p : seg[p] == s}.
Var segment_sum_cols(Var x, std::shared_ptr<const std::vector<int>> seg,
                     int n_segments);
Var gather_cols(Var x, std::shared_ptr<const std::vector<int>> idx);

Var vcat(const std::vector<Var>& parts);
Var slice_rows(Var x, int row0, int rows);
Var slice_cols(Var x, int col0, int cols);
Var reshape(Var x, int rows, int cols);  // column-major relabelling

Var colwise_sqnorm(Var x);  // (1 x c)
Var colwise_sum(Var x);     // (1 x c)
Var mul_rowvec(Var x, Var s);
Var div_rowvec(Var x, Var s);
Var tile_cols(Var x, int k);

/// Blockwise product for tangent batches: t is (r x c*k), s is (r x c),
/// out block i = t block i (cwise*) s.
Var mul_tiled(Var t, Var s);

Var sum_all(Var x);    // 1x1
Var mean_cols(Var x);  // (r x 1)
Var trace_of(Var x);   // 1x1, x square
Var entry(Var x, int i, int j);

}  // namespace semiflow::nn
