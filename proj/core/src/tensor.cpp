#include "semiflow/tensor.hpp"

#include <cmath>
#include <string>

namespace semiflow::nn {

namespace {

Tape& tape_of(Var a) {
  if (!a.valid()) throw Error("operation on invalid Var");
  return *a.tape;
}

void require_same_tape(Var a, Var b) {
  if (a.tape != b.tape) throw Error("operands live on different tapes");
}

void require_same_shape(const Mat& a, const Mat& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw SizeError(std::string(op) + ": shape mismatch (" +
                    std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                    " vs " + std::to_string(b.rows()) + "x" +
                    std::to_string(b.cols()) + ")");
}

}  // namespace

Var Tape::make(Mat value, const std::vector<Var>& inputs, Vjp vjp) {
  bool needs = false;
  for (const Var& in : inputs) {
    if (in.tape != this) throw Error("input from another tape");
    needs = needs || nodes_[in.id].requires_grad;
  }
  return push(std::move(value), needs, needs ? std::move(vjp) : Vjp{});
}

void Tape::accum(int id, const Eigen::Ref<const Mat>& g) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return;
  if (!n.grad_set) {
    n.grad = g;
    n.grad_set = true;
  } else {
    n.grad += g;
  }
}

void Tape::backward(Var root) {
  const Node& r = node(root);
  if (r.value.rows() != 1 || r.value.cols() != 1)
    throw SizeError("backward: root must be a scalar");
  for (Node& n : nodes_) {
    n.grad_set = false;
    n.grad.resize(0, 0);
  }
  nodes_[root.id].grad = Mat::Ones(1, 1);
  nodes_[root.id].grad_set = true;
  for (int i = root.id; i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.grad_set && n.requires_grad && n.vjp) n.vjp(*this, i);
  }
}

// ---- arithmetic ------------------------------------------------------------

Var add(Var a, Var b) {
  require_same_tape(a, b);
  Tape& t = tape_of(a);
  require_same_shape(t.val(a), t.val(b), "add");
  return t.make(t.val(a) + t.val(b), {a, b}, [a, b](Tape& tp, int id) {
    tp.accum(a.id, tp.grad_of(id));
    tp.accum(b.id, tp.grad_of(id));
  });
}

Var sub(Var a, Var b) {
  require_same_tape(a, b);
  Tape& t = tape_of(a);
  require_same_shape(t.val(a), t.val(b), "sub");
  return t.make(t.val(a) - t.val(b), {a, b}, [a, b](Tape& tp, int id) {
    tp.accum(a.id, tp.grad_of(id));
    tp.accum(b.id, -tp.grad_of(id));
  });
}

Var mul(Var a, Var b) {
  require_same_tape(a, b);
  Tape& t = tape_of(a);
  require_same_shape(t.val(a), t.val(b), "mul");
  return t.make(t.val(a).cwiseProduct(t.val(b)), {a, b},
                [a, b](Tape& tp, int id) {
                  tp.accum(a.id, tp.grad_of(id).cwiseProduct(tp.val(b)));
                  tp.accum(b.id, tp.grad_of(id).cwiseProduct(tp.val(a)));
                });
}

Var scale(Var a, double c) {
  Tape& t = tape_of(a);
  return t.make(c * t.val(a), {a}, [a, c](Tape& tp, int id) {
    tp.accum(a.id, c * tp.grad_of(id));
  });
}

Var add_scalar(Var a, double c) {
  Tape& t = tape_of(a);
  return t.make(t.val(a).array() + c, {a}, [a](Tape& tp, int id) {
    tp.accum(a.id, tp.grad_of(id));
  });
}

Var matmul(Var a, Var b) {
  require_same_tape(a, b);
  Tape& t = tape_of(a);
  if (t.val(a).cols() != t.val(b).rows())
    throw SizeError("matmul: inner dimensions differ");
  return t.make(t.val(a) * t.val(b), {a, b}, [a, b](Tape& tp, int id) {
    tp.accum(a.id, tp.grad_of(id) * tp.val(b).transpose());
    tp.accum(b.id, tp.val(a).transpose() * tp.grad_of(id));
  });
}

Var add_col(Var x, Var bias) {
  require_same_tape(x, bias);
  Tape& t = tape_of(x);
  const Mat& xv = t.val(x);
  const Mat& bv = t.val(bias);
  if (bv.cols() != 1 || bv.rows() != xv.rows())
    throw SizeError("add_col: bias must be (rows x 1)");
  return t.make(xv.colwise() + bv.col(0), {x, bias},
                [x, bias](Tape& tp, int id) {
                  tp.accum(x.id, tp.grad_of(id));
                  tp.accum(bias.id, tp.grad_of(id).rowwise().sum());
                });
}

// ---- elementwise nonlinearities ----------------------------------------------

Var silu(Var x) {
  Tape& t = tape_of(x);
  const Mat& xv = t.val(x);
  Mat s = (1.0 / (1.0 + (-xv.array()).exp())).matrix();
  return t.make(xv.cwiseProduct(s), {x}, [x](Tape& tp, int id) {
    const Mat& xv = tp.val(x);
    Mat s = (1.0 / (1.0 + (-xv.array()).exp())).matrix();
    Mat d = s.array() * (1.0 + xv.array() * (1.0 - s.array()));
    tp.accum(x.id, tp.grad_of(id).cwiseProduct(d));
  });
}

Var tanh_act(Var x) {
  Tape& t = tape_of(x);
  return t.make(t.val(x).array().tanh(), {x}, [x](Tape& tp, int id) {
    const Mat& y = tp.val(id);
    tp.accum(x.id,
             tp.grad_of(id).cwiseProduct((1.0 - y.array().square()).matrix()));
  });
}

Var sigmoid(Var x) {
  Tape& t = tape_of(x);
  Mat y = (1.0 / (1.0 + (-t.val(x).array()).exp())).matrix();
  return t.make(std::move(y), {x}, [x](Tape& tp, int id) {
    const Mat& y = tp.val(id);
    Mat d = y.array() * (1.0 - y.array());
    tp.accum(x.id, tp.grad_of(id).cwiseProduct(d));
  });
}

Var sqrt_pos(Var x) {
  Tape& t = tape_of(x);
  return t.make(t.val(x).array().sqrt(), {x}, [x](Tape& tp, int id) {
    const Mat& y = tp.val(id);
    tp.accum(x.id, (tp.grad_of(id).array() * 0.5 / y.array()).matrix());
  });
}

Var log_pos(Var x) {
  Tape& t = tape_of(x);
  return t.make(t.val(x).array().log(), {x}, [x](Tape& tp, int id) {
    tp.accum(x.id, tp.grad_of(id).cwiseQuotient(tp.val(x)));
  });
}

Var exp_all(Var x) {
  Tape& t = tape_of(x);
  return t.make(t.val(x).array().exp(), {x}, [x](Tape& tp, int id) {
    tp.accum(x.id, tp.grad_of(id).cwiseProduct(tp.val(id)));
  });
}

// ---- softmax ---------------------------------------------------------------

Var softmax_cols(Var x) {
  Tape& t = tape_of(x);
  const Mat& xv = t.val(x);
  Mat y(xv.rows(), xv.cols());
  for (int c = 0; c < xv.cols(); ++c) {
    Eigen::ArrayXd e = (xv.col(c).array() - xv.col(c).maxCoeff()).exp();
    y.col(c) = e / e.sum();
  }
  return t.make(std::move(y), {x}, [x](Tape& tp, int id) {
    const Mat& y = tp.val(id);
    const Mat& g = tp.grad_of(id);
    Mat gx(y.rows(), y.cols());
    for (int c = 0; c < y.cols(); ++c) {
      const double dot = g.col(c).dot(y.col(c));
      gx.col(c) = y.col(c).cwiseProduct((g.col(c).array() - dot).matrix());
    }
    tp.accum(x.id, gx);
  });
}

Var log_softmax_cols(Var x) {
  Tape& t = tape_of(x);
  const Mat& xv = t.val(x);
  Mat y(xv.rows(), xv.cols());
  for (int c = 0; c < xv.cols(); ++c) {
    const double mx = xv.col(c).maxCoeff();
    const double lse = mx + std::log((xv.col(c).array() - mx).exp().sum());
    y.col(c) = xv.col(c).array() - lse;
  }
  return t.make(std::move(y), {x}, [x](Tape& tp, int id) {
    const Mat& y = tp.val(id);
    const Mat& g = tp.grad_of(id);
    Mat gx(y.rows(), y.cols());
    for (int c = 0; c < y.cols(); ++c) {
      const double gsum = g.col(c).sum();
      gx.col(c) = g.col(c) - gsum * y.col(c).array().exp().matrix();
    }
    tp.accum(x.id, gx);
  });
}

// ---- gather / scatter --------------------------------------------------------

Var segment_sum_cols(Var x, std::shared_ptr<const std::vector<int>> seg,
                     int n_segments) {
  Tape& t = tape_of(x);
  const Mat& xv = t.val(x);
  if (static_cast<int>(seg->size()) != xv.cols())
    throw SizeError("segment_sum_cols: one segment id per column required");
  Mat y = Mat::Zero(xv.rows(), n_segments);
  for (int p = 0; p < xv.cols(); ++p) y.col((*seg)[p]) += xv.col(p);
  return t.make(std::move(y), {x}, [x, seg](Tape& tp, int id) {
    const Mat& g = tp.grad_of(id);
    Mat gx(tp.val(x).rows(), tp.val(x).cols());
    for (int p = 0; p < gx.cols(); ++p) gx.col(p) = g.col((*seg)[p]);
    tp.accum(x.id, gx);
  });
}

Var gather_cols(Var x, std::shared_ptr<const std::vector<int>> idx) {
  Tape& t = tape_of(x);
  const Mat& xv = t.val(x);
  Mat y(xv.rows(), static_cast<int>(idx->size()));
  for (int p = 0; p < y.cols(); ++p) y.col(p) = xv.col((*idx)[p]);
  return t.make(std::move(y), {x}, [x, idx](Tape& tp, int id) {
    const Mat& g = tp.grad_of(id);
    Mat gx = Mat::Zero(tp.val(x).rows(), tp.val(x).cols());
    for (int p = 0; p < g.cols(); ++p) gx.col((*idx)[p]) += g.col(p);
    tp.accum(x.id, gx);
  });
}

Var vcat(const std::vector<Var>& parts) {
  if (parts.empty()) throw SizeError("vcat: no parts");
  Tape& t = tape_of(parts.front());
  Eigen::Index rows = 0;
  const Eigen::Index cols = t.val(parts.front()).cols();
  for (const Var& p : parts) {
    if (t.val(p).cols() != cols) throw SizeError("vcat: column count differs");
    rows += t.val(p).rows();
  }
  Mat y(rows, cols);
  Eigen::Index r = 0;
  for (const Var& p : parts) {
    y.middleRows(r, t.val(p).rows()) = t.val(p);
    r += t.val(p).rows();
  }
  return t.make(std::move(y), parts, [parts](Tape& tp, int id) {
    const Mat& g = tp.grad_of(id);
    Eigen::Index r = 0;
    for (const Var& p : parts) {
      const Eigen::Index pr = tp.val(p).rows();
      tp.accum(p.id, g.middleRows(r, pr));
      r += pr;
    }
  });
}

Var slice_rows(Var x, int row0, int rows) {
  Tape& t = tape_of(x);
  const Mat& xv = t.val(x);
  if (row0 < 0 || row0 + rows > xv.rows()) throw SizeError("slice_rows: range");
  return t.make(xv.middleRows(row0, rows), {x},
                [x, row0, rows](Tape& tp, int id) {
                  const Mat& xv = tp.val(x);
                  Mat gx = Mat::Zero(xv.rows(), xv.cols());
                  gx.middleRows(row0, rows) = tp.grad_of(id);
                  tp.accum(x.id, gx);
                });
}

Var slice_cols(Var x, int col0, int cols) {
  Tape& t = tape_of(x);
  const Mat& xv = t.val(x);
  if (col0 < 0 || col0 + cols > xv.cols()) throw SizeError("slice_cols: range");
  return t.make(xv.middleCols(col0, cols), {x},
                [x, col0, cols](Tape& tp, int id) {
                  const Mat& xv = tp.val(x);
                  Mat gx = Mat::Zero(xv.rows(), xv.cols());
                  gx.middleCols(col0, cols) = tp.grad_of(id);
                  tp.accum(x.id, gx);
                });
}

Var reshape(Var x, int rows, int cols) {
  Tape& t = tape_of(x);
  const Mat& xv = t.val(x);
  if (xv.size() != static_cast<Eigen::Index>(rows) * cols)
    throw SizeError("reshape: element count differs");
  Mat y = Eigen::Map<const Mat>(xv.data(), rows, cols);
  return t.make(std::move(y), {x}, [x](Tape& tp, int id) {
    const Mat& xv = tp.val(x);
    const Mat& g = tp.grad_of(id);
    tp.accum(x.id, Eigen::Map<const Mat>(g.data(), xv.rows(), xv.cols()));
  });
}

// ---- reductions and broadcasts -------------------------------------------------

Var colwise_sqnorm(Var x) {
  Tape& t = tape_of(x);
  return t.make(t.val(x).colwise().squaredNorm(), {x}, [x](Tape& tp, int id) {
    const Mat& g = tp.grad_of(id);
    Mat gx = tp.val(x);
    for (int c = 0; c < gx.cols(); ++c) gx.col(c) *= 2.0 * g(0, c);
    tp.accum(x.id, gx);
  });
}

Var colwise_sum(Var x) {
  Tape& t = tape_of(x);
  return t.make(t.val(x).colwise().sum(), {x}, [x](Tape& tp, int id) {
    const Mat& xv = tp.val(x);
    tp.accum(x.id, Mat::Ones(xv.rows(), 1) * tp.grad_of(id));
  });
}

Var mul_rowvec(Var x, Var s) {
  require_same_tape(x, s);
  Tape& t = tape_of(x);
  const Mat& xv = t.val(x);
  const Mat& sv = t.val(s);
  if (sv.rows() != 1 || sv.cols() != xv.cols())
    throw SizeError("mul_rowvec: scaler must be (1 x cols)");
  Mat y = xv.array().rowwise() * sv.row(0).array();
  return t.make(std::move(y), {x, s}, [x, s](Tape& tp, int id) {
    const Mat& g = tp.grad_of(id);
    const Mat& xv = tp.val(x);
    const Mat& sv = tp.val(s);
    tp.accum(x.id, (g.array().rowwise() * sv.row(0).array()).matrix());
    tp.accum(s.id, g.cwiseProduct(xv).colwise().sum());
  });
}

Var div_rowvec(Var x, Var s) {
  require_same_tape(x, s);
  Tape& t = tape_of(x);
  const Mat& xv = t.val(x);
  const Mat& sv = t.val(s);
  if (sv.rows() != 1 || sv.cols() != xv.cols())
    throw SizeError("div_rowvec: divisor must be (1 x cols)");
  Mat y = xv.array().rowwise() / sv.row(0).array();
  return t.make(std::move(y), {x, s}, [x, s](Tape& tp, int id) {
    const Mat& g = tp.grad_of(id);
    const Mat& y = tp.val(id);
    const Mat& sv = tp.val(s);
    tp.accum(x.id, (g.array().rowwise() / sv.row(0).array()).matrix());
    Mat gs = -g.cwiseProduct(y).colwise().sum();
    gs.array() /= sv.row(0).array();
    tp.accum(s.id, gs);
  });
}

Var tile_cols(Var x, int k) {
  Tape& t = tape_of(x);
  const Mat& xv = t.val(x);
  Mat y(xv.rows(), xv.cols() * k);
  for (int i = 0; i < k; ++i) y.middleCols(i * xv.cols(), xv.cols()) = xv;
  return t.make(std::move(y), {x}, [x, k](Tape& tp, int id) {
    const Mat& xv = tp.val(x);
    const Mat& g = tp.grad_of(id);
    Mat gx = Mat::Zero(xv.rows(), xv.cols());
    for (int i = 0; i < k; ++i) gx += g.middleCols(i * xv.cols(), xv.cols());
    tp.accum(x.id, gx);
  });
}

Var mul_tiled(Var tvar, Var s) {
  require_same_tape(tvar, s);
  Tape& t = tape_of(tvar);
  const Mat& tv = t.val(tvar);
  const Mat& sv = t.val(s);
  if (sv.cols() == 0 || tv.cols() % sv.cols() != 0 || tv.rows() != sv.rows())
    throw SizeError("mul_tiled: tangent width must be a multiple of value width");
  const int k = static_cast<int>(tv.cols() / sv.cols());
  const int c = static_cast<int>(sv.cols());
  Mat y(tv.rows(), tv.cols());
  for (int i = 0; i < k; ++i)
    y.middleCols(i * c, c) = tv.middleCols(i * c, c).cwiseProduct(sv);
  return t.make(std::move(y), {tvar, s}, [tvar, s, k, c](Tape& tp, int id) {
    const Mat& g = tp.grad_of(id);
    const Mat& tv = tp.val(tvar);
    const Mat& sv = tp.val(s);
    Mat gt(tv.rows(), tv.cols());
    Mat gs = Mat::Zero(sv.rows(), sv.cols());
    for (int i = 0; i < k; ++i) {
      gt.middleCols(i * c, c) = g.middleCols(i * c, c).cwiseProduct(sv);
      gs += g.middleCols(i * c, c).cwiseProduct(tv.middleCols(i * c, c));
    }
    tp.accum(tvar.id, gt);
    tp.accum(s.id, gs);
  });
}

Var sum_all(Var x) {
  Tape& t = tape_of(x);
  return t.make(Mat::Constant(1, 1, t.val(x).sum()), {x},
                [x](Tape& tp, int id) {
                  const Mat& xv = tp.val(x);
                  tp.accum(x.id, Mat::Constant(xv.rows(), xv.cols(),
                                               tp.grad_of(id)(0, 0)));
                });
}

Var mean_cols(Var x) {
  Tape& t = tape_of(x);
  const Mat& xv = t.val(x);
  if (xv.cols() == 0) throw SizeError("mean_cols: no columns");
  return t.make(xv.rowwise().mean(), {x}, [x](Tape& tp, int id) {
    const Mat& xv = tp.val(x);
    const double inv = 1.0 / static_cast<double>(xv.cols());
    tp.accum(x.id, (tp.grad_of(id) * inv).replicate(1, xv.cols()));
  });
}

Var trace_of(Var x) {
  Tape& t = tape_of(x);
  const Mat& xv = t.val(x);
  if (xv.rows() != xv.cols()) throw SizeError("trace_of: square matrix required");
  return t.make(Mat::Constant(1, 1, xv.trace()), {x}, [x](Tape& tp, int id) {
    const Mat& xv = tp.val(x);
    tp.accum(x.id, (tp.grad_of(id)(0, 0) *
                    Mat::Identity(xv.rows(), xv.cols())));
  });
}

Var entry(Var x, int i, int j) {
  Tape& t = tape_of(x);
  const Mat& xv = t.val(x);
  if (i < 0 || i >= xv.rows() || j < 0 || j >= xv.cols())
    throw SizeError("entry: index out of range");
  return t.make(Mat::Constant(1, 1, xv(i, j)), {x}, [x, i, j](Tape& tp, int id) {
    const Mat& xv = tp.val(x);
    Mat gx = Mat::Zero(xv.rows(), xv.cols());
    gx(i, j) = tp.grad_of(id)(0, 0);
    tp.accum(x.id, gx);
  });
}

}  // namespace semiflow::nn
