#pragma once

#include <memory>
#include <string>
#include <vector>

#include "semiflow/mlp.hpp"
#include "semiflow/tensor.hpp"

// Value/tangent pairs threaded through the complement-graph network so the
// divergence of the flow field comes out as a taped scalar. A value of shape
// (r x c) carries its directional derivatives along K seed directions as an
// (r x c*K) matrix, block k holding d(value)/d(seed_k). Tangent propagation is
// built from first-order taped primitives, which keeps the trace of the field
// Jacobian differentiable with respect to parameters.

namespace semiflow::detail {

using nn::Var;

struct DualVar {
  Var v;
  Var t;
  bool has_t = false;
};

inline DualVar dual_const(Var v) { return {v, {}, false}; }

inline DualVar dual(Var v, Var t) { return {v, t, true}; }

inline int tangent_width(const DualVar& x) {
  if (!x.has_t) return 0;
  const auto& tv = x.v.tape->val(x.t);
  const auto& vv = x.v.tape->val(x.v);
  return vv.cols() == 0 ? 0 : static_cast<int>(tv.cols() / vv.cols());
}

inline DualVar d_add(const DualVar& a, const DualVar& b) {
  DualVar out;
  out.v = nn::add(a.v, b.v);
  if (a.has_t && b.has_t) {
    out.t = nn::add(a.t, b.t);
    out.has_t = true;
  } else if (a.has_t || b.has_t) {
    out.t = a.has_t ? a.t : b.t;
    out.has_t = true;
  }
  return out;
}

inline DualVar d_sub(const DualVar& a, const DualVar& b) {
  DualVar out;
  out.v = nn::sub(a.v, b.v);
  if (a.has_t && b.has_t) {
    out.t = nn::sub(a.t, b.t);
    out.has_t = true;
  } else if (a.has_t) {
    out.t = a.t;
    out.has_t = true;
  } else if (b.has_t) {
    out.t = nn::scale(b.t, -1.0);
    out.has_t = true;
  }
  return out;
}

inline DualVar d_matmul(Var w, const DualVar& x) {
  DualVar out;
  out.v = nn::matmul(w, x.v);
  if (x.has_t) {
    out.t = nn::matmul(w, x.t);
    out.has_t = true;
  }
  return out;
}

inline DualVar d_add_col(const DualVar& x, Var bias) {
  return {nn::add_col(x.v, bias), x.t, x.has_t};
}

inline DualVar d_add_scalar(const DualVar& x, double c) {
  return {nn::add_scalar(x.v, c), x.t, x.has_t};
}

inline DualVar d_mul(const DualVar& a, const DualVar& b) {
  DualVar out;
  out.v = nn::mul(a.v, b.v);
  if (a.has_t && b.has_t) {
    out.t = nn::add(nn::mul_tiled(a.t, b.v), nn::mul_tiled(b.t, a.v));
    out.has_t = true;
  } else if (a.has_t) {
    out.t = nn::mul_tiled(a.t, b.v);
    out.has_t = true;
  } else if (b.has_t) {
    out.t = nn::mul_tiled(b.t, a.v);
    out.has_t = true;
  }
  return out;
}

inline DualVar d_silu(const DualVar& x) {
  DualVar out;
  out.v = nn::silu(x.v);
  if (x.has_t) {
    Var s = nn::sigmoid(x.v);
    // d/dx silu = s + x*s*(1-s) = s + x*s - x*s^2
    Var xs = nn::mul(x.v, s);
    Var deriv = nn::add(s, nn::sub(xs, nn::mul(xs, s)));
    out.t = nn::mul_tiled(x.t, deriv);
    out.has_t = true;
  }
  return out;
}

inline DualVar d_tanh(const DualVar& x) {
  DualVar out;
  out.v = nn::tanh_act(x.v);
  if (x.has_t) {
    Var deriv = nn::scale(nn::add_scalar(nn::mul(out.v, out.v), -1.0), -1.0);
    out.t = nn::mul_tiled(x.t, deriv);
    out.has_t = true;
  }
  return out;
}

inline DualVar d_sigmoid(const DualVar& x) {
  DualVar out;
  out.v = nn::sigmoid(x.v);
  if (x.has_t) {
    Var deriv = nn::sub(out.v, nn::mul(out.v, out.v));
    out.t = nn::mul_tiled(x.t, deriv);
    out.has_t = true;
  }
  return out;
}

inline DualVar d_sqrt(const DualVar& x) {
  nn::Tape& tape = *x.v.tape;
  DualVar out;
  out.v = nn::sqrt_pos(x.v);
  if (x.has_t) {
    const auto& vv = tape.val(x.v);
    Var half = tape.constant(nn::Mat::Constant(vv.rows(), vv.cols(), 0.5));
    // 0.5 / sqrt(x), rows of x are 1 here (norms) so div_rowvec applies
    Var deriv = nn::div_rowvec(half, out.v);
    out.t = nn::mul_tiled(x.t, deriv);
    out.has_t = true;
  }
  return out;
}

inline DualVar d_gather_cols(const DualVar& x,
                             const std::shared_ptr<const std::vector<int>>& idx) {
  DualVar out;
  out.v = nn::gather_cols(x.v, idx);
  if (x.has_t) {
    const int k = tangent_width(x);
    const int c = static_cast<int>(x.v.tape->val(x.v).cols());
    auto expanded = std::make_shared<std::vector<int>>();
    expanded->reserve(idx->size() * k);
    for (int blk = 0; blk < k; ++blk)
      for (int id : *idx) expanded->push_back(blk * c + id);
    out.t = nn::gather_cols(x.t, std::move(expanded));
    out.has_t = true;
  }
  return out;
}

inline DualVar d_segment_sum(const DualVar& x,
                             const std::shared_ptr<const std::vector<int>>& seg,
                             int n_segments) {
  DualVar out;
  out.v = nn::segment_sum_cols(x.v, seg, n_segments);
  if (x.has_t) {
    const int k = tangent_width(x);
    auto expanded = std::make_shared<std::vector<int>>();
    expanded->reserve(seg->size() * k);
    for (int blk = 0; blk < k; ++blk)
      for (int id : *seg) expanded->push_back(blk * n_segments + id);
    out.t = nn::segment_sum_cols(x.t, std::move(expanded), n_segments * k);
    out.has_t = true;
  }
  return out;
}

inline DualVar d_colwise_sqnorm(const DualVar& x) {
  DualVar out;
  out.v = nn::colwise_sqnorm(x.v);
  if (x.has_t) {
    out.t = nn::scale(nn::colwise_sum(nn::mul_tiled(x.t, x.v)), 2.0);
    out.has_t = true;
  }
  return out;
}

inline DualVar d_mul_rowvec(const DualVar& x, const DualVar& s) {
  DualVar out;
  out.v = nn::mul_rowvec(x.v, s.v);
  const int k = x.has_t ? tangent_width(x) : tangent_width(s);
  if (x.has_t && s.has_t) {
    Var term1 = nn::mul_rowvec(x.t, nn::tile_cols(s.v, k));
    Var term2 = nn::mul_rowvec(nn::tile_cols(x.v, k), s.t);
    out.t = nn::add(term1, term2);
    out.has_t = true;
  } else if (x.has_t) {
    out.t = nn::mul_rowvec(x.t, nn::tile_cols(s.v, k));
    out.has_t = true;
  } else if (s.has_t) {
    out.t = nn::mul_rowvec(nn::tile_cols(x.v, k), s.t);
    out.has_t = true;
  }
  return out;
}

inline DualVar d_div_rowvec(const DualVar& x, const DualVar& s) {
  DualVar out;
  out.v = nn::div_rowvec(x.v, s.v);
  const int k = x.has_t ? tangent_width(x) : tangent_width(s);
  if (!x.has_t && !s.has_t) return out;
  Var tiled_s = nn::tile_cols(s.v, k);
  Var acc;
  bool have = false;
  if (x.has_t) {
    acc = nn::div_rowvec(x.t, tiled_s);
    have = true;
  }
  if (s.has_t) {
    // -(x / s^2) ds = -(value / s) ds
    Var term = nn::mul_rowvec(nn::tile_cols(out.v, k),
                              nn::div_rowvec(s.t, tiled_s));
    term = nn::scale(term, -1.0);
    acc = have ? nn::add(acc, term) : term;
    have = true;
  }
  out.t = acc;
  out.has_t = true;
  return out;
}

/// First affine layer split by input segment so that constant segments
/// contribute no tangent work, then the usual hidden stack.
DualVar mlp_apply_dual(const MlpSpec& spec, ParamBinding& params,
                       const std::string& prefix,
                       const std::vector<DualVar>& segments);

}  // namespace semiflow::detail
