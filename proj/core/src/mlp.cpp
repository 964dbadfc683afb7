#include "semiflow/mlp.hpp"

#include <cmath>

namespace semiflow {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

nn::Var activate(nn::Var x, HiddenAct act) {
  return act == HiddenAct::SiLU ? nn::silu(x) : nn::tanh_act(x);
}

}  // namespace

void MlpSpec::validate() const {
  if (layer_dims.size() < 2)
    throw ConfigError("mlp spec needs at least input and output widths");
  for (std::size_t i = 0; i < layer_dims.size(); ++i) {
    if (layer_dims[i] >= 1) continue;
    if (i == 0 && layer_dims[i] == 0 && constant_input) continue;
    throw ConfigError("mlp widths must be >= 1 (width-0 input requires a constant mlp)");
  }
}

void init_params(const MlpSpec& spec, const std::string& prefix,
                 std::uint64_t seed, ParamStore& out) {
  spec.validate();
  CounterRng rng = CounterRng(seed).fork(fnv1a(prefix));
  for (std::size_t l = 0; l + 1 < spec.layer_dims.size(); ++l) {
    const int fan_in = spec.layer_dims[l];
    const int fan_out = spec.layer_dims[l + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Eigen::MatrixXd w(fan_out, fan_in);
    for (int c = 0; c < w.cols(); ++c)
      for (int r = 0; r < w.rows(); ++r)
        w(r, c) = bound * (2.0 * rng.uniform() - 1.0);
    out.add(prefix + ".w" + std::to_string(l), std::move(w));
    out.add(prefix + ".b" + std::to_string(l),
            Eigen::MatrixXd::Zero(fan_out, 1));
  }
}

nn::Var mlp_apply(const MlpSpec& spec, ParamBinding& params,
                  const std::string& prefix, nn::Var input_cols) {
  spec.validate();
  nn::Tape& tape = *input_cols.tape;
  if (tape.val(input_cols).rows() != spec.input_dim())
    throw SizeError("mlp input width does not match spec");
  nn::Var x = input_cols;
  const std::size_t n_affine = spec.layer_dims.size() - 1;
  for (std::size_t l = 0; l < n_affine; ++l) {
    const std::string idx = std::to_string(l);
    x = nn::add_col(nn::matmul(params(prefix + ".w" + idx), x),
                    params(prefix + ".b" + idx));
    if (l + 1 < n_affine) x = activate(x, spec.hidden_activation);
  }
  switch (spec.output_activation) {
    case OutputAct::None:
      return x;
    case OutputAct::Softmax:
      return nn::softmax_cols(x);
    case OutputAct::Sigmoid:
      return nn::sigmoid(x);
  }
  throw ConfigError("unknown output activation");
}

Eigen::VectorXd mlp_forward(const MlpSpec& spec, const ParamStore& params,
                            const std::string& prefix,
                            const Eigen::VectorXd& input) {
  nn::Tape tape;
  ParamBinding binding(tape, params);
  nn::Var out = mlp_apply(spec, binding, prefix, tape.constant(input));
  return tape.val(out).col(0);
}

}  // namespace semiflow
