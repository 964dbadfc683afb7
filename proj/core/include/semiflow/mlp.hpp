#pragma once

#include <string>
#include <vector>

#include "semiflow/params.hpp"
#include "semiflow/rng.hpp"
#include "semiflow/tensor.hpp"

namespace semiflow {

enum class HiddenAct { SiLU, Tanh };
enum class OutputAct { None, Softmax, Sigmoid };

/// Widths and activations of a fully connected network. A width-zero input
/// is allowed only for a constant network (the first affine then reduces to
/// its bias).
struct MlpSpec {
  std::vector<int> layer_dims;
  HiddenAct hidden_activation = HiddenAct::SiLU;
  OutputAct output_activation = OutputAct::None;
  bool constant_input = false;

  int input_dim() const { return layer_dims.front(); }
  int output_dim() const { return layer_dims.back(); }
  void validate() const;
};

/// Glorot-uniform weights, zero biases. Tensors are named
/// "<prefix>.w<i>" / "<prefix>.b<i>"; deterministic in (seed, prefix).
void init_params(const MlpSpec& spec, const std::string& prefix,
                 std::uint64_t seed, ParamStore& out);

/// Forward pass on a batch of column vectors; shares the tape graph with any
/// surrounding computation.
nn::Var mlp_apply(const MlpSpec& spec, ParamBinding& params,
                  const std::string& prefix, nn::Var input_cols);

/// Plain evaluation of a single input vector.
Eigen::VectorXd mlp_forward(const MlpSpec& spec, const ParamStore& params,
                            const std::string& prefix,
                            const Eigen::VectorXd& input);

}  // namespace semiflow
