#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semiflow/mlp.hpp"
#include "semiflow/params.hpp"

namespace semiflow {

/// Feature widths of the data a model is built for.
struct DataDims {
  int d_h = 0;      // complement vertex feature width (may be zero)
  int d_e = 0;      // complement edge feature categories
  int base_d_h = 0;
  int base_d_e = 0;
  std::vector<int> base_global_dims;
  std::vector<int> complement_global_dims;

  int base_global_total() const;
};

/// Architecture hyperparameters. Base-graph layers have their own weights;
/// the complement-graph layers share one set of message/update networks and
/// differ only through the per-layer signatures.
struct ModelConfig {
  int base_layers = 2;       // depth of the base-graph network
  int base_width = 64;       // base feature width after embedding
  int cond_layers = 2;       // depth of the complement-graph network
  int message_width = 64;
  int signature_width = 32;
  int hidden_width = 64;     // hidden width of every sub-network
  int n_max = 32;            // support of the number head
  int property_pool_width = 32;
  int property_embed_width = 16;  // shared row count of the property matrices
  bool displaced_gamma = true;
  bool number_inner_identity = true;
  int number_inner_width = 32;  // used when the inner network is enabled

  // Test hook: corrupts the complement mapping with a rotation-breaking term.
  bool debug_break_equivariance = false;

  void validate() const;
};

struct Model {
  ModelConfig config;
  DataDims dims;
  ParamStore params;
};

/// Network shapes derived from config and data widths; the single source of
/// truth shared by initialization and every forward pass.
struct NetSpecs {
  MlpSpec base_embed, base_phi_e, base_phi_b, base_phi_x, base_phi_h;
  MlpSpec sig_g0, sig_gl;
  MlpSpec cond_phi_e, cond_phi_b, cond_phi_x, cond_phi_h;
  MlpSpec number_f1, number_f2;
  MlpSpec edge_cls;
  MlpSpec prop_xi_h, prop_xi_e, prop_xi_a;
  std::vector<MlpSpec> prop_cls;
};

NetSpecs net_specs(const ModelConfig& config, const DataDims& dims);

/// Fresh model with Glorot-initialized weights; deterministic in seed.
Model init_model(const ModelConfig& config, const DataDims& dims,
                 std::uint64_t seed);

std::string to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const std::string& text);
std::string to_json(const DataDims& dims);
DataDims data_dims_from_json(const std::string& text);

/// Stable hash of (config, dims) recorded in checkpoint metadata.
std::string config_hash(const ModelConfig& config, const DataDims& dims);

void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace semiflow
