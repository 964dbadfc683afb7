#include "semiflow/model.hpp"

#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <numeric>

namespace semiflow {

using json = nlohmann::ordered_json;

int DataDims::base_global_total() const {
  return std::accumulate(base_global_dims.begin(), base_global_dims.end(), 0);
}

void ModelConfig::validate() const {
  if (base_layers < 1 || cond_layers < 1)
    throw ConfigError("network depths must be >= 1");
  if (base_width < 1 || message_width < 1 || signature_width < 1 ||
      hidden_width < 1)
    throw ConfigError("network widths must be >= 1");
  if (n_max < 1) throw ConfigError("n_max must be >= 1");
  if (property_pool_width < 1 || property_embed_width < 1)
    throw ConfigError("property head widths must be >= 1");
}

NetSpecs net_specs(const ModelConfig& c, const DataDims& d) {
  c.validate();
  NetSpecs s;
  const int dg = c.signature_width;
  const int h = c.hidden_width;

  s.base_embed.layer_dims = {d.base_d_h, c.base_width};
  s.base_embed.constant_input = true;  // base features may be width zero
  const int base_msg_in =
      2 * c.base_width + 2 + d.base_d_e + d.base_global_total();
  s.base_phi_e.layer_dims = {base_msg_in, h, c.base_width};
  s.base_phi_b.layer_dims = {c.base_width, 1};
  s.base_phi_x.layer_dims = {c.base_width, h, 1};
  s.base_phi_h.layer_dims = {2 * c.base_width, h, c.base_width};

  s.sig_g0.layer_dims = {c.base_layers * c.base_width + 1, h, dg};
  s.sig_gl.layer_dims = {dg, h, dg};

  const int cond_msg_in = 2 * d.d_h + 2 + dg + 1;
  s.cond_phi_e.layer_dims = {cond_msg_in, h, c.message_width};
  s.cond_phi_b.layer_dims = {c.message_width + dg, 1};
  s.cond_phi_x.layer_dims = {c.message_width + dg, h, 1};
  if (d.d_h > 0)
    s.cond_phi_h.layer_dims = {d.d_h + c.message_width + dg, h, d.d_h};

  if (c.number_inner_identity) {
    s.number_f2.layer_dims = {c.base_width, h, c.n_max};
  } else {
    s.number_f1.layer_dims = {c.base_width, c.number_inner_width};
    s.number_f2.layer_dims = {c.number_inner_width, h, c.n_max};
  }
  s.number_f2.output_activation = OutputAct::Softmax;

  // One extra category marks "no edge" for pairs absent from the edge list.
  s.edge_cls.layer_dims = {c.message_width, h, d.d_e + 1};
  s.edge_cls.output_activation = OutputAct::Softmax;

  const int pool = c.property_pool_width;
  s.prop_xi_h.layer_dims = {d.d_h, h, pool};
  s.prop_xi_h.constant_input = d.d_h == 0;
  s.prop_xi_e.layer_dims = {d.d_e, h, pool};
  s.prop_xi_e.constant_input = d.d_e == 0;
  s.prop_xi_a.layer_dims = {c.property_embed_width, pool};
  for (int dim : d.complement_global_dims) {
    MlpSpec cls;
    cls.layer_dims = {3 * pool, h, dim};
    cls.output_activation = OutputAct::Softmax;
    s.prop_cls.push_back(cls);
  }
  return s;
}

Model init_model(const ModelConfig& config, const DataDims& dims,
                 std::uint64_t seed) {
  const NetSpecs s = net_specs(config, dims);
  Model m;
  m.config = config;
  m.dims = dims;
  ParamStore& p = m.params;

  init_params(s.base_embed, "base.embed", seed, p);
  for (int l = 0; l < config.base_layers; ++l) {
    const std::string lp = "base.l" + std::to_string(l);
    init_params(s.base_phi_e, lp + ".phi_e", seed, p);
    init_params(s.base_phi_b, lp + ".phi_b", seed, p);
    init_params(s.base_phi_x, lp + ".phi_x", seed, p);
    init_params(s.base_phi_h, lp + ".phi_h", seed, p);
  }
  for (const std::string& scope : {std::string("sig"), std::string("edge.sig")}) {
    init_params(s.sig_g0, scope + ".g0", seed, p);
    for (int l = 1; l <= config.cond_layers; ++l)
      init_params(s.sig_gl, scope + ".g" + std::to_string(l), seed, p);
  }
  for (const std::string& scope :
       {std::string("cond"), std::string("edge.cond")}) {
    init_params(s.cond_phi_e, scope + ".phi_e", seed, p);
    init_params(s.cond_phi_b, scope + ".phi_b", seed, p);
    init_params(s.cond_phi_x, scope + ".phi_x", seed, p);
    if (dims.d_h > 0) init_params(s.cond_phi_h, scope + ".phi_h", seed, p);
  }
  if (!config.number_inner_identity)
    init_params(s.number_f1, "number.f1", seed, p);
  init_params(s.number_f2, "number.f2", seed, p);
  init_params(s.edge_cls, "edge.cls", seed, p);
  if (!dims.complement_global_dims.empty()) {
    init_params(s.prop_xi_h, "prop.xi_h", seed, p);
    init_params(s.prop_xi_e, "prop.xi_e", seed, p);
    init_params(s.prop_xi_a, "prop.xi_a", seed, p);
    for (std::size_t k = 0; k < dims.complement_global_dims.size(); ++k) {
      const int cols = dims.complement_global_dims[k];
      const double bound =
          std::sqrt(6.0 / (config.property_embed_width + cols));
      Eigen::MatrixXd w(config.property_embed_width, cols);
      CounterRng wr = CounterRng(seed).fork(0x57A7 + k);
      for (int c = 0; c < w.cols(); ++c)
        for (int r = 0; r < w.rows(); ++r)
          w(r, c) = bound * (2.0 * wr.uniform() - 1.0);
      p.add("prop.w" + std::to_string(k + 1), std::move(w));
      init_params(s.prop_cls[k], "prop.cls" + std::to_string(k + 1), seed, p);
    }
  }

  p.metadata["config"] = to_json(config);
  p.metadata["dims"] = to_json(dims);
  p.metadata["seed"] = std::to_string(seed);
  p.metadata["config_hash"] = config_hash(config, dims);
  return m;
}

namespace {

json config_to_json_obj(const ModelConfig& c) {
  return json{{"base_layers", c.base_layers},
              {"base_width", c.base_width},
              {"cond_layers", c.cond_layers},
              {"message_width", c.message_width},
              {"signature_width", c.signature_width},
              {"hidden_width", c.hidden_width},
              {"n_max", c.n_max},
              {"property_pool_width", c.property_pool_width},
              {"property_embed_width", c.property_embed_width},
              {"displaced_gamma", c.displaced_gamma},
              {"number_inner_identity", c.number_inner_identity},
              {"number_inner_width", c.number_inner_width}};
}

json dims_to_json_obj(const DataDims& d) {
  return json{{"d_h", d.d_h},
              {"d_e", d.d_e},
              {"base_d_h", d.base_d_h},
              {"base_d_e", d.base_d_e},
              {"base_global_dims", d.base_global_dims},
              {"complement_global_dims", d.complement_global_dims}};
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace

std::string to_json(const ModelConfig& c) { return config_to_json_obj(c).dump(); }

ModelConfig model_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("model config: ") + e.what());
  }
  ModelConfig c;
  try {
    j.at("base_layers").get_to(c.base_layers);
    j.at("base_width").get_to(c.base_width);
    j.at("cond_layers").get_to(c.cond_layers);
    j.at("message_width").get_to(c.message_width);
    j.at("signature_width").get_to(c.signature_width);
    j.at("hidden_width").get_to(c.hidden_width);
    j.at("n_max").get_to(c.n_max);
    j.at("property_pool_width").get_to(c.property_pool_width);
    j.at("property_embed_width").get_to(c.property_embed_width);
    j.at("displaced_gamma").get_to(c.displaced_gamma);
    j.at("number_inner_identity").get_to(c.number_inner_identity);
    j.at("number_inner_width").get_to(c.number_inner_width);
  } catch (const json::exception& e) {
    throw ParseError(std::string("model config: ") + e.what());
  }
  return c;
}

std::string to_json(const DataDims& d) { return dims_to_json_obj(d).dump(); }

DataDims data_dims_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("data dims: ") + e.what());
  }
  DataDims d;
  try {
    j.at("d_h").get_to(d.d_h);
    j.at("d_e").get_to(d.d_e);
    j.at("base_d_h").get_to(d.base_d_h);
    j.at("base_d_e").get_to(d.base_d_e);
    j.at("base_global_dims").get_to(d.base_global_dims);
    j.at("complement_global_dims").get_to(d.complement_global_dims);
  } catch (const json::exception& e) {
    throw ParseError(std::string("data dims: ") + e.what());
  }
  return d;
}

std::string config_hash(const ModelConfig& config, const DataDims& dims) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(
                    fnv1a(to_json(config) + to_json(dims))));
  return std::string(buf);
}

void save_model(const Model& model, const std::string& path) {
  model.params.save(path);
}

Model load_model(const std::string& path) {
  Model m;
  m.params = ParamStore::load(path);
  const auto& meta = m.params.metadata;
  if (!meta.count("config") || !meta.count("dims"))
    throw ParseError("checkpoint lacks config/dims metadata");
  m.config = model_config_from_json(meta.at("config"));
  m.dims = data_dims_from_json(meta.at("dims"));
  return m;
}

}  // namespace semiflow
