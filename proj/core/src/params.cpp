#include "semiflow/params.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

namespace semiflow {

using json = nlohmann::ordered_json;

void ParamStore::add(const std::string& name, Eigen::MatrixXd value) {
  if (has(name)) throw ConfigError("duplicate tensor name: " + name);
  order_.push_back(name);
  index_.emplace(name, std::move(value));
}

const Eigen::MatrixXd& ParamStore::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown tensor: " + name);
  return it->second;
}

Eigen::MatrixXd& ParamStore::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown tensor: " + name);
  return it->second;
}

std::size_t ParamStore::count_scalars() const {
  std::size_t total = 0;
  for (const std::string& name : order_) total += at(name).size();
  return total;
}

std::string ParamStore::to_json() const {
  json j;
  j["metadata"] = metadata;
  json tensors = json::object();
  for (const std::string& name : order_) {
    const Eigen::MatrixXd& m = at(name);
    json data = json::array();
    for (int r = 0; r < m.rows(); ++r)
      for (int c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
    tensors[name] = {{"shape", {m.rows(), m.cols()}}, {"data", std::move(data)}};
  }
  j["tensors"] = std::move(tensors);
  return j.dump();
}

ParamStore ParamStore::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
  ParamStore out;
  try {
    if (j.contains("metadata"))
      out.metadata = j["metadata"].get<std::map<std::string, std::string>>();
    for (const auto& [name, entry] : j.at("tensors").items()) {
      const auto shape = entry.at("shape").get<std::vector<long>>();
      if (shape.size() != 2) throw ParseError("checkpoint: shape must be 2-d");
      const json& data = entry.at("data");
      if (static_cast<long>(data.size()) != shape[0] * shape[1])
        throw ParseError("checkpoint: data length does not match shape");
      Eigen::MatrixXd m(shape[0], shape[1]);
      std::size_t k = 0;
      for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) m(r, c) = data[k++].get<double>();
      out.add(name, std::move(m));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
  return out;
}

void ParamStore::save(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << to_json() << "\n";
  if (!f) throw IoError("write failed: " + path);
}

ParamStore ParamStore::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open: " + path);
  std::string text((std::istreambuf_iterator<char>(f)),
                   std::istreambuf_iterator<char>());
  return from_json(text);
}

nn::Var ParamBinding::operator()(const std::string& name) {
  auto it = bound_.find(name);
  if (it != bound_.end()) return it->second;
  nn::Var v = tape_->leaf(store_->at(name));
  bound_.emplace(name, v);
  return v;
}

void ParamBinding::add_grads_to(GradMap& out) const {
  for (const auto& [name, var] : bound_) {
    Eigen::MatrixXd g = tape_->grad(var);
    auto it = out.find(name);
    if (it == out.end())
      out.emplace(name, std::move(g));
    else
      it->second += g;
  }
}

double global_norm(const GradMap& grads) {
  double sq = 0.0;
  for (const auto& [name, g] : grads) sq += g.squaredNorm();
  return std::sqrt(sq);
}

void axpy(GradMap& y, double a, const GradMap& x) {
  for (const auto& [name, g] : x) {
    auto it = y.find(name);
    if (it == y.end())
      y.emplace(name, a * g);
    else
      it->second += a * g;
  }
}

}  // namespace semiflow
