#include "lsc/params.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "lsc/common.hpp"

namespace lsc {

Tensor& ParameterStore::create(const std::string& name, Shape shape,
                               std::size_t fan_in, std::uint64_t seed) {
  auto it = entries_.find(name);
  if (it != entries_.end()) return it->second.value;
  Entry e;
  e.value = Tensor(shape);
  e.grad = Tensor(shape);
  double bound = 1.0 / std::sqrt(static_cast<double>(fan_in > 0 ? fan_in : 1));
  Rng rng = Rng::derive(seed, name);
  for (std::size_t i = 0; i < e.value.numel(); ++i)
    e.value[i] = rng.uniform(-bound, bound);
  return entries_.emplace(name, std::move(e)).first->second.value;
}

Tensor& ParameterStore::create_zeros(const std::string& name, Shape shape) {
  auto it = entries_.find(name);
  if (it != entries_.end()) return it->second.value;
  Entry e;
  e.value = Tensor(shape);
  e.grad = Tensor(shape);
  return entries_.emplace(name, std::move(e)).first->second.value;
}

Tensor& ParameterStore::value(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ConfigError("unknown parameter: " + name);
  return it->second.value;
}

const Tensor& ParameterStore::value(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ConfigError("unknown parameter: " + name);
  return it->second.value;
}

Tensor& ParameterStore::grad(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ConfigError("unknown parameter: " + name);
  return it->second.grad;
}

Var ParameterStore::use(Graph& g, const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ConfigError("unknown parameter: " + name);
  return g.leaf_with_sink(it->second.value, &it->second.grad);
}

void ParameterStore::zero_grad() {
  for (auto& [name, e] : entries_) e.grad.fill(0.0);
}

void ParameterStore::sgd_step(double lr, double momentum) {
  for (auto& [name, e] : entries_) {
    if (momentum > 0.0) {
      auto vit = velocity_.find(name);
      if (vit == velocity_.end())
        vit = velocity_.emplace(name, Tensor(e.value.shape())).first;
      Tensor& v = vit->second;
      for (std::size_t i = 0; i < v.numel(); ++i)
        v[i] = momentum * v[i] + e.grad[i];
      e.value.axpy(-lr, v);
    } else {
      e.value.axpy(-lr, e.grad);
    }
    e.grad.fill(0.0);
  }
}

double ParameterStore::grad_norm() const {
  double s = 0.0;
  for (const auto& [name, e] : entries_)
    for (std::size_t i = 0; i < e.grad.numel(); ++i) s += e.grad[i] * e.grad[i];
  return std::sqrt(s);
}

void ParameterStore::clip_grad_norm(double max_norm) {
  double n = grad_norm();
  if (n > max_norm && n > 0.0) {
    double f = max_norm / n;
    for (auto& [name, e] : entries_)
      for (std::size_t i = 0; i < e.grad.numel(); ++i) e.grad[i] *= f;
  }
}

std::size_t ParameterStore::total_count() const {
  std::size_t n = 0;
  for (const auto& [name, e] : entries_) n += e.value.numel();
  return n;
}

std::vector<std::string> ParameterStore::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [name, e] : entries_) out.push_back(name);
  return out;
}

namespace {
constexpr int kCheckpointVersion = 1;
}

void save_checkpoint(const ParameterStore& store, const std::string& config_json,
                     std::uint64_t seed, const std::string& path) {
  nlohmann::ordered_json doc;
  doc["format_version"] = kCheckpointVersion;
  doc["seed"] = seed;
  doc["config"] = config_json.empty() ? nlohmann::ordered_json::object()
                                      : nlohmann::ordered_json::parse(config_json);
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  for (const auto& [name, e] : store.entries()) {
    nlohmann::ordered_json p;
    p["shape"] = e.value.shape();
    p["data"] = e.value.vec();
    params[name] = std::move(p);
  }
  doc["params"] = std::move(params);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  out << doc.dump(1) << "\n";
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read checkpoint: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("checkpoint parse error in " + path + ": " + e.what());
  }
  Checkpoint ckpt;
  try {
    ckpt.format_version = doc.at("format_version").get<int>();
    if (ckpt.format_version != kCheckpointVersion) {
      throw DataError("unsupported checkpoint version " +
                      std::to_string(ckpt.format_version));
    }
    ckpt.seed = doc.at("seed").get<std::uint64_t>();
    ckpt.config_json = doc.at("config").dump();
    for (const auto& [name, p] : doc.at("params").items()) {
      Shape shape = p.at("shape").get<Shape>();
      std::vector<double> data = p.at("data").get<std::vector<double>>();
      ckpt.params.emplace(name, Tensor(shape, std::move(data)));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("checkpoint schema error in " + path + ": " + e.what());
  }
  return ckpt;
}

void restore_params(ParameterStore& store, const Checkpoint& ckpt) {
  for (const auto& name : store.names()) {
    auto it = ckpt.params.find(name);
    if (it == ckpt.params.end())
      throw DataError("checkpoint missing parameter: " + name);
    Tensor& v = store.value(name);
    if (!v.same_shape(it->second))
      throw DataError("checkpoint shape mismatch for " + name + ": " +
                      shape_str(it->second.shape()) + " vs " + shape_str(v.shape()));
    v = it->second;
  }
  for (const auto& [name, t] : ckpt.params) {
    if (!store.has(name)) throw DataError("checkpoint has extra parameter: " + name);
  }
}

}  // namespace lsc
