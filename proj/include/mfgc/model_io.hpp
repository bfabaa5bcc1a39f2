#pragma once

#include <fstream>
#include <functional>
#include <string>

#include <json.hpp>

#include "mfgc/common.hpp"
#include "mfgc/model.hpp"

namespace mfgc {

inline constexpr const char* kModelSchema = "mfgc-model/1";

namespace detail {

using nlohmann::json;

inline void require_keys(const json& obj, std::initializer_list<const char*> required,
                         std::initializer_list<const char*> optional, const std::string& where) {
  for (const char* key : required)
    if (!obj.contains(key)) throw SchemaError(where + ": missing key '" + key + "'");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : required) known = known || it.key() == key;
    for (const char* key : optional) known = known || it.key() == key;
    if (!known) throw SchemaError(where + ": unknown key '" + it.key() + "'");
  }
}

inline std::vector<double> flatten(const json& arr, const std::vector<std::size_t>& dims, const std::string& where) {
  std::vector<double> out;
  out.reserve([&] {
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    return n;
  }());
  std::function<void(const json&, std::size_t)> rec = [&](const json& node, std::size_t depth) {
    if (depth == dims.size()) {
      if (!node.is_number()) throw SchemaError(where + ": expected a number");
      out.push_back(node.get<double>());
      return;
    }
    if (!node.is_array() || node.size() != dims[depth])
      throw SchemaError(where + ": expected array of length " + std::to_string(dims[depth]) + " at depth " +
                        std::to_string(depth));
    for (const auto& child : node) rec(child, depth + 1);
  };
  rec(arr, 0);
  return out;
}

inline json nest(const std::vector<double>& flat, const std::vector<std::size_t>& dims) {
  std::size_t pos = 0;
  std::function<json(std::size_t)> rec = [&](std::size_t depth) -> json {
    if (depth == dims.size()) return flat[pos++];
    json arr = json::array();
    for (std::size_t k = 0; k < dims[depth]; ++k) arr.push_back(rec(depth + 1));
    return arr;
  };
  return rec(0);
}

}  // namespace detail

inline MfgModel model_from_json(const nlohmann::json& j) {
  using detail::require_keys;
  require_keys(j, {"schema", "n_pops", "n_states", "n_actions", "populations"}, {"name"}, "model");
  if (j["schema"].get<std::string>() != kModelSchema)
    throw SchemaError("model: schema must be '" + std::string(kModelSchema) + "'");
  const int N = j["n_pops"].get<int>();
  const int nx = j["n_states"].get<int>();
  const int na = j["n_actions"].get<int>();
  if (N < 1 || nx < 1 || na < 1) throw SchemaError("model: n_pops, n_states, n_actions must be positive");
  const auto& pops = j["populations"];
  if (!pops.is_array() || static_cast<int>(pops.size()) != N)
    throw SchemaError("model: populations must be an array of length n_pops");
  const std::size_t uN = static_cast<std::size_t>(N), ux = static_cast<std::size_t>(nx), ua = static_cast<std::size_t>(na);
  std::vector<PopulationSpec> specs;
  for (int i = 0; i < N; ++i) {
    const auto& pj = pops[static_cast<std::size_t>(i)];
    std::string where = "populations[" + std::to_string(i) + "]";
    require_keys(pj, {"beta", "rho", "cost", "kernel"}, {}, where);
    PopulationSpec spec;
    spec.beta = pj["beta"].get<double>();
    spec.rho = pj["rho"].get<double>();
    const auto& cj = pj["cost"];
    require_keys(cj, {"kind", "c0", "w"}, {}, where + ".cost");
    if (cj["kind"].get<std::string>() != "affine")
      throw SchemaError(where + ".cost: only the affine family is serializable");
    spec.cost.kind = CostModel::Kind::AffineInMeasure;
    spec.cost.affine.c0 = detail::flatten(cj["c0"], {ux, ua}, where + ".cost.c0");
    spec.cost.affine.w = detail::flatten(cj["w"], {uN, ux, ua, ux}, where + ".cost.w");
    const auto& kj = pj["kernel"];
    require_keys(kj, {"kind", "p0", "epsilon", "lambda", "mix"}, {}, where + ".kernel");
    if (kj["kind"].get<std::string>() != "mixture")
      throw SchemaError(where + ".kernel: only the mixture family is serializable");
    spec.kernel.kind = KernelModel::Kind::MixtureInMeasure;
    spec.kernel.mixture.p0 = detail::flatten(kj["p0"], {ux, ua, ux}, where + ".kernel.p0");
    spec.kernel.mixture.epsilon = kj["epsilon"].get<double>();
    spec.kernel.mixture.lambda = detail::flatten(kj["lambda"], {uN}, where + ".kernel.lambda");
    spec.kernel.mixture.mix = detail::flatten(kj["mix"], {uN, ux, ux}, where + ".kernel.mix");
    specs.push_back(std::move(spec));
  }
  return MfgModel(nx, na, std::move(specs));
}

inline nlohmann::json model_to_json(const MfgModel& m) {
  nlohmann::json j;
  j["schema"] = kModelSchema;
  j["n_pops"] = m.n_pops();
  j["n_states"] = m.n_states();
  j["n_actions"] = m.n_actions();
  const std::size_t uN = static_cast<std::size_t>(m.n_pops());
  const std::size_t ux = static_cast<std::size_t>(m.n_states());
  const std::size_t ua = static_cast<std::size_t>(m.n_actions());
  nlohmann::json pops = nlohmann::json::array();
  for (int i = 0; i < m.n_pops(); ++i) {
    const PopulationSpec& spec = m.pop(i);
    if (spec.cost.kind != CostModel::Kind::AffineInMeasure || spec.kernel.kind != KernelModel::Kind::MixtureInMeasure)
      throw SchemaError("model_to_json: custom populations are in-memory only");
    nlohmann::json pj;
    pj["beta"] = spec.beta;
    pj["rho"] = spec.rho;
    pj["cost"] = {{"kind", "affine"},
                  {"c0", detail::nest(spec.cost.affine.c0, {ux, ua})},
                  {"w", detail::nest(spec.cost.affine.w, {uN, ux, ua, ux})}};
    pj["kernel"] = {{"kind", "mixture"},
                    {"p0", detail::nest(spec.kernel.mixture.p0, {ux, ua, ux})},
                    {"epsilon", spec.kernel.mixture.epsilon},
                    {"lambda", detail::nest(spec.kernel.mixture.lambda, {uN})},
                    {"mix", detail::nest(spec.kernel.mixture.mix, {uN, ux, ux})}};
    pops.push_back(std::move(pj));
  }
  j["populations"] = std::move(pops);
  return j;
}

inline MfgModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open model file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw SchemaError("model file is not valid JSON: " + std::string(e.what()));
  }
  return model_from_json(j);
}

inline void save_model(const MfgModel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write model file: " + path);
  out << model_to_json(m).dump(2) << "\n";
}

}  // namespace mfgc
