// JSON geometry configs.  One file describes one chart, either by registry
// name or by a christoffel/metric table of expressions, plus optional
// tractor blocks that commands realize as prolonged fields or as constant
// model tensors.  Validation messages are addressed by config path.
//
// Index keys are 1-based to match the coordinate names x1..xn: a christoffel
// entry "c,a,b" sets Gamma^c_{ab} (and its mirror in a,b), a metric entry
// "i,j" sets g_{ij}.  Listing both orders of a symmetric pair is allowed
// only when the expression text is identical.
#pragma once

#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ptrac/bgg.hpp"
#include "ptrac/geometry.hpp"
#include "ptrac/model.hpp"

namespace ptrac {

struct TractorSpec {
  TensorFamily family = TensorFamily::Covector;
  int k = 0;                       // symmetric degree when family is SymK
  std::string source;              // prolong-k1 | prolong-k2 | constants
  std::string sigma;               // density expression for prolong sources
  std::vector<double> components;  // payload for a constants block
};

struct LoadedConfig {
  ChartGeometry geom;
  std::vector<TractorSpec> tractors;
};

namespace detail {

inline ValidationError config_error(const std::string& path,
                                    const std::string& msg) {
  return ValidationError(path + ": " + msg);
}

inline std::vector<int> index_key(const std::string& key, std::size_t count,
                                  int n, const std::string& path) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= key.size()) {
    const std::size_t next = key.find(',', pos);
    const std::string part =
        key.substr(pos, next == std::string::npos ? next : next - pos);
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != part.size() || part.empty())
      throw config_error(path, "bad index '" + part + "' in key \"" + key +
                                   "\"");
    if (v < 1 || v > n)
      throw config_error(path, "index " + std::to_string(v) + " in key \"" +
                                   key + "\" is outside 1.." +
                                   std::to_string(n));
    out.push_back(v - 1);
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  if (out.size() != count)
    throw config_error(path, "key \"" + key + "\" needs " +
                                 std::to_string(count) +
                                 " comma-separated indices");
  return out;
}

inline ScalarField parse_entry(const std::string& text, int n,
                               const std::string& path) {
  try {
    return parse_field(text, n);
  } catch (const Error& e) {
    throw config_error(path, e.what());
  }
}

inline TensorFamily family_from_name(const std::string& name,
                                     const std::string& path) {
  if (name == "covector") return TensorFamily::Covector;
  if (name == "sym2") return TensorFamily::Sym2;
  if (name == "skew2") return TensorFamily::Skew2;
  if (name == "symk") return TensorFamily::SymK;
  throw config_error(path, "unknown family '" + name +
                               "' (covector, sym2, skew2, symk)");
}

inline Domain domain_from_json(const nlohmann::json& j, int n,
                               const std::string& path) {
  if (j.contains("half")) {
    if (!j["half"].is_number())
      throw config_error(path + ".half", "expected a number");
    Domain d = Domain::box(n, j["half"].get<double>());
    if (j.contains("ball")) d.ball = j["ball"].get<double>();
    return d;
  }
  if (!j.contains("lo") || !j.contains("hi"))
    throw config_error(path, "needs either 'half' or 'lo' and 'hi'");
  Domain d;
  d.lo = j["lo"].get<Vec>();
  d.hi = j["hi"].get<Vec>();
  if (int(d.lo.size()) != n || int(d.hi.size()) != n)
    throw config_error(path, "lo/hi need " + std::to_string(n) + " entries");
  for (int i = 0; i < n; ++i)
    if (!(d.lo[i] < d.hi[i]))
      throw config_error(path, "lo must be strictly below hi");
  if (j.contains("ball")) d.ball = j["ball"].get<double>();
  return d;
}

// Shared by christoffel and metric tables: fill packed symmetric storage,
// rejecting two spellings of one slot unless their expressions coincide.
inline void fill_symmetric_table(const nlohmann::json& entries, int n,
                                 int lead_count, ScalarFieldList& table,
                                 const std::string& path) {
  if (!entries.is_object() || entries.empty())
    throw config_error(path, "expected a non-empty object of entries");
  const int sc = detail::sym_count(n);
  std::vector<std::string> owner(table.size());
  std::vector<std::string> texts(table.size());
  for (const auto& [key, value] : entries.items()) {
    if (!value.is_string())
      throw config_error(path + "[\"" + key + "\"]",
                         "expected an expression string");
    const std::vector<int> idx =
        index_key(key, lead_count ? 3 : 2, n, path + "[\"" + key + "\"]");
    const int a = idx[lead_count ? 1 : 0];
    const int b = idx[lead_count ? 2 : 1];
    const std::size_t slot =
        (lead_count ? std::size_t(idx[0]) * sc : 0) + sym_pack(n, a, b);
    const std::string text = value.get<std::string>();
    if (!owner[slot].empty()) {
      if (texts[slot] != text)
        throw config_error(path, "entry \"" + key +
                                     "\" conflicts with entry \"" +
                                     owner[slot] + "\"");
      continue;
    }
    owner[slot] = key;
    texts[slot] = text;
    table[slot] = parse_entry(text, n, path + "[\"" + key + "\"]");
  }
}

}  // namespace detail

// Realize a prolong-source tractor block as a field over the chart.  The
// density weight is fixed by the operator: 1 for the covector prolongation,
// 2 for the quadric one.
inline TractorField make_tractor_field(const ChartGeometry& geom,
                                       const TractorSpec& spec) {
  if (spec.source == "prolong-k1")
    return prolong_k1(geom,
                      DensitySolution{1.0, parse_field(spec.sigma, geom.dim())});
  if (spec.source == "prolong-k2")
    return prolong_k2(geom,
                      DensitySolution{2.0, parse_field(spec.sigma, geom.dim())});
  throw ValidationError("tractor block with source '" + spec.source +
                        "' does not define a field over the chart");
}

// Realize a constants tractor block as a model tensor in dimension N = n+1.
inline ModelTensor make_model_tensor(const TractorSpec& spec, int N) {
  if (spec.source != "constants")
    throw ValidationError("model tensors come from constants blocks, not '" +
                          spec.source + "'");
  switch (spec.family) {
    case TensorFamily::Covector:
      if (int(spec.components.size()) != N)
        throw ValidationError("covector needs " + std::to_string(N) +
                              " components, got " +
                              std::to_string(spec.components.size()));
      return ModelTensor::covector(spec.components);
    case TensorFamily::Sym2:
      return ModelTensor::sym2(N, spec.components);
    case TensorFamily::Skew2:
      return ModelTensor::skew2(N, spec.components);
    case TensorFamily::SymK:
      return ModelTensor::symk(N, spec.k, spec.components);
    default:
      throw ValidationError("pair tensors are assembled from two covector "
                            "blocks at the command level");
  }
}

inline LoadedConfig load_geometry(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  if (!j.is_object())
    throw detail::config_error("config", "top level must be an object");
  if (!j.contains("connection"))
    throw detail::config_error("connection", "missing");
  const nlohmann::json& conn = j["connection"];
  if (!conn.is_object() || !conn.contains("type"))
    throw detail::config_error("connection", "needs a 'type' field");
  const std::string type = conn["type"].get<std::string>();

  int n = 0;
  if (j.contains("n")) {
    if (!j["n"].is_number_integer() || j["n"].get<int>() < 2)
      throw detail::config_error("n", "expected an integer >= 2");
    n = j["n"].get<int>();
  }

  LoadedConfig out;
  if (type == "registry") {
    if (!conn.contains("name") || !conn["name"].is_string())
      throw detail::config_error("connection.name", "expected a string");
    if (j.contains("domain"))
      throw detail::config_error("domain",
                                 "registry charts define their own domain");
    try {
      out.geom = make_geometry(conn["name"].get<std::string>(), n);
    } catch (const Error& e) {
      throw detail::config_error("connection.name", e.what());
    }
  } else if (type == "christoffel" || type == "metric") {
    if (n == 0)
      throw detail::config_error("n", "required for a " + type + " table");
    if (!conn.contains("entries"))
      throw detail::config_error("connection.entries", "missing");
    Domain dom = j.contains("domain")
                     ? detail::domain_from_json(j["domain"], n, "domain")
                     : Domain::box(n, 1.5);
    if (type == "christoffel") {
      ScalarFieldList gamma(std::size_t(n) * detail::sym_count(n));
      detail::fill_symmetric_table(conn["entries"], n, 1, gamma,
                                   "connection.entries");
      out.geom = ChartGeometry::from_christoffels(std::move(dom),
                                                  std::move(gamma));
    } else {
      ScalarFieldList metric(detail::sym_count(n));
      detail::fill_symmetric_table(conn["entries"], n, 0, metric,
                                   "connection.entries");
      out.geom = ChartGeometry::from_metric(std::move(dom), std::move(metric));
    }
  } else {
    throw detail::config_error(
        "connection.type",
        "unknown type '" + type + "' (registry, christoffel, metric)");
  }
  if (n != 0 && out.geom.dim() != n)
    throw detail::config_error(
        "n", "does not match the chart dimension " +
                 std::to_string(out.geom.dim()));

  if (j.contains("tractors")) {
    if (!j["tractors"].is_array())
      throw detail::config_error("tractors", "expected an array");
    int i = 0;
    for (const nlohmann::json& t : j["tractors"]) {
      const std::string path = "tractors[" + std::to_string(i++) + "]";
      if (!t.is_object() || !t.contains("family") || !t.contains("source"))
        throw detail::config_error(path, "needs 'family' and 'source'");
      TractorSpec spec;
      spec.family = detail::family_from_name(t["family"].get<std::string>(),
                                             path + ".family");
      if (t.contains("k")) spec.k = t["k"].get<int>();
      spec.source = t["source"].get<std::string>();
      if (spec.source == "prolong-k1" || spec.source == "prolong-k2") {
        const TensorFamily want = spec.source == "prolong-k1"
                                      ? TensorFamily::Covector
                                      : TensorFamily::Sym2;
        if (spec.family != want)
          throw detail::config_error(
              path, spec.source + " produces a " +
                        (want == TensorFamily::Covector ? "covector" : "sym2") +
                        " tractor; family does not match");
        if (!t.contains("sigma") || !t["sigma"].is_string())
          throw detail::config_error(path + ".sigma",
                                     "expected an expression string");
        spec.sigma = t["sigma"].get<std::string>();
        detail::parse_entry(spec.sigma, out.geom.dim(), path + ".sigma");
      } else if (spec.source == "constants") {
        if (!t.contains("components") || !t["components"].is_array())
          throw detail::config_error(path + ".components",
                                     "expected an array of numbers");
        spec.components = t["components"].get<std::vector<double>>();
        try {
          make_model_tensor(spec, out.geom.dim() + 1);
        } catch (const Error& e) {
          throw detail::config_error(path, e.what());
        }
      } else {
        throw detail::config_error(
            path + ".source", "unknown source '" + spec.source +
                                  "' (prolong-k1, prolong-k2, constants)");
      }
      out.tractors.push_back(std::move(spec));
    }
  }
  return out;
}

inline LoadedConfig load_geometry_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open config file: " + path);
  std::string text((std::istreambuf_iterator<char>(f)),
                   std::istreambuf_iterator<char>());
  return load_geometry(text);
}

}  // namespace ptrac
