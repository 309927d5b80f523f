#include "graphturing/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace graphturing {

namespace {

using Json = nlohmann::json;

void require_keys(const Json& obj, const std::string& where, std::set<std::string> allowed) {
  if (!obj.is_object()) {
    throw ConfigError(where + " must be an object");
  }
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) {
      throw ConfigError("unknown key '" + item.key() + "' in " + where);
    }
  }
}

double get_number(const Json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) {
    throw ConfigError(where + "." + key + " must be a number");
  }
  return v.get<double>();
}

int get_int(const Json& obj, const char* key, int fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) {
    throw ConfigError(where + "." + key + " must be an integer");
  }
  return v.get<int>();
}

double required_number(const Json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) {
    throw ConfigError(where + "." + key + " is required");
  }
  return get_number(obj, key, 0.0, where);
}

GraphonModel parse_graphon(const Json& g) {
  if (!g.is_object() || !g.contains("type") || !g.at("type").is_string()) {
    throw ConfigError("graphon needs a string 'type'");
  }
  const std::string type = g.at("type").get<std::string>();
  try {
    if (type == "small_world") {
      require_keys(g, "graphon", {"type", "p", "q", "alpha"});
      return GraphonModel::small_world(required_number(g, "p", "graphon"),
                                       required_number(g, "q", "graphon"),
                                       required_number(g, "alpha", "graphon"));
    }
    if (type == "erdos_renyi") {
      require_keys(g, "graphon", {"type", "p"});
      return GraphonModel::erdos_renyi(required_number(g, "p", "graphon"));
    }
    if (type == "bipartite") {
      require_keys(g, "graphon", {"type", "p", "alpha"});
      return GraphonModel::bipartite(required_number(g, "p", "graphon"),
                                     required_number(g, "alpha", "graphon"));
    }
    if (type == "resonance") {
      require_keys(g, "graphon", {"type"});
      return GraphonModel::resonance_example();
    }
    if (type == "fourier_ring") {
      require_keys(g, "graphon", {"type", "coeffs"});
      if (!g.contains("coeffs") || !g.at("coeffs").is_array()) {
        throw ConfigError("graphon.coeffs must be an array of numbers");
      }
      std::vector<double> c;
      for (const auto& v : g.at("coeffs")) {
        if (!v.is_number()) throw ConfigError("graphon.coeffs must be an array of numbers");
        c.push_back(v.get<double>());
      }
      return GraphonModel::fourier_ring(std::move(c));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("graphon: ") + e.what());
  }
  throw ConfigError("unknown graphon type '" + type + "'");
}

void check(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

nlohmann::ordered_json graphon_to_json(const GraphonModel& model) {
  nlohmann::ordered_json j;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, SmallWorld>) {
          j["type"] = "small_world";
          j["p"] = m.p;
          j["q"] = m.q;
          j["alpha"] = m.alpha;
        } else if constexpr (std::is_same_v<T, ErdosRenyi>) {
          j["type"] = "erdos_renyi";
          j["p"] = m.p;
        } else if constexpr (std::is_same_v<T, Bipartite>) {
          j["type"] = "bipartite";
          j["p"] = m.p;
          j["alpha"] = m.alpha;
        } else {
          j["type"] = "fourier_ring";
          j["coeffs"] = m.coeffs;
        }
      },
      model.variant());
  return j;
}

ExperimentConfig parse_config(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  require_keys(doc, "config",
               {"graphon", "n", "sizes", "seed", "trials", "graph", "model", "match", "continuation",
                "out"});
  ExperimentConfig c;
  if (doc.contains("graphon")) c.graphon = parse_graphon(doc.at("graphon"));

  check(!(doc.contains("n") && doc.contains("sizes")), "give either 'n' or 'sizes', not both");
  if (doc.contains("n")) {
    c.sizes = {get_int(doc, "n", 0, "config")};
  } else if (doc.contains("sizes")) {
    check(doc.at("sizes").is_array() && !doc.at("sizes").empty(), "sizes must be a nonempty array");
    c.sizes.clear();
    for (const auto& v : doc.at("sizes")) {
      check(v.is_number_integer(), "sizes must contain integers");
      c.sizes.push_back(v.get<int>());
    }
  }
  for (int n : c.sizes) check(n >= 2, "graph sizes must be at least 2");

  if (doc.contains("seed")) {
    check(doc.at("seed").is_number_unsigned(), "seed must be a nonnegative integer");
    c.seed = doc.at("seed").get<std::uint64_t>();
  }
  c.trials = get_int(doc, "trials", c.trials, "config");
  check(c.trials >= 1, "trials must be at least 1");
  if (doc.contains("graph")) {
    check(doc.at("graph").is_string(), "graph must be 'random' or 'deterministic'");
    const auto g = doc.at("graph").get<std::string>();
    check(g == "random" || g == "deterministic", "graph must be 'random' or 'deterministic'");
    c.graph = g == "random" ? GraphKind::Random : GraphKind::Deterministic;
  }

  if (doc.contains("model")) {
    const auto& m = doc.at("model");
    require_keys(m, "model", {"r", "b", "kappa"});
    c.r = get_number(m, "r", c.r, "model");
    c.b = get_number(m, "b", c.b, "model");
    check(c.b > 0.0, "model.b must be positive");
    if (m.contains("kappa")) {
      const auto& k = m.at("kappa");
      require_keys(k, "model.kappa", {"index", "value"});
      check(k.contains("index") != k.contains("value"),
            "model.kappa needs exactly one of 'index' or 'value'");
      if (k.contains("index")) {
        c.kappa.kind = KappaRule::Kind::Index;
        c.kappa.index = get_int(k, "index", 2, "model.kappa");
        check(c.kappa.index >= 2, "model.kappa.index must be at least 2 (index 1 is the zero eigenvalue)");
      } else {
        c.kappa.kind = KappaRule::Kind::Value;
        c.kappa.value = get_number(k, "value", 0.0, "model.kappa");
        check(c.kappa.value < 0.0, "model.kappa.value must be negative");
      }
    }
  }

  if (doc.contains("match")) {
    const auto& m = doc.at("match");
    require_keys(m, "match", {"k_star", "delta_fraction", "gamma"});
    c.k_star = get_int(m, "k_star", c.k_star, "match");
    c.delta_fraction = get_number(m, "delta_fraction", c.delta_fraction, "match");
    c.gamma = get_number(m, "gamma", c.gamma, "match");
    check(c.k_star >= 1, "match.k_star must be positive");
    check(c.delta_fraction > 0.0 && c.delta_fraction < 1.0, "match.delta_fraction must lie in (0, 1)");
    check(c.gamma > 0.0 && c.gamma < 0.5, "match.gamma must lie in (0, 1/2)");
  }

  if (doc.contains("continuation")) {
    const auto& k = doc.at("continuation");
    require_keys(k, "continuation",
                 {"ds", "ds_max", "ds_min", "h0", "tol", "max_newton", "max_steps", "amplitude_cap",
                  "epsilon_min", "epsilon_max", "grow_after", "grow_factor", "fit_amplitude",
                  "exponent_points", "profile_epsilon"});
    auto& cc = c.continuation;
    const std::string w = "continuation";
    cc.ds = get_number(k, "ds", cc.ds, w);
    cc.ds_max = get_number(k, "ds_max", cc.ds_max, w);
    cc.ds_min = get_number(k, "ds_min", cc.ds_min, w);
    cc.h0 = get_number(k, "h0", cc.h0, w);
    cc.tol = get_number(k, "tol", cc.tol, w);
    cc.max_newton = get_int(k, "max_newton", cc.max_newton, w);
    cc.max_steps = get_int(k, "max_steps", cc.max_steps, w);
    cc.amplitude_cap = get_number(k, "amplitude_cap", cc.amplitude_cap, w);
    cc.epsilon_min = get_number(k, "epsilon_min", cc.epsilon_min, w);
    cc.epsilon_max = get_number(k, "epsilon_max", cc.epsilon_max, w);
    cc.grow_after = get_int(k, "grow_after", cc.grow_after, w);
    cc.grow_factor = get_number(k, "grow_factor", cc.grow_factor, w);
    c.fit_amplitude = get_number(k, "fit_amplitude", c.fit_amplitude, w);
    c.exponent_points = get_int(k, "exponent_points", c.exponent_points, w);
    c.profile_epsilon = get_number(k, "profile_epsilon", c.profile_epsilon, w);
    try {
      (void)cc.resolved(c.sizes.front());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    check(c.fit_amplitude >= 0.0, "continuation.fit_amplitude must be nonnegative");
    check(c.exponent_points >= 2, "continuation.exponent_points must be at least 2");
  }

  if (doc.contains("out")) {
    check(doc.at("out").is_string(), "out must be a string");
    c.out = doc.at("out").get<std::string>();
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot read config file " + path);
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

nlohmann::ordered_json to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["graphon"] = graphon_to_json(c.graphon);
  j["sizes"] = c.sizes;
  j["seed"] = c.seed;
  j["trials"] = c.trials;
  j["graph"] = c.graph == GraphKind::Random ? "random" : "deterministic";
  nlohmann::ordered_json model;
  model["r"] = c.r;
  model["b"] = c.b;
  if (c.kappa.kind == KappaRule::Kind::Index) {
    model["kappa"] = {{"index", c.kappa.index}};
  } else {
    model["kappa"] = {{"value", c.kappa.value}};
  }
  j["model"] = model;
  j["match"] = {{"k_star", c.k_star}, {"delta_fraction", c.delta_fraction}, {"gamma", c.gamma}};
  const auto& cc = c.continuation;
  nlohmann::ordered_json k;
  k["ds"] = cc.ds;
  k["ds_max"] = cc.ds_max;
  k["ds_min"] = cc.ds_min;
  k["h0"] = cc.h0;
  k["tol"] = cc.tol;
  k["max_newton"] = cc.max_newton;
  k["max_steps"] = cc.max_steps;
  k["amplitude_cap"] = cc.amplitude_cap;
  k["epsilon_min"] = cc.epsilon_min;
  k["epsilon_max"] = cc.epsilon_max;
  k["grow_after"] = cc.grow_after;
  k["grow_factor"] = cc.grow_factor;
  k["fit_amplitude"] = c.fit_amplitude;
  k["exponent_points"] = c.exponent_points;
  k["profile_epsilon"] = c.profile_epsilon;
  j["continuation"] = k;
  if (c.out) j["out"] = *c.out;
  return j;
}

std::string serialize_config(const ExperimentConfig& c) { return to_json(c).dump(2) + "\n"; }

}  // namespace graphturing
