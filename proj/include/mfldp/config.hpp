#pragma once

// JSON model configuration and textual grid-function specifications.

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "core.hpp"
#include "model.hpp"

namespace mfldp {

using json = nlohmann::json;

/// Fully resolved model description, every default filled in.
struct ModelConfig {
  std::string model;   // ehrenfest | glauber
  int d = 1;
  std::string preset;  // potential | sqrt | nonunique | potts
  std::string potential_kind = "zero";
  double beta = 0.0;
  double epsilon = 0.1;
  std::vector<double> base_rates;  // glauber, d*d row-major

  json to_json() const {
    json j;
    j["model"] = model;
    j["d"] = d;
    j["preset"] = preset;
    if (preset == "potential" || preset == "potts") j["potential"] = {{"kind", potential_kind}, {"beta", beta}};
    if (preset == "nonunique") j["epsilon"] = epsilon;
    if (model == "glauber") {
      json rows = json::array();
      for (int a = 0; a < d; ++a) {
        json row = json::array();
        for (int b = 0; b < d; ++b) row.push_back(base_rates[static_cast<std::size_t>(a * d + b)]);
        rows.push_back(row);
      }
      j["base_rates"] = rows;
    }
    return j;
  }
};

namespace detail {

inline std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

inline void reject_unknown_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw InvalidArgument(where + ": unknown key \"" + it.key() + "\"");
}

inline double number_at(const json& j, const char* key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw InvalidArgument(where + ": \"" + key + "\" must be a number");
  return v.get<double>();
}

}  // namespace detail

/// Parses JSON text, reporting syntax errors as "<source>:line:col: message".
inline json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    std::string msg = e.what();
    const auto pos = msg.find("syntax error");
    throw InvalidArgument(source + ":" + detail::line_col(text, byte) + ": " +
                          (pos == std::string::npos ? msg : msg.substr(pos)));
  }
}

inline ModelConfig parse_model_config(const json& j, const std::string& source = "config") {
  if (!j.is_object()) throw InvalidArgument(source + ": top level must be an object");
  detail::reject_unknown_keys(j, {"model", "d", "preset", "potential", "epsilon", "base_rates"}, source);
  ModelConfig c;
  if (!j.contains("model") || !j["model"].is_string()) throw InvalidArgument(source + ": \"model\" is required");
  c.model = j["model"].get<std::string>();
  if (c.model != "ehrenfest" && c.model != "glauber")
    throw InvalidArgument(source + ": \"model\" must be \"ehrenfest\" or \"glauber\"");
  if (!j.contains("d") || !j["d"].is_number_integer()) throw InvalidArgument(source + ": \"d\" must be an integer");
  c.d = j["d"].get<int>();
  if (c.d < 1 || (c.model == "glauber" && c.d < 2)) throw InvalidArgument(source + ": \"d\" out of range");
  c.preset = j.value("preset", c.model == "ehrenfest" ? "potential" : "potts");
  if (c.model == "ehrenfest" && c.preset != "potential" && c.preset != "sqrt" && c.preset != "nonunique")
    throw InvalidArgument(source + ": ehrenfest presets are potential, sqrt, nonunique");
  if (c.model == "glauber" && c.preset != "potts")
    throw InvalidArgument(source + ": the glauber preset is potts");
  if ((c.preset == "sqrt" || c.preset == "nonunique") && c.d != 1)
    throw InvalidArgument(source + ": preset \"" + c.preset + "\" requires d = 1");

  if (j.contains("potential")) {
    if (c.preset != "potential" && c.preset != "potts")
      throw InvalidArgument(source + ": \"potential\" is not used by preset \"" + c.preset + "\"");
    const json& p = j["potential"];
    const std::string where = source + ": potential";
    if (!p.is_object()) throw InvalidArgument(where + " must be an object");
    detail::reject_unknown_keys(p, {"kind", "beta"}, where);
    c.potential_kind = p.value("kind", "zero");
    if (c.potential_kind != "zero" && c.potential_kind != "quadratic" && c.potential_kind != "curie_weiss")
      throw InvalidArgument(where + ": kind must be zero, quadratic or curie_weiss");
    if (c.model == "glauber" && c.potential_kind == "quadratic")
      throw InvalidArgument(where + ": quadratic is a cube potential");
    if (p.contains("beta")) c.beta = detail::number_at(p, "beta", where);
    if (!std::isfinite(c.beta)) throw InvalidArgument(where + ": beta must be finite");
  }
  if (j.contains("epsilon")) {
    if (c.preset != "nonunique") throw InvalidArgument(source + ": \"epsilon\" is only used by preset nonunique");
    c.epsilon = detail::number_at(j, "epsilon", source);
    if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) throw InvalidArgument(source + ": \"epsilon\" must lie in (0,1)");
  }
  if (c.model == "glauber") {
    if (j.contains("base_rates")) {
      const json& r = j["base_rates"];
      if (!r.is_array() || r.size() != static_cast<std::size_t>(c.d))
        throw InvalidArgument(source + ": \"base_rates\" must be a d x d array");
      for (const auto& row : r) {
        if (!row.is_array() || row.size() != static_cast<std::size_t>(c.d))
          throw InvalidArgument(source + ": \"base_rates\" must be a d x d array");
        for (const auto& v : row) {
          if (!v.is_number() || v.get<double>() < 0.0 || !std::isfinite(v.get<double>()))
            throw InvalidArgument(source + ": base rates must be finite and >= 0");
          c.base_rates.push_back(v.get<double>());
        }
      }
      for (int a = 0; a < c.d; ++a) c.base_rates[static_cast<std::size_t>(a * c.d + a)] = 0.0;
    } else {
      c.base_rates = uniform_base_rates(c.d);
    }
  } else if (j.contains("base_rates")) {
    throw InvalidArgument(source + ": \"base_rates\" is only used by glauber models");
  }
  return c;
}

inline ModelConfig load_model_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model_config(parse_json_text(ss.str(), path), path);
}

inline Potential make_potential(const ModelConfig& c) {
  if (c.potential_kind == "quadratic") return quadratic_potential(c.beta);
  if (c.potential_kind == "curie_weiss")
    return c.model == "ehrenfest" ? curie_weiss_cube(c.beta) : curie_weiss_simplex(c.beta);
  return zero_potential();
}

inline Model build_model(const ModelConfig& c) {
  if (c.model == "glauber") return glauber_from_potential(c.base_rates, c.d, make_potential(c));
  if (c.preset == "sqrt") return ehrenfest_sqrt_example();
  if (c.preset == "nonunique") return ehrenfest_nonunique_example(c.epsilon);
  return ehrenfest_from_potential(make_potential(c), c.d);
}

// ---------------------------------------------------------------------------
// Grid-function specifications, "kind:arg,arg,...":
//   constant:c                c
//   linear:c,p_1..p_d         c + <p, x>
//   quadratic:k,c_1..c_d      k/2 |x - c|^2
//   cosine:a,w                a cos(w (x_1 + ... + x_d))

inline std::function<double(ConstSpan)> parse_function_spec(const std::string& spec, int d) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  std::vector<double> args;
  if (colon != std::string::npos) {
    std::stringstream ss(spec.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(item, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != item.size() || !std::isfinite(v))
        throw InvalidArgument("function spec \"" + spec + "\": bad number \"" + item + "\"");
      args.push_back(v);
    }
  }
  auto need = [&](std::size_t count) {
    if (args.size() != count)
      throw InvalidArgument("function spec \"" + spec + "\": expected " + std::to_string(count) + " arguments");
  };
  const auto dd = static_cast<std::size_t>(d);
  if (kind == "constant") {
    need(1);
    return [c = args[0]](ConstSpan) { return c; };
  }
  if (kind == "linear") {
    need(1 + dd);
    return [args](ConstSpan x) {
      double s = args[0];
      for (std::size_t i = 0; i < x.size(); ++i) s += args[i + 1] * x[i];
      return s;
    };
  }
  if (kind == "quadratic") {
    need(1 + dd);
    return [args](ConstSpan x) {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - args[i + 1]) * (x[i] - args[i + 1]);
      return 0.5 * args[0] * s;
    };
  }
  if (kind == "cosine") {
    need(2);
    return [a = args[0], w = args[1]](ConstSpan x) {
      double s = 0.0;
      for (double v : x) s += v;
      return a * std::cos(w * s);
    };
  }
  throw InvalidArgument("function spec \"" + spec + "\": unknown kind \"" + kind + "\"");
}

}  // namespace mfldp
