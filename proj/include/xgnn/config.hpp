#pragma once

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "xgnn/errors.hpp"

namespace xgnn {

enum class ValueType { Int, Real, Bool, String, List };

struct Value {
  ValueType type = ValueType::Real;
  long long i = 0;
  double r = 0.0;
  bool b = false;
  std::string s;
  std::vector<double> list;

  bool operator==(const Value& o) const {
    if (type != o.type) return false;
    switch (type) {
      case ValueType::Int: return i == o.i;
      case ValueType::Real: return r == o.r || (std::isnan(r) && std::isnan(o.r));
      case ValueType::Bool: return b == o.b;
      case ValueType::String: return s == o.s;
      case ValueType::List: return list == o.list;
    }
    return false;
  }
};

inline const std::map<std::string, ValueType>& config_schema() {
  using T = ValueType;
  static const std::map<std::string, ValueType> s{
      {"preset", T::String},
      {"seed", T::Int},
      {"quad.interior_n", T::Int},
      {"quad.boundary_n", T::Int},
      {"quad.boundary_scheme", T::String},
      {"quad.grading", T::Int},
      {"form.beta", T::List},
      {"form.delta", T::Real},
      {"form.sb", T::Int},
      {"train.width0", T::Int},
      {"train.width_growth", T::Real},
      {"train.depth", T::Int},
      {"train.scale0", T::Real},
      {"train.scale_step", T::Real},
      {"train.lr0", T::Real},
      {"train.lr_decay", T::Real},
      {"train.steps", T::Int},
      {"train.optimizer", T::String},
      {"train.momentum", T::Real},
      {"train.rtol", T::Real},
      {"train.tol", T::Real},
      {"train.max_basis", T::Int},
      {"train.split_knowledge", T::Bool},
      {"knowledge.family", T::String},
      {"knowledge.mode", T::String},
      {"knowledge.count", T::Int},
      {"knowledge.mu_re", T::List},
      {"knowledge.mu_im", T::List},
      {"knowledge.m_star", T::Int},
      {"knowledge.init_lo", T::Real},
      {"knowledge.init_hi", T::Real},
      {"knowledge.init_im_lo", T::Real},
      {"knowledge.init_im_hi", T::Real},
      {"knowledge.mu_lr_scale", T::Real},
      {"knowledge.mu_min_re", T::Real},
      {"knowledge.cutoff_r0", T::List},
      {"knowledge.cutoff_r1", T::List},
      {"knowledge.corners", T::List},
      {"problem.m", T::Int},
      {"problem.s", T::Real},
      {"problem.lambda", T::Real},
      {"output.grid", T::Int},
      {"output.fields", T::Bool},
      {"output.timing", T::Bool},
  };
  return s;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline double parse_real(const std::string& key, const std::string& t) {
  const std::string s = trim(t);
  if (s == "inf" || s == "+inf" || s == "infinity") return HUGE_VAL;
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
    throw ConfigError("config key '" + key + "': expected a real number, got '" + t + "'");
  return v;
}

inline std::string format_real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline Value parse_value(const std::string& key, const std::string& text) {
  auto it = config_schema().find(key);
  if (it == config_schema().end()) throw ConfigError("unknown config key '" + key + "'");
  Value v;
  v.type = it->second;
  const std::string t = detail::trim(text);
  switch (v.type) {
    case ValueType::Int: {
      char* end = nullptr;
      errno = 0;
      v.i = std::strtoll(t.c_str(), &end, 10);
      if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE)
        throw ConfigError("config key '" + key + "': expected an integer, got '" + text + "'");
      break;
    }
    case ValueType::Real: v.r = detail::parse_real(key, t); break;
    case ValueType::Bool:
      if (t == "true" || t == "1") v.b = true;
      else if (t == "false" || t == "0") v.b = false;
      else throw ConfigError("config key '" + key + "': expected true or false, got '" + text + "'");
      break;
    case ValueType::String: v.s = t; break;
    case ValueType::List: {
      std::string body = t;
      if (!body.empty() && body.front() == '[') {
        if (body.back() != ']') throw ConfigError("config key '" + key + "': unbalanced brackets");
        body = body.substr(1, body.size() - 2);
      }
      std::stringstream ss(body);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (detail::trim(item).empty()) continue;
        v.list.push_back(detail::parse_real(key, item));
      }
      break;
    }
  }
  return v;
}

inline std::string format_value(const Value& v) {
  switch (v.type) {
    case ValueType::Int: return std::to_string(v.i);
    case ValueType::Real: return detail::format_real(v.r);
    case ValueType::Bool: return v.b ? "true" : "false";
    case ValueType::String: return v.s;
    case ValueType::List: {
      std::string out = "[";
      for (std::size_t k = 0; k < v.list.size(); ++k) out += (k ? ", " : "") + detail::format_real(v.list[k]);
      return out + "]";
    }
  }
  return "";
}

// Flat typed key/value store; `explicit_keys` records what the user set.
struct Config {
  std::map<std::string, Value> values;
  std::set<std::string> explicit_keys;

  bool has(const std::string& k) const { return values.count(k) != 0; }
  const Value& at(const std::string& k) const {
    auto it = values.find(k);
    if (it == values.end()) throw ConfigError("missing config key '" + k + "'");
    return it->second;
  }
  long long get_int(const std::string& k) const { return at(k).i; }
  double get_real(const std::string& k) const { return at(k).r; }
  bool get_bool(const std::string& k) const { return at(k).b; }
  const std::string& get_string(const std::string& k) const { return at(k).s; }
  const std::vector<double>& get_list(const std::string& k) const { return at(k).list; }

  void set(const std::string& k, const std::string& text, bool user = true) {
    values[k] = parse_value(k, text);
    if (user) explicit_keys.insert(k);
  }
  void set_value(const std::string& k, Value v) {
    auto it = config_schema().find(k);
    if (it == config_schema().end()) throw ConfigError("unknown config key '" + k + "'");
    if (it->second != v.type) throw ConfigError("config key '" + k + "': type mismatch");
    values[k] = std::move(v);
  }
  void set_int(const std::string& k, long long x) { Value v; v.type = ValueType::Int; v.i = x; set_value(k, v); }
  void set_real(const std::string& k, double x) { Value v; v.type = ValueType::Real; v.r = x; set_value(k, v); }
  void set_bool(const std::string& k, bool x) { Value v; v.type = ValueType::Bool; v.b = x; set_value(k, v); }
  void set_string(const std::string& k, std::string x) { Value v; v.type = ValueType::String; v.s = std::move(x); set_value(k, v); }
  void set_list(const std::string& k, std::vector<double> x) { Value v; v.type = ValueType::List; v.list = std::move(x); set_value(k, v); }

  bool operator==(const Config& o) const { return values == o.values; }
};

// key = value lines; '#' starts a comment; [section] prefixes following keys.
inline std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::stringstream ss(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']' && line.find('=') == std::string::npos) {
      section = detail::trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = detail::trim(line.substr(0, eq));
    if (!section.empty()) key = section + "." + key;
    const std::string val = detail::trim(line.substr(eq + 1));
    if (!config_schema().count(key)) throw ConfigError("unknown config key '" + key + "'");
    parse_value(key, val);
    out.emplace_back(key, val);
  }
  return out;
}

inline std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

// Sorted keys, reals with 17 significant digits.
inline std::string emit_config(const Config& c) {
  std::string out;
  for (const auto& [k, v] : c.values) out += k + " = " + format_value(v) + "\n";
  return out;
}

}  // namespace xgnn
