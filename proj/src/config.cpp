#include "parastab/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace parastab {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
    return s.substr(1, s.size() - 2);
  return s;
}

}  // namespace

ConfigFile ConfigFile::parse(const std::string& text) {
  ConfigFile cfg;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos && line.find('"') == std::string::npos)
      line = line.substr(0, hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError("line " + std::to_string(line_no) + ": empty section name");
      cfg.sections_[section];  // sections may be empty
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    if (section.empty())
      throw ConfigError("line " + std::to_string(line_no) + ": key outside any section");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty())
      throw ConfigError("line " + std::to_string(line_no) + ": empty key", section);
    cfg.sections_[section][key] = unquote(trim(line.substr(eq + 1)));
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void ConfigFile::apply_override(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override must be section.key=value: " + spec);
  const std::string lhs = trim(spec.substr(0, eq));
  const auto dot = lhs.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == lhs.size())
    throw ConfigError("override must be section.key=value: " + spec);
  sections_[lhs.substr(0, dot)][lhs.substr(dot + 1)] = unquote(trim(spec.substr(eq + 1)));
}

bool ConfigFile::has_section(const std::string& section) const {
  return sections_.count(section) != 0;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  const auto it = sections_.find(section);
  return it != sections_.end() && it->second.count(key) != 0;
}

const std::string& ConfigFile::get(const std::string& section, const std::string& key) const {
  const auto it = sections_.find(section);
  if (it == sections_.end())
    throw ConfigError("missing section [" + section + "]", section);
  const auto kt = it->second.find(key);
  if (kt == it->second.end())
    throw ConfigError("missing key '" + key + "' in section [" + section + "]", section, key);
  return kt->second;
}

std::string ConfigFile::get_or(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
  return has(section, key) ? get(section, key) : fallback;
}

double ConfigFile::num(const std::string& section, const std::string& key) const {
  const std::string& v = get(section, key);
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (trim(v.substr(used)).empty()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError("value of [" + section + "] " + key + " is not a number: " + v,
                    section, key);
}

double ConfigFile::num_or(const std::string& section, const std::string& key,
                          double fallback) const {
  return has(section, key) ? num(section, key) : fallback;
}

long ConfigFile::integer(const std::string& section, const std::string& key) const {
  const std::string& v = get(section, key);
  try {
    std::size_t used = 0;
    const long x = std::stol(v, &used);
    if (trim(v.substr(used)).empty()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError("value of [" + section + "] " + key + " is not an integer: " + v,
                    section, key);
}

long ConfigFile::integer_or(const std::string& section, const std::string& key,
                            long fallback) const {
  return has(section, key) ? integer(section, key) : fallback;
}

bool ConfigFile::flag_or(const std::string& section, const std::string& key,
                         bool fallback) const {
  if (!has(section, key)) return fallback;
  std::string v = get(section, key);
  std::transform(v.begin(), v.end(), v.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("value of [" + section + "] " + key + " is not a boolean: " + v,
                    section, key);
}

Expr ConfigFile::expr(const std::string& section, const std::string& key) const {
  try {
    return parse_expr(get(section, key));
  } catch (const ExprSyntaxError& e) {
    throw ConfigError("value of [" + section + "] " + key +
                          " is not a valid expression: " + e.what(),
                      section, key);
  }
}

Expr ConfigFile::expr_or(const std::string& section, const std::string& key,
                         const std::string& fallback) const {
  if (has(section, key)) return expr(section, key);
  return parse_expr(fallback);
}

void ConfigFile::require_section(const std::string& section) const {
  if (!has_section(section))
    throw ConfigError("missing section [" + section + "]", section);
}

std::string ConfigFile::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
    h ^= 0x1fu;
    h *= 1099511628211ull;
  };
  for (const auto& [name, kv] : sections_) {
    mix(name);
    for (const auto& [k, v] : kv) {
      mix(k);
      mix(v);
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

CoefficientField family_coefficients(long i, long j, long k, long l, long m, long n) {
  auto sub = [](const std::string& tmpl, long p, long q) {
    std::string out;
    for (std::size_t c = 0; c < tmpl.size(); ++c) {
      if (tmpl[c] == 'P')
        out += "(" + std::to_string(p) + ")";
      else if (tmpl[c] == 'Q')
        out += "(" + std::to_string(q) + ")";
      else
        out += tmpl[c];
    }
    return parse_expr(out);
  };
  CoefficientField f;
  f.a = sub("-sin(t)*cos(P*x1) + sin(5*t)*sin(Q*x2) - 3", i, j);
  f.b1 = sub("cos(t)*sin(-P*x1) - cos(3*t)*cos(Q*x2)", k, l);
  f.b2 = sub("sin(-t)*sin(P*x1) - cos(2*t)*sin(Q*x2)", m, n);
  return f;
}

CoefficientField coefficients_from_config(const ConfigFile& cfg) {
  cfg.require_section("coefficients");
  if (cfg.has("coefficients", "family")) {
    std::istringstream in(cfg.get("coefficients", "family"));
    long p[6];
    for (int idx = 0; idx < 6; ++idx)
      if (!(in >> p[idx]))
        throw ConfigError("family needs six integers", "coefficients", "family");
    return family_coefficients(p[0], p[1], p[2], p[3], p[4], p[5]);
  }
  CoefficientField f;
  f.a = cfg.expr("coefficients", "a");
  f.b1 = cfg.expr("coefficients", "b1");
  f.b2 = cfg.expr("coefficients", "b2");
  return f;
}

}  // namespace parastab
