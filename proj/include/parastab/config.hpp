#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include "parastab/expr.hpp"
#include "parastab/fem.hpp"

namespace parastab {

struct ConfigError : std::runtime_error {
  std::string section;
  std::string key;
  ConfigError(const std::string& msg, std::string section_ = "", std::string key_ = "")
      : std::runtime_error(msg), section(std::move(section_)), key(std::move(key_)) {}
};

// INI-style file: `[section]` headers, `key = value` lines, `#` comments,
// expression values optionally double-quoted.
class ConfigFile {
 public:
  static ConfigFile parse(const std::string& text);
  static ConfigFile load(const std::string& path);

  // spec has the form "section.key=value"
  void apply_override(const std::string& spec);

  bool has_section(const std::string& section) const;
  bool has(const std::string& section, const std::string& key) const;
  const std::string& get(const std::string& section, const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;

  double num(const std::string& section, const std::string& key) const;
  double num_or(const std::string& section, const std::string& key, double fallback) const;
  long integer(const std::string& section, const std::string& key) const;
  long integer_or(const std::string& section, const std::string& key, long fallback) const;
  bool flag_or(const std::string& section, const std::string& key, bool fallback) const;
  Expr expr(const std::string& section, const std::string& key) const;
  Expr expr_or(const std::string& section, const std::string& key,
               const std::string& fallback) const;

  void require_section(const std::string& section) const;

  // Stable content fingerprint (FNV-1a over normalized section/key/value
  // triples in sorted order) for run manifests.
  std::string hash() const;

  const std::map<std::string, std::map<std::string, std::string>>& sections() const {
    return sections_;
  }

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

// â = −sin(t)cos(i x₁) + sin(5t)sin(j x₂) − 3
// b̂₁ = cos(t)sin(−k x₁) − cos(3t)cos(l x₂)
// b̂₂ = sin(−t)sin(m x₁) − cos(2t)sin(n x₂)
CoefficientField family_coefficients(long i, long j, long k, long l, long m, long n);

// Reads [coefficients]: either family = "i j k l m n" (six integers) or the
// three expressions a, b1, b2.
CoefficientField coefficients_from_config(const ConfigFile& cfg);

}  // namespace parastab
