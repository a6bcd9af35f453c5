#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "rmtk/anticonc.hpp"
#include "rmtk/complex_matrix.hpp"
#include "rmtk/experiments.hpp"

namespace rmtk {

/// One value of a config file: string, number (kept as written), boolean or
/// array of values.
struct ConfigValue {
  enum class Kind { String, Number, Bool, Array };
  Kind kind = Kind::String;
  std::string text;  ///< string contents, number spelling, or "true"/"false"
  std::vector<ConfigValue> items;

  static ConfigValue string(std::string s);
  static ConfigValue number(std::string spelling);
  static ConfigValue boolean(bool b);
  static ConfigValue array(std::vector<ConfigValue> items);

  bool operator==(const ConfigValue&) const = default;

  /// Serialized back in config syntax.
  std::string to_text() const;
};

/// Parses a single value in config syntax. Throws ValidationError.
ConfigValue parse_config_value(std::string_view text);

/// A parsed config file: a flat map of dotted keys ("x.dist") to values.
///
/// The accepted syntax is a subset of TOML: `key = value` lines, `[table]`
/// headers, `#` comments, double- or single-quoted strings, numbers,
/// true/false, and (possibly multi-line) arrays.
class Config {
 public:
  static Config parse(std::string_view text, const std::string& source = "<config>");
  static Config load(const std::string& path);

  /// "key=value" with a dotted key. A value that does not parse is taken as
  /// a bare string.
  void apply_override(std::string_view assignment);
  void set(const std::string& key, ConfigValue value);
  void erase(const std::string& key) { values_.erase(key); }

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const ConfigValue& at(const std::string& key) const;
  const std::map<std::string, ConfigValue>& values() const noexcept { return values_; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  std::size_t get_size(const std::string& key, std::size_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  cplx get_complex(const std::string& key, cplx fallback) const;
  /// Accepts a scalar (one-element list) or an array.
  std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const;
  std::vector<std::size_t> get_sizes(const std::string& key, std::vector<std::size_t> fallback) const;

  /// Throws ValidationError naming the first key not in `allowed`.
  void reject_unknown(const std::set<std::string>& allowed) const;

  /// Resolved config in the same syntax: top-level keys, then one table per prefix.
  std::string to_text() const;

 private:
  std::map<std::string, ConfigValue> values_;
};

double value_as_double(const ConfigValue& v, const std::string& key);
cplx value_as_complex(const ConfigValue& v, const std::string& key);

/// Ensemble keys under `prefix` ("" or "x." / "y."): dist, shift, scale,
/// declared_b, declared_K, alpha, beta. `shift` and `scale` take a number or
/// complex string (constant matrix), "identity*c", an inline array of rows,
/// or a path to a CSV matrix.
EnsembleFactory ensemble_factory(const Config& cfg, const std::string& prefix);
std::set<std::string> ensemble_keys(const std::string& prefix);

/// "e1", "uniform", or an array of complex entries; n is used for the named forms.
std::vector<cplx> vector_from_config(const Config& cfg, const std::string& key, std::size_t n);

/// `dists` (array, one law per coordinate) if present, else `dist`.
CoordinateLaws laws_from_config(const Config& cfg, const std::string& fallback_dist);

}  // namespace rmtk
