#include "rmtk/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <variant>

#include "rmtk/errors.hpp"
#include "rmtk/matrix_io.hpp"

namespace rmtk {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool valid_key(std::string_view key) {
  if (key.empty() || key.front() == '.' || key.back() == '.') return false;
  for (char c : key)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) return false;
  return key.find("..") == std::string_view::npos;
}

bool parse_double_text(std::string_view text, double& out) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

// Removes a trailing # comment that is not inside a string.
std::string strip_comment(const std::string& line) {
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quote) {
      if (c == '\\' && quote == '"') {
        ++i;
      } else if (c == quote) {
        quote = 0;
      }
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

int bracket_balance(std::string_view s) {
  int depth = 0;
  char quote = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (quote) {
      if (c == '\\' && quote == '"')
        ++i;
      else if (c == quote)
        quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '[') {
      ++depth;
    } else if (c == ']') {
      --depth;
    }
  }
  return depth;
}

class ValueParser {
 public:
  explicit ValueParser(std::string_view s) : s_(s) {}

  ConfigValue parse_all() {
    ConfigValue v = parse();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected trailing text");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw ValidationError("cannot parse value '" + std::string(s_) + "': " + why);
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  ConfigValue parse() {
    skip_ws();
    if (pos_ >= s_.size()) fail("missing value");
    const char c = s_[pos_];
    if (c == '"') return parse_basic_string();
    if (c == '\'') return parse_literal_string();
    if (c == '[') return parse_array();
    return parse_scalar();
  }

  ConfigValue parse_basic_string() {
    ++pos_;
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      char c = s_[pos_++];
      if (c == '\\') {
        if (pos_ >= s_.size()) fail("unterminated escape");
        const char e = s_[pos_++];
        switch (e) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: fail(std::string("unknown escape \\") + e);
        }
      }
      out.push_back(c);
    }
    if (pos_ >= s_.size()) fail("unterminated string");
    ++pos_;
    return ConfigValue::string(std::move(out));
  }

  ConfigValue parse_literal_string() {
    ++pos_;
    const std::size_t end = s_.find('\'', pos_);
    if (end == std::string_view::npos) fail("unterminated string");
    std::string out(s_.substr(pos_, end - pos_));
    pos_ = end + 1;
    return ConfigValue::string(std::move(out));
  }

  ConfigValue parse_array() {
    ++pos_;
    std::vector<ConfigValue> items;
    while (true) {
      skip_ws();
      if (pos_ >= s_.size()) fail("unterminated array");
      if (s_[pos_] == ']') {
        ++pos_;
        break;
      }
      items.push_back(parse());
      skip_ws();
      if (pos_ >= s_.size()) fail("unterminated array");
      if (s_[pos_] == ',') {
        ++pos_;
      } else if (s_[pos_] != ']') {
        fail("expected ',' or ']' in array");
      }
    }
    return ConfigValue::array(std::move(items));
  }

  ConfigValue parse_scalar() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' &&
           !std::isspace(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
    const std::string_view tok = s_.substr(start, pos_ - start);
    if (tok == "true") return ConfigValue::boolean(true);
    if (tok == "false") return ConfigValue::boolean(false);
    double d = 0.0;
    if (!parse_double_text(tok, d)) fail("not a number, string, boolean or array");
    return ConfigValue::number(std::string(tok));
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  return out + "\"";
}

[[noreturn]] void bad_key(const std::string& key, const std::string& what) {
  throw ValidationError("config key '" + key + "': " + what);
}

// Shift / scale forms.
struct ConstantForm {
  cplx value;
};
struct IdentityForm {
  cplx value;
};
using MatrixForm = std::variant<ConstantForm, IdentityForm, ComplexMatrix>;

MatrixForm matrix_form(const Config& cfg, const std::string& key, cplx fallback) {
  if (!cfg.has(key)) return ConstantForm{fallback};
  const ConfigValue& v = cfg.at(key);
  switch (v.kind) {
    case ConfigValue::Kind::Number:
      return ConstantForm{value_as_double(v, key)};
    case ConfigValue::Kind::Bool:
      bad_key(key, "expected a number, string or matrix");
    case ConfigValue::Kind::Array: {
      std::vector<cplx> entries;
      const std::size_t rows = v.items.size();
      std::size_t cols = 0;
      for (std::size_t i = 0; i < rows; ++i) {
        const ConfigValue& row = v.items[i];
        if (row.kind != ConfigValue::Kind::Array) bad_key(key, "inline matrix rows must be arrays");
        if (i == 0) cols = row.items.size();
        if (row.items.size() != cols) bad_key(key, "inline matrix rows have different lengths");
        for (const auto& e : row.items) entries.push_back(value_as_complex(e, key));
      }
      return ComplexMatrix(rows, cols, std::move(entries));
    }
    case ConfigValue::Kind::String:
      break;
  }
  const std::string_view s = trim(v.text);
  if (s.starts_with("identity")) {
    std::string_view rest = trim(s.substr(8));
    if (rest.empty()) return IdentityForm{1.0};
    if (rest.front() != '*') bad_key(key, "expected identity*c");
    rest.remove_prefix(1);
    rest = trim(rest);
    if (rest.size() >= 2 && rest.front() == '(' && rest.back() == ')') rest = rest.substr(1, rest.size() - 2);
    return IdentityForm{parse_complex(rest)};
  }
  try {
    return ConstantForm{parse_complex(s)};
  } catch (const ValidationError&) {
  }
  return read_matrix_csv(std::filesystem::path(std::string(s)));
}

ComplexMatrix build_matrix(const MatrixForm& form, std::size_t n, const std::string& key) {
  if (const auto* c = std::get_if<ConstantForm>(&form)) {
    ComplexMatrix m(n, n);
    for (auto& z : m.entries()) z = c->value;
    return m;
  }
  if (const auto* id = std::get_if<IdentityForm>(&form)) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = id->value;
    return m;
  }
  const auto& m = std::get<ComplexMatrix>(form);
  if (m.rows() != n || m.cols() != n)
    bad_key(key, "matrix is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + " but n = " +
                     std::to_string(n));
  return m;
}

}  // namespace

ConfigValue ConfigValue::string(std::string s) { return {Kind::String, std::move(s), {}}; }
ConfigValue ConfigValue::number(std::string spelling) { return {Kind::Number, std::move(spelling), {}}; }
ConfigValue ConfigValue::boolean(bool b) { return {Kind::Bool, b ? "true" : "false", {}}; }
ConfigValue ConfigValue::array(std::vector<ConfigValue> items) { return {Kind::Array, {}, std::move(items)}; }

std::string ConfigValue::to_text() const {
  switch (kind) {
    case Kind::String: return quote(text);
    case Kind::Number:
    case Kind::Bool: return text;
    case Kind::Array: {
      std::string out = "[";
      for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", " : "") + items[i].to_text();
      return out + "]";
    }
  }
  return {};
}

ConfigValue parse_config_value(std::string_view text) { return ValueParser(trim(text)).parse_all(); }

Config Config::parse(std::string_view text, const std::string& source) {
  Config cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  std::string table;
  std::size_t lineno = 0;
  auto where = [&](std::size_t ln) { return source + ":" + std::to_string(ln) + ": "; };
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t start_line = lineno;
    std::string stmt = strip_comment(line);
    std::string_view t = trim(stmt);
    if (t.empty()) continue;
    if (t.front() == '[' && t.find('=') == std::string_view::npos) {
      if (t.back() != ']') throw ValidationError(where(lineno) + "malformed table header");
      const std::string_view name = trim(t.substr(1, t.size() - 2));
      if (!valid_key(name)) throw ValidationError(where(lineno) + "invalid table name '" + std::string(name) + "'");
      table = std::string(name) + ".";
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string_view::npos) throw ValidationError(where(lineno) + "expected key = value");
    const std::string key(trim(t.substr(0, eq)));
    if (!valid_key(key)) throw ValidationError(where(lineno) + "invalid key '" + key + "'");
    std::string value(trim(t.substr(eq + 1)));
    while (bracket_balance(value) > 0) {
      if (!std::getline(in, line)) throw ValidationError(where(start_line) + "unterminated array");
      ++lineno;
      value += " " + std::string(trim(strip_comment(line)));
    }
    const std::string full = table + key;
    if (cfg.has(full)) throw ValidationError(where(start_line) + "duplicate key '" + full + "'");
    try {
      cfg.values_[full] = parse_config_value(value);
    } catch (const ValidationError& e) {
      throw ValidationError(where(start_line) + e.what());
    }
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

void Config::apply_override(std::string_view assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw ValidationError("invalid override '" + std::string(assignment) + "': expected key=value");
  const std::string key(trim(assignment.substr(0, eq)));
  if (!valid_key(key)) throw ValidationError("invalid override key '" + key + "'");
  const std::string_view raw = trim(assignment.substr(eq + 1));
  ConfigValue v;
  try {
    v = parse_config_value(raw);
  } catch (const ValidationError&) {
    if (raw.empty()) throw ValidationError("invalid override '" + std::string(assignment) + "': empty value");
    v = ConfigValue::string(std::string(raw));
  }
  values_[key] = std::move(v);
}

void Config::set(const std::string& key, ConfigValue value) {
  if (!valid_key(key)) throw ValidationError("invalid key '" + key + "'");
  values_[key] = std::move(value);
}

const ConfigValue& Config::at(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ValidationError("missing config key '" + key + "'");
  return it->second;
}

double value_as_double(const ConfigValue& v, const std::string& key) {
  double d = 0.0;
  if ((v.kind != ConfigValue::Kind::Number && v.kind != ConfigValue::Kind::String) || !parse_double_text(trim(v.text), d))
    bad_key(key, "expected a number");
  return d;
}

cplx value_as_complex(const ConfigValue& v, const std::string& key) {
  if (v.kind == ConfigValue::Kind::Number) return value_as_double(v, key);
  if (v.kind != ConfigValue::Kind::String) bad_key(key, "expected a complex number");
  try {
    return parse_complex(v.text);
  } catch (const ValidationError& e) {
    bad_key(key, e.what());
  }
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  if (!has(key)) return fallback;
  const ConfigValue& v = at(key);
  if (v.kind == ConfigValue::Kind::Array) bad_key(key, "expected a string");
  return v.text;
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? value_as_double(at(key), key) : fallback;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const ConfigValue& v = at(key);
  const std::string_view t = trim(v.text);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (v.kind != ConfigValue::Kind::Array && ec == std::errc() && ptr == t.data() + t.size()) return out;
  const double d = value_as_double(v, key);
  if (!(d >= 0.0) || d != std::floor(d) || d > 9007199254740992.0) bad_key(key, "expected a non-negative integer");
  return static_cast<std::uint64_t>(d);
}

std::size_t Config::get_size(const std::string& key, std::size_t fallback) const {
  return static_cast<std::size_t>(get_u64(key, fallback));
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const ConfigValue& v = at(key);
  if (v.kind == ConfigValue::Kind::Bool || (v.kind == ConfigValue::Kind::String && (v.text == "true" || v.text == "false")))
    return v.text == "true";
  bad_key(key, "expected true or false");
}

cplx Config::get_complex(const std::string& key, cplx fallback) const {
  return has(key) ? value_as_complex(at(key), key) : fallback;
}

std::vector<double> Config::get_doubles(const std::string& key, std::vector<double> fallback) const {
  if (!has(key)) return fallback;
  const ConfigValue& v = at(key);
  if (v.kind != ConfigValue::Kind::Array) return {value_as_double(v, key)};
  std::vector<double> out;
  for (const auto& item : v.items) out.push_back(value_as_double(item, key));
  return out;
}

std::vector<std::size_t> Config::get_sizes(const std::string& key, std::vector<std::size_t> fallback) const {
  if (!has(key)) return fallback;
  std::vector<std::size_t> out;
  for (double d : get_doubles(key, {})) {
    if (!(d >= 0.0) || d != std::floor(d)) bad_key(key, "expected non-negative integers");
    out.push_back(static_cast<std::size_t>(d));
  }
  return out;
}

void Config::reject_unknown(const std::set<std::string>& allowed) const {
  for (const auto& [key, value] : values_)
    if (!allowed.count(key)) throw ValidationError("unknown config key '" + key + "'");
}

std::string Config::to_text() const {
  std::string out;
  std::map<std::string, std::vector<std::pair<std::string, const ConfigValue*>>> tables;
  for (const auto& [key, value] : values_) {
    const std::size_t dot = key.find('.');
    if (dot == std::string::npos)
      out += key + " = " + value.to_text() + "\n";
    else
      tables[key.substr(0, dot)].emplace_back(key.substr(dot + 1), &value);
  }
  for (const auto& [name, entries] : tables) {
    out += "\n[" + name + "]\n";
    for (const auto& [key, value] : entries) out += key + " = " + value->to_text() + "\n";
  }
  return out;
}

std::set<std::string> ensemble_keys(const std::string& prefix) {
  std::set<std::string> keys;
  for (const char* k : {"dist", "shift", "scale", "declared_b", "declared_K", "alpha", "beta"}) keys.insert(prefix + k);
  return keys;
}

EnsembleFactory ensemble_factory(const Config& cfg, const std::string& prefix) {
  const DistributionSpec dist = parse_distribution(cfg.get_string(prefix + "dist", "gaussian"));
  validate(dist);
  const MatrixForm shift = matrix_form(cfg, prefix + "shift", 0.0);
  const MatrixForm scale = matrix_form(cfg, prefix + "scale", 1.0);
  const double b = cfg.get_double(prefix + "declared_b", 0.5);
  const double K = cfg.get_double(prefix + "declared_K", 1.0);
  const bool has_bounds = cfg.has(prefix + "alpha") || cfg.has(prefix + "beta");
  if (has_bounds && !(cfg.has(prefix + "alpha") && cfg.has(prefix + "beta")))
    throw ValidationError("alpha and beta must be given together");
  const double alpha = cfg.get_double(prefix + "alpha", 0.0);
  const double beta = cfg.get_double(prefix + "beta", 0.0);
  const std::string shift_key = prefix + "shift";
  const std::string scale_key = prefix + "scale";

  return [=](std::size_t n) {
    EnsembleSpec ens;
    ens.n = n;
    ens.shift = build_matrix(shift, n, shift_key);
    const ComplexMatrix c = build_matrix(scale, n, scale_key);
    ens.scale.resize(n * n);
    for (std::size_t k = 0; k < n * n; ++k) {
      const cplx s = c.entries()[k];
      if (s.imag() != 0.0) bad_key(scale_key, "scale entries must be real");
      ens.scale[k] = s.real();
    }
    ens.entry_dist = {dist};
    ens.declared_b = b;
    ens.declared_K = K;
    if (has_bounds) ens.variance_profile_bounds = std::make_pair(alpha, beta);
    validate(ens);
    return ens;
  };
}

std::vector<cplx> vector_from_config(const Config& cfg, const std::string& key, std::size_t n) {
  if (n == 0) throw ValidationError("vector dimension must be positive");
  const ConfigValue v = cfg.has(key) ? cfg.at(key) : ConfigValue::string("e1");
  if (v.kind == ConfigValue::Kind::Array) {
    std::vector<cplx> out;
    for (const auto& item : v.items) out.push_back(value_as_complex(item, key));
    return out;
  }
  if (v.kind == ConfigValue::Kind::String && v.text == "e1") {
    std::vector<cplx> out(n);
    out[0] = 1.0;
    return out;
  }
  if (v.kind == ConfigValue::Kind::String && v.text == "uniform")
    return std::vector<cplx>(n, 1.0 / std::sqrt(static_cast<double>(n)));
  bad_key(key, "expected \"e1\", \"uniform\" or an array of entries");
}

CoordinateLaws laws_from_config(const Config& cfg, const std::string& fallback_dist) {
  CoordinateLaws laws;
  if (cfg.has("dists")) {
    const ConfigValue& v = cfg.at("dists");
    if (v.kind != ConfigValue::Kind::Array) bad_key("dists", "expected an array of distributions");
    for (const auto& item : v.items) {
      if (item.kind != ConfigValue::Kind::String) bad_key("dists", "expected distribution names");
      laws.push_back(parse_distribution(item.text));
    }
  } else {
    laws.push_back(parse_distribution(cfg.get_string("dist", fallback_dist)));
  }
  for (const auto& d : laws) validate(d);
  return laws;
}

}  // namespace rmtk
