#include "nvmem/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace nvmem {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

} // namespace

std::optional<double> parse_quantity(const std::string& text, Dimension dim) {
  const std::string t = trim(text);
  if (t.empty()) return std::nullopt;
  char* end = nullptr;
  const double value = std::strtod(t.c_str(), &end);
  if (end == t.c_str()) return std::nullopt;
  const std::string unit = trim(std::string(end));

  if (unit.empty()) return value;
  struct Scale {
    const char* unit;
    Dimension dim;
    double factor;
  };
  static const Scale scales[] = {
      {"ns", Dimension::time, 1e-9},      {"us", Dimension::time, 1e-6},
      {"ms", Dimension::time, 1e-3},      {"s", Dimension::time, 1.0},
      {"Hz", Dimension::frequency, 1.0},  {"kHz", Dimension::frequency, 1e3},
      {"MHz", Dimension::frequency, 1e6}, {"GHz", Dimension::frequency, 1e9},
      {"uT", Dimension::field, 1e-6},     {"mT", Dimension::field, 1e-3},
      {"T", Dimension::field, 1.0},       {"G", Dimension::field, 1e-4},
  };
  for (const auto& s : scales) {
    if (unit == s.unit && (dim == Dimension::any || dim == s.dim))
      return value * s.factor;
  }
  return std::nullopt;
}

Config Config::parse(const std::string& text, std::vector<ConfigError>& errors) {
  Config c;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string line = text.substr(pos, eol == std::string::npos ? eol : eol - pos);
    pos = eol == std::string::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back({line_no, "missing ']' in section header"});
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back({line_no, "expected 'key = value'"});
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      errors.push_back({line_no, "empty key"});
      continue;
    }
    c.entries_.push_back({section, key, value, line_no});
  }
  return c;
}

bool Config::has(const std::string& section, const std::string& key) const {
  return raw(section, key).has_value();
}

std::optional<std::string> Config::raw(const std::string& section,
                                       const std::string& key) const {
  for (const auto& e : entries_)
    if (e.section == section && e.key == key) return e.value;
  return std::nullopt;
}

std::vector<ConfigEntry> Config::all(const std::string& section,
                                     const std::string& key) const {
  std::vector<ConfigEntry> out;
  for (const auto& e : entries_)
    if (e.section == section && e.key == key) out.push_back(e);
  return out;
}

namespace {

double typed_get(const Config& c, const std::string& section, const std::string& key,
                 double fallback, Dimension dim, const char* what,
                 std::vector<ConfigError>& errors) {
  for (const auto& e : c.entries()) {
    if (e.section != section || e.key != key) continue;
    if (const auto v = parse_quantity(e.value, dim)) return *v;
    errors.push_back({e.line, "value of '" + key + "' is not a valid " + what + ": '" +
                                  e.value + "'"});
    return fallback;
  }
  return fallback;
}

} // namespace

double Config::time_s(const std::string& s, const std::string& k, double fb,
                      std::vector<ConfigError>& errors) const {
  return typed_get(*this, s, k, fb, Dimension::time, "time", errors);
}

double Config::freq_hz(const std::string& s, const std::string& k, double fb,
                       std::vector<ConfigError>& errors) const {
  return typed_get(*this, s, k, fb, Dimension::frequency, "frequency", errors);
}

double Config::field_t(const std::string& s, const std::string& k, double fb,
                       std::vector<ConfigError>& errors) const {
  return typed_get(*this, s, k, fb, Dimension::field, "field", errors);
}

double Config::number(const std::string& s, const std::string& k, double fb,
                      std::vector<ConfigError>& errors) const {
  return typed_get(*this, s, k, fb, Dimension::any, "number", errors);
}

long Config::integer(const std::string& s, const std::string& k, long fb,
                     std::vector<ConfigError>& errors) const {
  const double v = typed_get(*this, s, k, static_cast<double>(fb), Dimension::any,
                             "integer", errors);
  if (v != std::floor(v)) {
    errors.push_back({0, "value of '" + k + "' must be an integer"});
    return fb;
  }
  return static_cast<long>(v);
}

RunSettings load_run_settings(const Config& c, std::vector<ConfigError>& errors) {
  RunSettings s;
  s.register_params = default_params();
  RegisterParams& p = s.register_params;
  p.zero_field_splitting = c.freq_hz("register", "zero_field_splitting",
                                     p.zero_field_splitting, errors);
  p.b_field = c.field_t("register", "b_field", p.b_field, errors);
  p.gamma_e = c.number("register", "gamma_e", p.gamma_e, errors);
  p.gamma_n = c.number("register", "gamma_n", p.gamma_n, errors);
  p.a_perp = c.freq_hz("register", "a_perp", p.a_perp, errors);
  if (c.has("register", "a_par"))
    p.a_par = c.freq_hz("register", "a_par", p.a_par, errors);
  p.t1e = c.time_s("register", "t1e", p.t1e, errors);
  p.t2star_e = c.time_s("register", "t2star_e", p.t2star_e, errors);
  p.t2star_n = c.time_s("register", "t2star_n", p.t2star_n, errors);
  p.t2c_pure = c.time_s("register", "t2c_pure", p.t2c_pure, errors);

  s.rates = nominal_rates();
  auto rate = [&](const char* direct, const char* timed, double fallback) {
    if (c.has("rates", timed)) {
      const double t = c.time_s("rates", timed, 0.0, errors);
      return t > 0 ? 1.0 / t : fallback;
    }
    return c.number("rates", direct, fallback, errors);
  };
  s.rates.alpha = rate("alpha", "alpha_time", s.rates.alpha);
  s.rates.beta = rate("beta", "beta_time", s.rates.beta);
  s.rates.gamma = rate("gamma", "gamma_time", s.rates.gamma);

  s.seed = static_cast<std::uint64_t>(c.integer("run", "seed", 1, errors));
  s.ensemble = static_cast<int>(c.integer("run", "ensemble", 1000, errors));
  return s;
}

} // namespace nvmem
