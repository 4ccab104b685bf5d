#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nvmem/params.hpp"

namespace nvmem {

// INI-style key/value configuration with unit-suffixed numbers:
//
//   [register]
//   b_field = 65G
//   t1e = 3.3ms
//   a_perp = 127MHz
//
// Repeated keys are kept in order (used for table rows).

struct ConfigEntry {
  std::string section;
  std::string key;
  std::string value;
  int line = 0;
};

struct ConfigError {
  int line = 0;
  std::string message;
};

class Config {
 public:
  static Config parse(const std::string& text, std::vector<ConfigError>& errors);

  bool has(const std::string& section, const std::string& key) const;
  std::optional<std::string> raw(const std::string& section, const std::string& key) const;
  std::vector<ConfigEntry> all(const std::string& section, const std::string& key) const;

  // Unit-aware getters; push an error and return fallback on bad units.
  double time_s(const std::string& section, const std::string& key, double fallback,
                std::vector<ConfigError>& errors) const;
  double freq_hz(const std::string& section, const std::string& key, double fallback,
                 std::vector<ConfigError>& errors) const;
  double field_t(const std::string& section, const std::string& key, double fallback,
                 std::vector<ConfigError>& errors) const;
  double number(const std::string& section, const std::string& key, double fallback,
                std::vector<ConfigError>& errors) const;
  long integer(const std::string& section, const std::string& key, long fallback,
               std::vector<ConfigError>& errors) const;

  const std::vector<ConfigEntry>& entries() const { return entries_; }

 private:
  std::vector<ConfigEntry> entries_;
};

// A number parsed with its unit suffix, scaled to SI base units.
// Returns nullopt if the text is not a number or carries an unknown unit.
enum class Dimension { any, time, frequency, field };
std::optional<double> parse_quantity(const std::string& text, Dimension dim);

struct RunSettings {
  RegisterParams register_params;
  RateParams rates;
  std::uint64_t seed = 1;
  int ensemble = 1000;
};

// Build register/rate parameters from [register] and [rates] sections on top
// of the calibrated defaults. Rates accept either direct 1/s values (alpha)
// or characteristic times (alpha_time = 0.17us).
RunSettings load_run_settings(const Config& c, std::vector<ConfigError>& errors);

} // namespace nvmem
