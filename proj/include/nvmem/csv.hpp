#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nvmem/experiments.hpp"

namespace nvmem {

// FNV-1a over the parameter snapshot; stamped into CSV headers so outputs
// can be traced back to the exact configuration.
std::uint64_t params_hash(const std::map<std::string, double>& params);

// Comma-separated x,y[,y_err] with '#' header comments (experiment, seed,
// parameter hash, fit results). Deterministic byte-for-byte for equal inputs.
std::string sweep_to_csv(const SweepResult& sweep);
void write_sweep_csv(const std::string& path, const SweepResult& sweep);

// JSON sidecar with the full parameter snapshot and fit results.
std::string sweep_to_meta_json(const SweepResult& sweep);
void write_meta_json(const std::string& path, const SweepResult& sweep);

struct CsvData {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> y2;     // third column when present
  bool has_y2 = false;
};

struct CsvReadError {
  int line = 0;
  std::string message;
};

// Reads x,y[,third] rows, skipping '#' comments and a non-numeric header row.
bool read_csv(const std::string& path, CsvData& out, CsvReadError& error);

} // namespace nvmem
