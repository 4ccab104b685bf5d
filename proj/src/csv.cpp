#include "nvmem/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace nvmem {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace

std::uint64_t params_hash(const std::map<std::string, double>& params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& [k, v] : params) {
    feed(k);
    feed("=");
    feed(fmt(v));
    feed(";");
  }
  return h;
}

std::string sweep_to_csv(const SweepResult& sweep) {
  std::ostringstream os;
  os << "# experiment: " << sweep.meta.experiment << "\n";
  os << "# seed: " << sweep.meta.seed << "\n";
  char hash[32];
  std::snprintf(hash, sizeof hash, "0x%016llx",
                static_cast<unsigned long long>(params_hash(sweep.meta.params)));
  os << "# params_hash: " << hash << "\n";
  for (const auto& [name, value] : sweep.meta.fits)
    os << "# fit " << name << ": " << fmt(value) << "\n";
  const bool with_err = !sweep.y_err.empty();
  os << (with_err ? "x,y,y_err\n" : "x,y\n");
  for (std::size_t i = 0; i < sweep.x.size(); ++i) {
    os << fmt(sweep.x[i]) << "," << fmt(sweep.y[i]);
    if (with_err) os << "," << fmt(sweep.y_err[i]);
    os << "\n";
  }
  return os.str();
}

void write_sweep_csv(const std::string& path, const SweepResult& sweep) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << sweep_to_csv(sweep);
}

std::string sweep_to_meta_json(const SweepResult& sweep) {
  nlohmann::ordered_json j;
  j["experiment"] = sweep.meta.experiment;
  j["seed"] = sweep.meta.seed;
  char hash[32];
  std::snprintf(hash, sizeof hash, "0x%016llx",
                static_cast<unsigned long long>(params_hash(sweep.meta.params)));
  j["params_hash"] = hash;
  j["points"] = sweep.x.size();
  j["parameters"] = sweep.meta.params;
  j["fits"] = sweep.meta.fits;
  return j.dump(2) + "\n";
}

void write_meta_json(const std::string& path, const SweepResult& sweep) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << sweep_to_meta_json(sweep);
}

bool read_csv(const std::string& path, CsvData& out, CsvReadError& error) {
  std::ifstream f(path);
  if (!f) {
    error = {0, "cannot open: " + path};
    return false;
  }
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<double> values;
    bool numeric = true;
    while (std::getline(row, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      while (end && *end == ' ') ++end;
      if (end == cell.c_str() || (end && *end != '\0' && *end != '\r')) {
        numeric = false;
        break;
      }
      values.push_back(v);
    }
    if (!numeric) {
      // Allow a single non-numeric header row.
      if (out.x.empty()) continue;
      error = {line_no, "non-numeric row"};
      return false;
    }
    if (values.size() < 2) {
      error = {line_no, "need at least two columns"};
      return false;
    }
    out.x.push_back(values[0]);
    out.y.push_back(values[1]);
    if (values.size() >= 3) {
      out.y2.push_back(values[2]);
      out.has_y2 = true;
    }
  }
  if (out.x.empty()) {
    error = {line_no, "no data rows"};
    return false;
  }
  if (out.has_y2 && out.y2.size() != out.x.size()) {
    error = {0, "ragged third column"};
    return false;
  }
  return true;
}

} // namespace nvmem
