#include "nvmem/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nvmem/config.hpp"
#include "nvmem/csv.hpp"
#include "nvmem/experiments.hpp"
#include "nvmem/sequence.hpp"

namespace nvmem {

namespace {

namespace fs = std::filesystem;

constexpr const char* kExperiments[] = {"rabi",     "fid",   "init-tomography",
                                        "repeated-init", "transfer", "cpmg",
                                        "extended-dd"};

bool read_file(const std::string& path, std::string& out, std::string& error) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    error = "cannot open '" + path + "'";
    return false;
  }
  std::ostringstream os;
  os << f.rdbuf();
  out = os.str();
  return true;
}

int print_config_errors(const std::string& path, const std::vector<ConfigError>& errors) {
  for (const auto& e : errors)
    std::cerr << path << ":" << e.line << ": error: " << e.message << "\n";
  return 2;
}

std::vector<double> linspace(double a, double b, long n) {
  std::vector<double> out;
  if (n <= 0) return out;
  if (n == 1) return {a};
  out.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i)
    out.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  return out;
}

std::vector<double> grid_from_config(const Config& c, const std::string& section,
                                     double from, double to, long steps,
                                     std::vector<ConfigError>& errors) {
  const double a = c.time_s(section, "from", from, errors);
  const double b = c.time_s(section, "to", to, errors);
  const long n = c.integer(section, "steps", steps, errors);
  return linspace(a, b, n);
}

void write_outputs(const fs::path& dir, const std::string& name, const SweepResult& sweep) {
  fs::create_directories(dir);
  write_sweep_csv((dir / (name + ".csv")).string(), sweep);
  write_meta_json((dir / (name + ".meta.json")).string(), sweep);
}

void summary(const std::string& key, double value) {
  std::printf("%s: %.6g\n", key.c_str(), value);
}

int cmd_run(const std::string& experiment, const std::string& config_path,
            const std::string& out_dir, long seed_override, long ensemble_override) {
  std::vector<ConfigError> errors;
  Config config;
  if (!config_path.empty()) {
    std::string text, err;
    if (!read_file(config_path, text, err)) {
      std::cerr << config_path << ":0: error: " << err << "\n";
      return 2;
    }
    config = Config::parse(text, errors);
  }
  RunSettings settings = load_run_settings(config, errors);
  if (!errors.empty()) return print_config_errors(config_path, errors);
  if (seed_override >= 0) settings.seed = static_cast<std::uint64_t>(seed_override);
  if (ensemble_override > 0) settings.ensemble = static_cast<int>(ensemble_override);

  const RegisterParams& p = settings.register_params;
  const fs::path dir(out_dir);
  std::vector<ConfigError> grid_errors;

  if (experiment == "rabi") {
    RabiOptions opt;
    opt.effective_rabi = config.freq_hz("rabi", "effective_rabi", 4.3e6, grid_errors);
    opt.durations = grid_from_config(config, "rabi", 0.0, 2.0e-6, 201, grid_errors);
    opt.init_cycles = static_cast<int>(config.integer("rabi", "init_cycles", 0, grid_errors));
    if (!grid_errors.empty()) return print_config_errors(config_path, grid_errors);
    const SweepResult sweep = run_rabi(p, settings.rates, opt);
    write_outputs(dir, "rabi", sweep);
    summary("rabi_frequency_hz", sweep.meta.fits.count("rabi_frequency_hz")
                                     ? sweep.meta.fits.at("rabi_frequency_hz")
                                     : 0.0);
    return 0;
  }
  if (experiment == "fid") {
    FidOptions opt;
    opt.detuning = config.freq_hz("fid", "detuning", 150.0e3, grid_errors);
    opt.delays = grid_from_config(config, "fid", 0.0, 60.0e-6, 301, grid_errors);
    if (!grid_errors.empty()) return print_config_errors(config_path, grid_errors);
    const SweepResult sweep = run_fid(p, settings.rates, opt);
    write_outputs(dir, "fid", sweep);
    summary("fringe_frequency_hz", sweep.meta.fits.count("fringe_frequency_hz")
                                       ? sweep.meta.fits.at("fringe_frequency_hz")
                                       : 0.0);
    return 0;
  }
  if (experiment == "init-tomography") {
    const auto grid = grid_from_config(config, "init_tomography", 0.0, 3.0e-6, 121,
                                       grid_errors);
    if (!grid_errors.empty()) return print_config_errors(config_path, grid_errors);
    const InitTomographyResult result = run_init_tomography(p, settings.rates, grid);
    write_outputs(dir, "init-tomography-total-ms0", result.total_ms0);
    write_outputs(dir, "init-tomography-p-up", result.p_up);
    double best = 0.0, best_t = 0.0;
    for (std::size_t i = 0; i < result.p_up.x.size(); ++i) {
      if (result.p_up.y[i] > best) {
        best = result.p_up.y[i];
        best_t = result.p_up.x[i];
      }
    }
    summary("p_up_max", best);
    summary("p_up_max_time_s", best_t);
    return 0;
  }
  if (experiment == "repeated-init") {
    const long cycles = config.integer("repeated_init", "cycles", 10, grid_errors);
    double laser = config.time_s("repeated_init", "laser_duration", 0.0, grid_errors);
    if (!grid_errors.empty()) return print_config_errors(config_path, grid_errors);
    if (laser <= 0)
      laser = optimal_init_duration(p, settings.rates, static_cast<int>(cycles));
    SweepResult sweep =
        run_repeated_init(p, settings.rates, static_cast<int>(cycles), laser);
    sweep.meta.seed = settings.seed;
    write_outputs(dir, "repeated-init", sweep);
    summary("final_population", sweep.meta.fits.at("final_population"));
    return 0;
  }
  if (experiment == "transfer") {
    TransferOptions opt;
    opt.detuning = config.freq_hz("transfer", "detuning", 150.0e3, grid_errors);
    opt.target_window = config.time_s("transfer", "window", 300e-9, grid_errors);
    opt.window_center = config.time_s("transfer", "fit_center", 20.0e-6, grid_errors);
    opt.delays = grid_from_config(config, "transfer", 0.0, 45.0e-6, 301, grid_errors);
    const std::string budget = config.raw("transfer", "budget").value_or("preset");
    if (!grid_errors.empty()) return print_config_errors(config_path, grid_errors);
    if (budget == "preset") opt.budget = transfer_budget_preset();
    opt.seed = settings.seed;
    const FidelityReport report = run_transfer_suite(p, opt);

    // Per-state curves are recomputed inside the suite; store the summary.
    SweepResult summary_sweep;
    summary_sweep.meta.experiment = "transfer";
    summary_sweep.meta.seed = settings.seed;
    summary_sweep.meta.params = params_snapshot(p);
    summary_sweep.x = {0.0, 3.141592653589793, 1.5707963267948966, 4.71238898038469};
    summary_sweep.y.assign(report.fidelity.begin(), report.fidelity.end());
    for (std::size_t i = 0; i < 4; ++i)
      summary_sweep.meta.fits["fidelity_" + std::to_string(i)] = report.fidelity[i];
    summary_sweep.meta.fits["mean_fidelity"] = report.mean_fidelity;
    summary_sweep.meta.fits["write_window_s"] = report.write_window;
    write_outputs(dir, "transfer", summary_sweep);
    summary("mean_fidelity", report.mean_fidelity);
    return 0;
  }
  if (experiment == "cpmg") {
    StorageOptions opt;
    opt.n_pulses = static_cast<int>(config.integer("cpmg", "n_pulses", 1, grid_errors));
    opt.ensemble = settings.ensemble;
    opt.seed = settings.seed;
    opt.t1e = p.t1e;
    opt.t2c_pure = p.t2c_pure;
    opt.t2star_n = p.t2star_n;
    opt.total_times = grid_from_config(config, "cpmg", 0.2e-3, 6.0e-3, 12, grid_errors);
    if (!grid_errors.empty()) return print_config_errors(config_path, grid_errors);
    const StorageResult result = run_cpmg_storage(p, opt);
    write_outputs(dir, "cpmg", result.sweep);
    summary("decay_time_s", result.decay_time);
    return 0;
  }
  if (experiment == "extended-dd") {
    ExtendedDdOptions opt;
    opt.tau = config.time_s("extended_dd", "tau", 10.0e-6, grid_errors);
    const long max_cycles = config.integer("extended_dd", "max_cycles", 150, grid_errors);
    const long points = config.integer("extended_dd", "points", 10, grid_errors);
    opt.ensemble = settings.ensemble;
    opt.seed = settings.seed;
    opt.t1e = p.t1e;
    opt.t2c_pure = p.t2c_pure;
    opt.t2star_n = p.t2star_n;
    if (!grid_errors.empty()) return print_config_errors(config_path, grid_errors);
    for (long i = 1; i <= points; ++i)
      opt.cycle_counts.push_back(static_cast<int>(std::max(1L, max_cycles * i / points)));
    const StorageResult result = run_extended_dd(p, opt);
    write_outputs(dir, "extended-dd", result.sweep);
    summary("decay_time_s", result.decay_time);
    return 0;
  }

  std::cerr << "error: unknown experiment '" << experiment << "'\n";
  std::cerr << "available:";
  for (const char* name : kExperiments) std::cerr << " " << name;
  std::cerr << "\n";
  return 2;
}

int cmd_parse_check(const std::string& path) {
  std::string text, err;
  if (!read_file(path, text, err)) {
    std::cerr << path << ":0:0: error: " << err << "\n";
    return 2;
  }
  const ParseResult parsed = parse_sequence(text);
  for (const auto& d : parsed.diagnostics) std::cerr << to_string(d, path) << "\n";
  if (!parsed.ok) return 2;

  SequenceIR flat;
  try {
    flat = expand_repeats(parsed.ir);
  } catch (const std::exception& e) {
    std::cerr << path << ":1:1: error: " << e.what() << "\n";
    return 2;
  }

  // Bind each sweep variable to its first value for validation.
  std::map<std::string, double> vars;
  for (const auto& s : flat.sweeps) {
    const auto vals = s.values();
    vars[s.var] = vals.empty() ? 0.0 : vals.front();
  }
  const ResolveResult resolved = resolve(flat, vars, DriveCalibration{});
  for (const auto& d : resolved.diagnostics) std::cerr << to_string(d, path) << "\n";
  if (!resolved.ok) return 2;

  bool hard_error = false;
  for (const auto& d : validate_timing(resolved.seq)) {
    std::cerr << to_string(d, path) << "\n";
    hard_error |= d.severity == Severity::error;
  }
  if (hard_error) return 2;
  std::printf("%zu events\n", resolved.seq.events.size());
  return 0;
}

int cmd_fit(const std::string& model, const std::string& csv_path) {
  CsvData data;
  CsvReadError read_error;
  if (!read_csv(csv_path, data, read_error)) {
    std::cerr << csv_path << ":" << read_error.line << ": error: " << read_error.message
              << "\n";
    return 2;
  }

  FitResult fit;
  try {
    if (model == "cosine") {
      fit = fit_cosine(data.x, data.y);
    } else if (model == "exponential") {
      fit = fit_exponential(data.x, data.y);
    } else if (model == "rates") {
      if (!data.has_y2) {
        std::cerr << csv_path << ":0: error: rates model needs columns x,total_ms0,p_up\n";
        return 2;
      }
      fit = fit_rate_params(data.x, data.y, data.y2);
    } else {
      std::cerr << "error: unknown model '" << model
                << "' (cosine, exponential, rates)\n";
      return 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  nlohmann::ordered_json j;
  j["model"] = model;
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["residual"] = fit.residual;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < fit.names.size(); ++i) {
    params[fit.names[i]] = {{"value", fit.parameters(static_cast<int>(i))},
                            {"std_error", fit.std_errors(static_cast<int>(i))},
                            {"unit", fit.units[i]}};
  }
  j["parameters"] = params;
  std::printf("%s\n", j.dump(2).c_str());
  return fit.converged ? 0 : 1;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir) {
  std::string text, err;
  if (!read_file(config_path, text, err)) {
    std::cerr << config_path << ":0: error: " << err << "\n";
    return 2;
  }
  std::vector<ConfigError> errors;
  const Config config = Config::parse(text, errors);
  RunSettings settings = load_run_settings(config, errors);
  if (!errors.empty()) return print_config_errors(config_path, errors);

  const long cycles = config.integer("sweep", "cycles", 4, errors);
  const double laser = config.time_s("sweep", "laser_duration", 0.3e-6, errors);
  if (!errors.empty()) return print_config_errors(config_path, errors);

  // Each row: <power> <alpha time> <beta time> <gamma time>.
  SweepResult sweep;
  sweep.meta.experiment = "power-sweep";
  sweep.meta.seed = settings.seed;
  sweep.meta.params = {{"cycles", static_cast<double>(cycles)},
                       {"laser_duration", laser}};
  for (const auto& row : config.all("power_table", "row")) {
    std::istringstream cells(row.value);
    std::string cell;
    std::vector<double> values;
    bool ok = true;
    while (cells >> cell) {
      const auto v = parse_quantity(cell, Dimension::any);
      if (!v) {
        ok = false;
        break;
      }
      values.push_back(*v);
    }
    if (!ok || values.size() != 4) {
      std::cerr << config_path << ":" << row.line
                << ": error: power_table row needs <power> <alpha_time> <beta_time>"
                   " <gamma_time>\n";
      return 2;
    }
    RateParams rates;
    rates.alpha = 1.0 / values[1];
    rates.beta = 1.0 / values[2];
    rates.gamma = 1.0 / values[3];
    const SweepResult run = run_repeated_init(settings.register_params, rates,
                                              static_cast<int>(cycles), laser);
    sweep.x.push_back(values[0]);
    sweep.y.push_back(run.y.back());
  }

  fs::create_directories(out_dir);
  write_sweep_csv((fs::path(out_dir) / "sweep.csv").string(), sweep);
  write_meta_json((fs::path(out_dir) / "sweep.meta.json").string(), sweep);
  std::printf("%zu rows\n", sweep.x.size());
  return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Pulse-level simulator for an NV-13C spin-register quantum memory"};
  app.require_subcommand(1);

  std::string experiment, config_path, out_dir = ".", seq_path, model, csv_path;
  long seed = -1, ensemble = 0;

  CLI::App* run = app.add_subcommand("run", "Run a named experiment");
  run->add_option("experiment", experiment, "Experiment name")->required();
  run->add_option("-c,--config", config_path, "Configuration file");
  run->add_option("-o,--out", out_dir, "Output directory");
  run->add_option("--seed", seed, "Random seed override");
  run->add_option("--ensemble", ensemble, "Trajectory count override");

  CLI::App* check = app.add_subcommand("parse-check", "Validate a pulse sequence file");
  check->add_option("file", seq_path, "Sequence file")->required();

  CLI::App* fit = app.add_subcommand("fit", "Fit a model to CSV data");
  fit->add_option("model", model, "cosine | exponential | rates")->required();
  fit->add_option("csv", csv_path, "Input CSV (x,y[,extra])")->required();

  CLI::App* sweep = app.add_subcommand("sweep", "Sweep a parameter table");
  sweep->add_option("-c,--config", config_path, "Configuration file")->required();
  sweep->add_option("-o,--out", out_dir, "Output directory");

  std::vector<const char*> argv;
  argv.push_back("nvmem");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return cmd_run(experiment, config_path, out_dir, seed, ensemble);
    if (check->parsed()) return cmd_parse_check(seq_path);
    if (fit->parsed()) return cmd_fit(model, csv_path);
    if (sweep->parsed()) return cmd_sweep(config_path, out_dir);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

} // namespace nvmem
