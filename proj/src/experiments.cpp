#include "nvmem/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "nvmem/parallel.hpp"
#include "nvmem/rng.hpp"

namespace nvmem {

std::map<std::string, double> params_snapshot(const RegisterParams& p) {
  return {
      {"zero_field_splitting", p.zero_field_splitting},
      {"b_field", p.b_field},
      {"gamma_e", p.gamma_e},
      {"gamma_n", p.gamma_n},
      {"a_par", p.a_par},
      {"a_perp", p.a_perp},
      {"t1e", p.t1e},
      {"t2star_e", p.t2star_e},
      {"t2star_n", p.t2star_n},
      {"t2c_pure", p.t2c_pure},
  };
}

namespace {

const complexd iu(0.0, 1.0);

// Attenuate eigenbasis coherences between different electron manifolds;
// the Schur multiplier is block-constant and positive semidefinite.
void dephase_electron(QuantumState& s, const Eigensystem& es, double factor) {
  Matrix6c rho_eig = es.vectors.adjoint() * s.rho * es.vectors;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      if (ms_of(es.product_of[i]) != ms_of(es.product_of[j])) rho_eig(i, j) *= factor;
    }
  s.rho = es.vectors * rho_eig * es.vectors.adjoint();
}

} // namespace

// --- sequence execution -------------------------------------------------------

namespace {

struct FrameEngine {
  RegisterParams params;
  Eigensystem es;
  Transitions tr;
  Vector6d frame;        // frame energy per eigen column
  double t2star_n = 0.0; // 0 disables the envelope

  FrameEngine(const RegisterParams& p, const std::map<Channel, double>& detuning,
              bool dephasing)
      : params(p), es(eigensystem(build_hamiltonian(p))), tr(find_transitions(es)) {
    auto det = [&detuning](Channel c) {
      const auto it = detuning.find(c);
      return it == detuning.end() ? 0.0 : it->second;
    };
    const double f_mw1 = tr.mw1.frequency + det(Channel::mw1);
    const double f_rf1 = tr.rf1.frequency + det(Channel::rf1);
    const double f_rf2 = tr.rf2.frequency + det(Channel::rf2);

    // Oscillator-locked frame: coherences on resonant transitions are
    // stationary, programmed detunings show up as fringe frequencies.
    frame = es.values;
    frame(es.column_of(Level::m0_dn)) = 0.0;
    frame(es.column_of(Level::m1_dn)) = f_mw1;
    frame(es.column_of(Level::m1_up)) = f_mw1 + f_rf1;
    frame(es.column_of(Level::m0_up)) = f_rf2;
    if (dephasing) t2star_n = p.t2star_n;
  }

  const Transition& transition(Channel c) const {
    switch (c) {
      case Channel::mw1: return tr.mw1;
      case Channel::mw2: return tr.mw2;
      case Channel::rf1: return tr.rf1;
      case Channel::rf2: return tr.rf2;
      default: throw std::invalid_argument("channel has no transition");
    }
  }

  void free_evolve(QuantumState& s, double dt) const {
    if (dt <= 0) return;
    Matrix6c rho_eig = es.vectors.adjoint() * s.rho * es.vectors;
    Vector6c phases;
    for (int i = 0; i < 6; ++i)
      phases(i) = std::exp(-iu * two_pi * (es.values(i) - frame(i)) * dt);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) rho_eig(i, j) *= phases(i) * std::conj(phases(j));
    apply_envelope(rho_eig, dt);
    s.rho = es.vectors * rho_eig * es.vectors.adjoint();
  }

  void apply_envelope(Matrix6c& rho_eig, double dt) const {
    if (t2star_n <= 0) return;
    const double f = std::exp(-dt / t2star_n);
    const std::array<std::pair<Level, Level>, 3> pairs = {
        std::make_pair(Level::m_minus1_up, Level::m_minus1_dn),
        std::make_pair(Level::m0_up, Level::m0_dn),
        std::make_pair(Level::m1_up, Level::m1_dn)};
    for (const auto& [a, b] : pairs) {
      const int ca = es.column_of(a), cb = es.column_of(b);
      rho_eig(ca, cb) *= f;
      rho_eig(cb, ca) *= f;
    }
  }

  void pulse(QuantumState& s, Channel c, double angle, double phase) const {
    s = apply_ideal_pulse(s, es, transition(c), angle, phase);
  }

  // Timed drive: full frame Hamiltonian with the coupling block, one
  // exponential step (the frame Hamiltonian is time-independent).
  void drive(QuantumState& s, Channel c, double eff_rabi, double phase, double dt) const {
    const Transition& t = transition(c);
    Matrix6c h = Matrix6c::Zero();
    for (int i = 0; i < 6; ++i) h(i, i) = es.values(i) - frame(i);
    h(t.upper, t.lower) = 0.5 * eff_rabi * iu * std::exp(iu * phase);
    h(t.lower, t.upper) = std::conj(h(t.upper, t.lower));

    Eigen::SelfAdjointEigenSolver<Matrix6c> solver(h);
    Vector6c ph;
    for (int i = 0; i < 6; ++i)
      ph(i) = std::exp(-iu * two_pi * solver.eigenvalues()(i) * dt);
    const Matrix6c u_eig =
        solver.eigenvectors() * ph.asDiagonal() * solver.eigenvectors().adjoint();

    Matrix6c rho_eig = es.vectors.adjoint() * s.rho * es.vectors;
    rho_eig = u_eig * rho_eig * u_eig.adjoint();
    apply_envelope(rho_eig, dt);
    s.rho = es.vectors * rho_eig * es.vectors.adjoint();
  }
};

} // namespace

ExecResult execute_sequence(const CompiledSequence& seq, const ExecContext& ctx,
                            const QuantumState& initial) {
  const FrameEngine engine(ctx.params, ctx.detuning, ctx.nuclear_dephasing);

  // Readout is the bright population just before the final laser pulse.
  std::size_t readout_index = seq.events.size();
  for (std::size_t i = seq.events.size(); i-- > 0;) {
    if (seq.events[i].channel == Channel::laser) {
      readout_index = i;
      break;
    }
  }
  const bool last_is_laser =
      readout_index + 1 == seq.events.size() && !seq.events.empty();

  ExecResult out;
  QuantumState s = initial;
  double cursor = 0.0;
  for (std::size_t i = 0; i < seq.events.size(); ++i) {
    const TimedEvent& e = seq.events[i];
    engine.free_evolve(s, e.start - cursor);
    cursor = std::max(cursor, e.start);

    if (last_is_laser && i == readout_index) {
      out.readout = bright_population(s, engine.es);
      out.has_readout = true;
    }

    switch (e.channel) {
      case Channel::delay:
        engine.free_evolve(s, e.duration);
        break;
      case Channel::laser: {
        RateParams scaled = ctx.rates;
        scaled.alpha *= e.power;
        scaled.beta *= e.power;
        scaled.gamma *= e.power;
        s = apply_laser(s, engine.es, scaled, e.duration);
        break;
      }
      default:
        if (e.timed_drive) {
          engine.drive(s, e.channel, e.amplitude, e.phase, e.duration);
        } else {
          engine.free_evolve(s, 0.5 * e.duration);
          engine.pulse(s, e.channel, e.angle, e.phase);
          engine.free_evolve(s, 0.5 * e.duration);
        }
        break;
    }
    cursor = std::max(cursor, e.end());
  }
  out.state = s;
  if (!out.has_readout) out.readout = bright_population(s, engine.es);
  return out;
}

// --- rabi ------------------------------------------------------------------------

namespace {

std::string format_ns(double seconds) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17gns", seconds * 1e9);
  return buf;
}

} // namespace

SweepResult run_rabi(const RegisterParams& p, const RateParams& rates,
                     const RabiOptions& opt) {
  if (!std::is_sorted(opt.durations.begin(), opt.durations.end()))
    throw std::invalid_argument("run_rabi: duration grid must ascend");

  std::string text = "laser 10us\n";
  if (opt.init_cycles > 0) {
    text += "repeat " + std::to_string(opt.init_cycles) + " { mw1 pi; rf1 pi; laser " +
            format_ns(opt.init_laser_duration) + " }\n";
    text += "mw2 pi\nrf1 X(t)\nmw2 pi\n";
  } else {
    text += "mw1 pi\nrf1 X(t)\nmw1 pi\n";
  }
  text += "laser 300ns\n";

  DriveCalibration cal;
  cal.rf_rabi = opt.effective_rabi;

  ExecContext ctx{p, rates, cal, {}, true};
  const ParseResult parsed = parse_sequence(text);
  if (!parsed.ok) throw std::logic_error("internal rabi sequence failed to parse");
  const SequenceIR flat = expand_repeats(parsed.ir);

  SweepResult out;
  out.meta.experiment = "rabi";
  out.meta.params = params_snapshot(p);
  out.x = opt.durations;
  out.y.resize(out.x.size());
  const QuantumState zero = QuantumState::electron_polarized();
  for (std::size_t i = 0; i < out.x.size(); ++i) {
    const ResolveResult r = resolve(flat, {{"t", out.x[i]}}, cal);
    if (!r.ok) throw std::logic_error("internal rabi sequence failed to resolve");
    out.y[i] = execute_sequence(r.seq, ctx, zero).readout;
  }

  const FitResult fit = fit_cosine(out.x, out.y);
  if (fit.converged) {
    out.meta.fits["rabi_frequency_hz"] = fit.param("frequency");
    out.meta.fits["pi_time_s"] = 0.5 / fit.param("frequency");
    out.meta.fits["contrast"] = 2.0 * fit.param("amplitude");
  }
  return out;
}

SweepResult run_fid(const RegisterParams& p, const RateParams& rates,
                    const FidOptions& opt) {
  const std::string text =
      "laser 10us\nmw1 pi\nrf1 pi/2\ndelay t\nrf1 pi/2\nmw1 pi\nlaser 300ns\n";
  DriveCalibration cal;
  ExecContext ctx{p, rates, cal, {{Channel::rf1, opt.detuning}}, opt.dephasing};

  const ParseResult parsed = parse_sequence(text);
  if (!parsed.ok) throw std::logic_error("internal fid sequence failed to parse");

  SweepResult out;
  out.meta.experiment = "fid";
  out.meta.params = params_snapshot(p);
  out.meta.params["detuning"] = opt.detuning;
  out.x = opt.delays;
  out.y.resize(out.x.size());
  QuantumState zero = QuantumState::electron_polarized();
  for (std::size_t i = 0; i < out.x.size(); ++i) {
    const ResolveResult r = resolve(parsed.ir, {{"t", out.x[i]}}, cal);
    if (!r.ok) throw std::logic_error("internal fid sequence failed to resolve");
    out.y[i] = execute_sequence(r.seq, ctx, zero).readout;
  }

  const FitResult fit = fit_damped_cosine(out.x, out.y);
  if (fit.converged) {
    out.meta.fits["fringe_frequency_hz"] = fit.param("frequency");
    out.meta.fits["envelope_time_s"] = fit.param("damping_time");
  }
  return out;
}

// --- initialization -----------------------------------------------------------------

InitTomographyResult run_init_tomography(const RegisterParams& p, const RateParams& r,
                                         const std::vector<double>& laser_durations) {
  const auto es = eigensystem(build_hamiltonian(p));
  const auto tr = find_transitions(es);

  // Swap-prepared start: long laser, MW1 pi, RF1 pi.
  QuantumState start = eigenstate_mixture(es, {{Level::m0_up, 0.5}, {Level::m0_dn, 0.5}});
  start = apply_ideal_pulse(start, es, tr.mw1, std::numbers::pi_v<double>);
  start = apply_ideal_pulse(start, es, tr.rf1, std::numbers::pi_v<double>);

  InitTomographyResult out;
  out.total_ms0.meta.experiment = "init-tomography";
  out.total_ms0.meta.params = params_snapshot(p);
  out.p_up.meta = out.total_ms0.meta;
  out.total_ms0.x = laser_durations;
  out.p_up.x = laser_durations;
  for (double t : laser_durations) {
    const QuantumState s = apply_laser(start, es, r, t);
    out.total_ms0.y.push_back(bright_population(s, es));
    // Swap |0,dn> <-> |1,dn> out of the bright manifold, read what remains.
    const QuantumState swapped = apply_ideal_pulse(s, es, tr.mw1, std::numbers::pi_v<double>);
    out.p_up.y.push_back(bright_population(swapped, es));
  }
  return out;
}

SweepResult run_repeated_init(const RegisterParams& p, const RateParams& r, int cycles,
                              double laser_duration) {
  if (cycles < 0) throw std::invalid_argument("run_repeated_init: negative cycle count");
  const auto es = eigensystem(build_hamiltonian(p));
  const auto tr = find_transitions(es);
  constexpr double pi_angle = std::numbers::pi_v<double>;

  SweepResult out;
  out.meta.experiment = "repeated-init";
  out.meta.params = params_snapshot(p);
  out.meta.params["laser_duration"] = laser_duration;

  QuantumState s = eigenstate_mixture(es, {{Level::m0_up, 0.5}, {Level::m0_dn, 0.5}});
  out.x.push_back(0);
  out.y.push_back(level_population(s, es, Level::m0_up));
  for (int k = 1; k <= cycles; ++k) {
    s = apply_ideal_pulse(s, es, tr.mw1, pi_angle);
    s = apply_ideal_pulse(s, es, tr.rf1, pi_angle);
    s = apply_laser(s, es, r, laser_duration);
    out.x.push_back(k);
    out.y.push_back(level_population(s, es, Level::m0_up));
  }
  out.meta.fits["final_population"] = out.y.back();
  out.meta.fits["nuclear_polarization"] =
      2.0 * (level_population(s, es, Level::m0_up) + level_population(s, es, Level::m1_up)) -
      1.0;
  return out;
}

double optimal_init_duration(const RegisterParams& p, const RateParams& r, int cycles) {
  double best_t = 0.0, best_pop = -1.0;
  for (double t = 0.02e-6; t <= 1.2e-6; t += 0.005e-6) {
    const SweepResult sweep = run_repeated_init(p, r, cycles, t);
    if (sweep.y.back() > best_pop) {
      best_pop = sweep.y.back();
      best_t = t;
    }
  }
  return best_t;
}

// --- transfer + storage ----------------------------------------------------------------

TransferBudget transfer_budget_preset() {
  TransferBudget b;
  b.pulse_retention_mw = 0.9838;
  b.pulse_retention_rf = 0.98;
  b.electron_t2star = true;
  b.readout_noise = 0.01;
  return b;
}

namespace {

struct TransferTiming {
  double mw_pi, mw_pi2, rf_pi;
  double d1, d2;
  double window;
};

TransferTiming layout_transfer(double target_window, const DriveCalibration& cal) {
  TransferTiming t;
  t.mw_pi = 0.5 / cal.mw_rabi;
  t.mw_pi2 = 0.25 / cal.mw_rabi;
  t.rf_pi = 0.5 / cal.rf_rabi;
  // Echo condition: rf pi centered on the echo maximum, zero gap to the
  // closing MW pi. Window = pi/2 + d1 + pi + d2 + rf_pi + pi.
  t.d1 = 0.5 * (target_window - 1.5 * t.mw_pi2 - 2.0 * t.mw_pi - 0.5 * t.rf_pi);
  t.d2 = t.d1 + 0.5 * t.mw_pi2 - 0.5 * t.rf_pi;
  t.window = t.mw_pi2 + t.d1 + t.mw_pi + t.d2 + t.rf_pi + t.mw_pi;
  if (t.d1 < 0 || t.d2 < 0)
    throw std::invalid_argument("transfer window too short for the pulse durations");
  return t;
}

} // namespace

TransferResult run_transfer_storage(const RegisterParams& p, const TransferOptions& opt) {
  if (opt.phi < 0 || opt.phi >= two_pi)
    throw std::invalid_argument("run_transfer_storage: phi must be in [0, 2pi)");
  const auto es = eigensystem(build_hamiltonian(p));
  const auto tr = find_transitions(es);
  constexpr double pi_angle = std::numbers::pi_v<double>;

  const DriveCalibration cal;
  const TransferTiming timing = layout_transfer(opt.target_window, cal);
  const TransferBudget& budget = opt.budget;
  const double mw_f = budget.pulse_retention_mw;
  const double rf_f = budget.pulse_retention_rf;
  const double unrefocused = 0.5 * timing.rf_pi + 0.5 * timing.mw_pi;
  const double electron_factor =
      budget.electron_t2star ? std::exp(-unrefocused / p.t2star_e) : 1.0;

  auto pulse = [&](QuantumState& s, const Transition& t, double angle, double phase,
                   double retention) {
    s = apply_ideal_pulse(s, es, t, angle, phase);
    if (retention < 1.0) s.attenuate_coherences(retention);
  };

  // Write leg: pi/2(phi) .. pi .. rf pi .. pi with echo-aligned timing. The
  // echo refocuses the electron dephasing up to the rf pulse center; the
  // remaining exposure (half rf pulse plus the closing MW pulse) decays at
  // t2star_e while the coherence straddles the two manifolds.
  QuantumState written = eigenstate_mixture(es, {{Level::m0_dn, 1.0}});
  pulse(written, tr.mw1, pi_angle / 2.0, opt.phi, mw_f);
  pulse(written, tr.mw1, pi_angle, 0.0, mw_f);
  pulse(written, tr.rf1, pi_angle, 0.0, rf_f);
  dephase_electron(written, es, electron_factor);
  pulse(written, tr.mw1, pi_angle, 0.0, mw_f);

  SweepResult sweep;
  sweep.meta.experiment = "transfer-storage";
  sweep.meta.seed = opt.seed;
  sweep.meta.params = params_snapshot(p);
  sweep.meta.params["phi"] = opt.phi;
  sweep.meta.params["detuning"] = opt.detuning;
  sweep.x = opt.delays;
  sweep.y.resize(sweep.x.size());

  std::mt19937_64 noise_rng(mix_seed(opt.seed, 0x7261626974ULL));
  for (std::size_t i = 0; i < sweep.x.size(); ++i) {
    QuantumState s = evolve_free(written, es, sweep.x[i],
                                 Frame::rotating_at(tr.rf1, opt.detuning), p.t2star_n);
    // Read leg mirrors the write leg.
    pulse(s, tr.mw1, pi_angle, 0.0, mw_f);
    dephase_electron(s, es, electron_factor);
    pulse(s, tr.rf1, pi_angle, 0.0, rf_f);
    pulse(s, tr.mw1, pi_angle, 0.0, mw_f);
    pulse(s, tr.mw1, pi_angle / 2.0, 0.0, mw_f);
    double y = bright_population(s, es);
    if (budget.readout_noise > 0)
      y = std::clamp(y + budget.readout_noise * standard_normal(noise_rng), 0.0, 1.0);
    sweep.y[i] = y;
  }

  FidelityWindow window;
  window.center = opt.window_center;
  window.frequency_hint = opt.detuning;
  window.envelope_t2star = p.t2star_n;
  const FidelityEstimate est = extract_fidelity(sweep, window);

  TransferResult out;
  out.sweep = std::move(sweep);
  out.delta = est.delta;
  out.fidelity = est.fidelity;
  // The read-write chain conjugates the stored coherence an odd number of
  // times, so the raw fringe phase tracks -phi; report it in the convention
  // where it equals the preparation phase.
  out.fringe_phase = std::remainder(-est.phase, two_pi);
  out.write_window = timing.window;
  out.sweep.meta.fits["delta"] = est.delta;
  out.sweep.meta.fits["fidelity"] = est.fidelity;
  out.sweep.meta.fits["write_window_s"] = timing.window;
  return out;
}

FidelityReport run_transfer_suite(const RegisterParams& p, TransferOptions opt) {
  const std::array<double, 4> phis = {0.0, std::numbers::pi_v<double>,
                                      std::numbers::pi_v<double> / 2.0,
                                      1.5 * std::numbers::pi_v<double>};
  FidelityReport report;
  const std::uint64_t base_seed = opt.seed;
  for (std::size_t i = 0; i < phis.size(); ++i) {
    opt.phi = phis[i];
    opt.seed = mix_seed(base_seed, i);
    const TransferResult r = run_transfer_storage(p, opt);
    report.fidelity[i] = r.fidelity;
    report.delta[i] = r.delta;
    report.phase[i] = r.fringe_phase;
    report.write_window = r.write_window;
  }
  report.mean_fidelity =
      std::accumulate(report.fidelity.begin(), report.fidelity.end(), 0.0) / 4.0;
  return report;
}

FidelityEstimate extract_fidelity(const SweepResult& sweep, const FidelityWindow& w) {
  const double width = w.width > 0 ? w.width : 0.5 / w.frequency_hint;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < sweep.x.size(); ++i) {
    if (std::abs(sweep.x[i] - w.center) <= 0.5 * width) {
      xs.push_back(sweep.x[i]);
      ys.push_back(sweep.y[i]);
    }
  }
  FidelityEstimate est;
  if (xs.size() < 6) return est;

  // The fringe frequency is the programmed detuning, so the fit is linear:
  //   y = b + env(t) [C cos(w t) + S sin(w t)],
  // with the known storage envelope folded in so the fitted amplitude is the
  // time-zero contrast directly.
  auto env = [&w](double t) {
    return w.envelope_t2star > 0 ? std::exp(-t / w.envelope_t2star) : 1.0;
  };
  const double omega = two_pi * w.frequency_hint;
  Eigen::MatrixXd design(xs.size(), 3);
  Eigen::VectorXd rhs(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = env(xs[i]);
    design(i, 0) = e * std::cos(omega * xs[i]);
    design(i, 1) = e * std::sin(omega * xs[i]);
    design(i, 2) = 1.0;
    rhs(i) = ys[i];
  }
  const Eigen::Vector3d sol = design.colPivHouseholderQr().solve(rhs);

  est.delta = std::min(2.0 * std::hypot(sol(0), sol(1)), 1.0);
  est.fidelity = 0.5 * (1.0 + est.delta);
  // cos(w t + theta) with theta = atan2(-S, C), evaluated at the window center.
  est.phase = std::remainder(omega * w.center + std::atan2(-sol(1), sol(0)), two_pi);
  est.converged = true;
  return est;
}

// --- storage decay under decoupling ------------------------------------------------------

namespace {

struct TrajectoryEnsemble {
  // contribution[point][trajectory]
  std::vector<std::vector<double>> contribution;
  std::vector<double> times;

  // Signal convention: y = (1 + echo amplitude)/2, the probability that the
  // readout finds the register where it started.
  SweepResult reduce(double t2c_pure) const {
    SweepResult out;
    out.x = times;
    out.y.resize(times.size());
    out.y_err.resize(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
      const auto& c = contribution[i];
      const double mean = std::accumulate(c.begin(), c.end(), 0.0) / c.size();
      double ss = 0.0;
      for (double v : c) ss += (v - mean) * (v - mean);
      const double envelope = std::exp(-times[i] / t2c_pure);
      out.y[i] = 0.5 * (1.0 + mean * envelope);
      out.y_err[i] = 0.5 * envelope * std::sqrt(ss / (c.size() * (c.size() - 1.0)));
    }
    return out;
  }
};

double bootstrap_decay_sd(const TrajectoryEnsemble& ens, double t2c_pure, int resamples,
                          std::uint64_t seed) {
  if (resamples <= 1) return 0.0;
  const std::size_t n_traj = ens.contribution.front().size();
  std::vector<double> taus;
  taus.reserve(resamples);
  std::mt19937_64 rng(seed);
  for (int b = 0; b < resamples; ++b) {
    std::vector<std::size_t> pick(n_traj);
    for (auto& idx : pick)
      idx = static_cast<std::size_t>(uniform01(rng) * n_traj) % n_traj;
    std::vector<double> ys(ens.times.size());
    for (std::size_t i = 0; i < ens.times.size(); ++i) {
      double sum = 0.0;
      for (std::size_t k : pick) sum += ens.contribution[i][k];
      ys[i] = 0.5 * (1.0 + (sum / n_traj) * std::exp(-ens.times[i] / t2c_pure));
    }
    const FitResult fit = fit_exponential(ens.times, ys);
    if (fit.converged) taus.push_back(fit.param("time_constant"));
  }
  if (taus.size() < 2) return 0.0;
  const double mean = std::accumulate(taus.begin(), taus.end(), 0.0) / taus.size();
  double ss = 0.0;
  for (double v : taus) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (taus.size() - 1.0));
}

} // namespace

StorageResult run_cpmg_storage(const RegisterParams& p, const StorageOptions& opt) {
  if (opt.n_pulses < 1) throw std::invalid_argument("run_cpmg_storage: need >= 1 pulse");
  const auto es = eigensystem(build_hamiltonian(p));
  const auto tr = find_transitions(es);
  const double f_gap = tr.rf1.frequency - tr.rf2.frequency;
  const double cauchy_width = 1.0 / (two_pi * opt.t2star_n);

  TrajectoryEnsemble ens;
  ens.times = opt.total_times;
  ens.contribution.assign(ens.times.size(),
                          std::vector<double>(static_cast<std::size_t>(opt.ensemble)));

  for (std::size_t ti = 0; ti < ens.times.size(); ++ti) {
    const double total = ens.times[ti];
    std::vector<PhasePulse> pulses;
    for (int k = 1; k <= opt.n_pulses; ++k)
      pulses.push_back({total * (2.0 * k - 1.0) / (2.0 * opt.n_pulses),
                        PulseKind::invert_m1});
    auto& slot = ens.contribution[ti];
    parallel_for(slot.size(), [&](std::size_t i) {
      std::mt19937_64 rng(mix_seed(opt.seed, ti * 1000003ULL + i));
      const double delta = cauchy(rng, cauchy_width);
      const auto flips = sample_t1_flips(opt.t1e, total, rng());
      // The stored coherence precesses at the static offset delta while in
      // mS=1; a flip moves it 127 MHz off the reference frame.
      const auto res =
          run_telegraph_trajectory(flips, pulses, delta, delta - f_gap, total);
      slot[i] = std::cos(res.phase);
    });
  }

  StorageResult out;
  out.sweep = ens.reduce(opt.t2c_pure);
  out.sweep.meta.experiment = "cpmg-storage";
  out.sweep.meta.seed = opt.seed;
  out.sweep.meta.params = params_snapshot(p);
  out.sweep.meta.params["n_pulses"] = opt.n_pulses;
  out.sweep.meta.params["ensemble"] = opt.ensemble;

  const FitResult fit = fit_exponential(out.sweep.x, out.sweep.y);
  if (fit.converged) {
    out.decay_time = fit.param("time_constant");
    out.decay_time_err =
        bootstrap_decay_sd(ens, opt.t2c_pure, opt.bootstrap, mix_seed(opt.seed, 77));
    out.sweep.meta.fits["decay_time_s"] = out.decay_time;
    out.sweep.meta.fits["decay_time_err_s"] = out.decay_time_err;
  }
  return out;
}

std::vector<PhasePulse> extended_dd_pulses(double tau, int cycles) {
  if (tau <= 0) throw std::invalid_argument("extended_dd_pulses: tau must be > 0");
  std::vector<PhasePulse> pulses;
  pulses.reserve(static_cast<std::size_t>(cycles) * 3);
  for (int c = 0; c < cycles; ++c) {
    const double base = 4.0 * tau * c;
    pulses.push_back({base + tau, PulseKind::invert_m1});
    pulses.push_back({base + 2.0 * tau, PulseKind::invert_m0});
    pulses.push_back({base + 3.0 * tau, PulseKind::invert_m1});
  }
  return pulses;
}

StorageResult run_extended_dd(const RegisterParams& p, const ExtendedDdOptions& opt) {
  if (opt.tau <= 0) throw std::invalid_argument("run_extended_dd: tau must be > 0");
  const auto es = eigensystem(build_hamiltonian(p));
  const auto tr = find_transitions(es);
  const double cauchy_width = 1.0 / (two_pi * opt.t2star_n);

  TrajectoryEnsemble ens;
  for (int n : opt.cycle_counts) ens.times.push_back(4.0 * opt.tau * n);
  ens.contribution.assign(ens.times.size(),
                          std::vector<double>(static_cast<std::size_t>(opt.ensemble)));

  for (std::size_t ti = 0; ti < ens.times.size(); ++ti) {
    const double total = ens.times[ti];
    const auto pulses = extended_dd_pulses(opt.tau, opt.cycle_counts[ti]);
    auto& slot = ens.contribution[ti];
    parallel_for(slot.size(), [&](std::size_t i) {
      std::mt19937_64 rng(mix_seed(opt.seed, ti * 1000003ULL + i));
      const double delta = cauchy(rng, cauchy_width);
      const auto flips = sample_t1_flips(opt.t1e, total, rng());
      double f1 = delta, f0 = delta;
      if (opt.lab_frame_frequencies) {
        f1 = tr.rf1.frequency + delta;
        f0 = tr.rf2.frequency + delta;
      }
      const auto res = run_telegraph_trajectory(flips, pulses, f1, f0, total);
      slot[i] = std::cos(res.phase);
    });
  }

  StorageResult out;
  out.sweep = ens.reduce(opt.t2c_pure);
  out.sweep.meta.experiment = "extended-dd";
  out.sweep.meta.seed = opt.seed;
  out.sweep.meta.params = params_snapshot(p);
  out.sweep.meta.params["tau"] = opt.tau;
  out.sweep.meta.params["ensemble"] = opt.ensemble;

  const FitResult fit = fit_exponential(out.sweep.x, out.sweep.y);
  if (fit.converged) {
    out.decay_time = fit.param("time_constant");
    out.decay_time_err =
        bootstrap_decay_sd(ens, opt.t2c_pure, opt.bootstrap, mix_seed(opt.seed, 78));
    out.sweep.meta.fits["decay_time_s"] = out.decay_time;
    out.sweep.meta.fits["decay_time_err_s"] = out.decay_time_err;
  }
  return out;
}

std::vector<double> single_flip_phase_errors(const RegisterParams& p, double tau,
                                             int samples, std::uint64_t seed) {
  const auto es = eigensystem(build_hamiltonian(p));
  const auto tr = find_transitions(es);
  const auto pulses = extended_dd_pulses(tau, 1);

  std::vector<double> errors(static_cast<std::size_t>(samples));
  std::mt19937_64 rng(seed);
  for (auto& e : errors) {
    const double u = uniform01(rng) * 4.0 * tau;
    const auto res = run_telegraph_trajectory({u}, pulses, tr.rf1.frequency,
                                              tr.rf2.frequency, 4.0 * tau);
    e = std::abs(res.phase);
  }
  return errors;
}

} // namespace nvmem
