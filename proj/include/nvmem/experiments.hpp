#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nvmem/dissipation.hpp"
#include "nvmem/fitkit.hpp"
#include "nvmem/params.hpp"
#include "nvmem/sequence.hpp"
#include "nvmem/spin_core.hpp"

namespace nvmem {

struct SweepResult {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> y_err;  // optional, empty when not estimated

  struct Meta {
    std::string experiment;
    std::uint64_t seed = 0;
    std::map<std::string, double> params;  // snapshot for the CSV header
    std::map<std::string, double> fits;    // headline fitted numbers
  } meta;
};

// Register constants as a flat map, stamped into CSV/JSON outputs.
std::map<std::string, double> params_snapshot(const RegisterParams& p);

// --- sequence execution -------------------------------------------------------

// Frame and hardware context for executing a compiled pulse sequence. Pulses
// are phase-locked to per-transition oscillators (resonant plus the
// configured detuning); fixed-angle pulses apply their full area at the pulse
// center.
struct ExecContext {
  RegisterParams params;
  RateParams rates;                 // laser pumping
  DriveCalibration calibration;     // effective Rabi frequencies
  std::map<Channel, double> detuning;  // oscillator offsets, Hz
  bool nuclear_dephasing = true;    // exponential T2*_n envelope on delays
};

struct ExecResult {
  QuantumState state;   // final state
  double readout = 0.0; // bright population just before the closing laser
  bool has_readout = false;
};

ExecResult execute_sequence(const CompiledSequence& seq, const ExecContext& ctx,
                            const QuantumState& initial);

// --- canned protocols -----------------------------------------------------------

// Nuclear Rabi oscillation: init, MW pi, swept rf drive, MW pi, readout.
// `effective_rabi` is the enhanced nuclear Rabi frequency to calibrate to.
struct RabiOptions {
  double effective_rabi = 4.3e6;  // Hz
  std::vector<double> durations;  // s, ascending
  int init_cycles = 0;            // optional purification before the sweep
  double init_laser_duration = 0.3e-6;
};
SweepResult run_rabi(const RegisterParams& p, const RateParams& rates,
                     const RabiOptions& opt);

// Nuclear free-induction decay at a programmed rf detuning.
struct FidOptions {
  double detuning = 150.0e3;      // Hz
  std::vector<double> delays;     // s
  bool dephasing = true;
};
SweepResult run_fid(const RegisterParams& p, const RateParams& rates,
                    const FidOptions& opt);

// Pumping tomography: total mS=0 population and P_|0,up> vs laser duration,
// both through the full density-matrix pipeline.
struct InitTomographyResult {
  SweepResult total_ms0;
  SweepResult p_up;
};
InitTomographyResult run_init_tomography(const RegisterParams& p, const RateParams& r,
                                         const std::vector<double>& laser_durations);

// Repeated swap + short-laser purification; y = P_|0,up> after each cycle.
SweepResult run_repeated_init(const RegisterParams& p, const RateParams& r, int cycles,
                              double laser_duration);

// Laser duration maximizing P_|0,up> after `cycles` purification cycles.
double optimal_init_duration(const RegisterParams& p, const RateParams& r, int cycles);

// --- coherence transfer and storage ----------------------------------------------

struct TransferBudget {
  double pulse_retention_mw = 1.0;  // coherence kept per MW pulse
  double pulse_retention_rf = 1.0;  // per rf pulse
  bool electron_t2star = false;     // dephase over the unrefocused window
  double readout_noise = 0.0;       // Gaussian sigma added to the signal
};

// Loss budget calibrated against the measured average transfer fidelity.
TransferBudget transfer_budget_preset();

struct TransferOptions {
  double phi = 0.0;              // phase of the preparation pi/2 pulse
  std::vector<double> delays;    // storage times, s
  double detuning = 150.0e3;     // readout Ramsey detuning, Hz
  double window_center = 20.0e-6;
  TransferBudget budget;
  std::uint64_t seed = 1;
  double target_window = 300e-9; // total write duration to lay out
};

struct TransferResult {
  SweepResult sweep;
  double delta = 0.0;       // fitted peak-to-peak fringe amplitude
  double fidelity = 0.0;    // (1 + delta)/2
  double fringe_phase = 0.0;
  double write_window = 0.0;  // laid-out write duration, s
};

TransferResult run_transfer_storage(const RegisterParams& p, const TransferOptions& opt);

struct FidelityReport {
  std::array<double, 4> fidelity{};  // +X, -X, +Y, -Y
  std::array<double, 4> delta{};
  std::array<double, 4> phase{};
  double mean_fidelity = 0.0;
  double write_window = 0.0;
};

// The four cardinal initial states phi = 0, pi, pi/2, 3pi/2.
FidelityReport run_transfer_suite(const RegisterParams& p, TransferOptions opt);

// Peak-to-peak amplitude of a single fringe oscillation fitted inside a
// half-period window, corrected for the deterministic storage envelope at the
// window center; F = (1 + delta)/2.
struct FidelityWindow {
  double center = 20.0e-6;
  double width = 0.0;  // 0: half a fringe period
  double frequency_hint = 150.0e3;
  double envelope_t2star = 0.0;  // 0: no correction
};
struct FidelityEstimate {
  double delta = 0.0;
  double fidelity = 0.0;
  double phase = 0.0;
  bool converged = false;
};
FidelityEstimate extract_fidelity(const SweepResult& sweep, const FidelityWindow& w);

// --- storage decay under dynamical decoupling --------------------------------------

struct StorageOptions {
  int n_pulses = 1;              // CPMG order
  std::vector<double> total_times;  // s
  int ensemble = 1000;
  std::uint64_t seed = 1;
  double t2c_pure = 33.0e-3;     // pure dephasing during storage
  double t1e = 3.3e-3;
  double t2star_n = 50.0e-6;     // static-detuning spread (exponential FID)
  int bootstrap = 100;           // resamples for the decay-time error
};

struct StorageResult {
  SweepResult sweep;
  double decay_time = 0.0;      // fitted exponential time constant, s
  double decay_time_err = 0.0;  // bootstrap standard deviation
};

// CPMG-n echo train on the stored coherence. Trajectories that flip out of
// the mS=1 manifold dephase against the frame running 127 MHz away and
// average to zero signal.
StorageResult run_cpmg_storage(const RegisterParams& p, const StorageOptions& opt);

struct ExtendedDdOptions {
  double tau = 10.0e-6;          // quarter-cycle spacing, s
  std::vector<int> cycle_counts; // readout after 4*tau*n
  int ensemble = 1000;
  std::uint64_t seed = 1;
  double t2c_pure = 33.0e-3;
  double t1e = 3.3e-3;
  double t2star_n = 50.0e-6;
  bool lab_frame_frequencies = false;  // diagnostic mode: absolute rf splittings
  int bootstrap = 100;
};

// Decoupling cycle of duration 4 tau: rf pi pulses at tau and 3 tau refocus
// the mS=1 coherence, and a MW-pair + rf + MW-pair composite at 2 tau acts as
// an inversion on the mS=0 coherence, so either manifold refocuses per cycle.
std::vector<PhasePulse> extended_dd_pulses(double tau, int cycles);

StorageResult run_extended_dd(const RegisterParams& p, const ExtendedDdOptions& opt);

// Distribution of the residual phase after one 4-tau cycle containing exactly
// one electron flip at a uniformly random time, evaluated with the absolute
// transition frequencies. Returns |phase| samples.
std::vector<double> single_flip_phase_errors(const RegisterParams& p, double tau,
                                             int samples, std::uint64_t seed);

} // namespace nvmem
