#pragma once

#include <cstdint>
#include <vector>

#include "nvmem/params.hpp"
#include "nvmem/rates.hpp"
#include "nvmem/spin_core.hpp"
#include "nvmem/state.hpp"

namespace nvmem {

// Green-laser pumping applied to the register state. Populations of the
// labeled eigenstates follow the rate model; mS=-1 populations are pumped
// into mS=0 with the same alpha/beta rates so the six-level state stays
// consistent. All coherences are destroyed for durations above
// coherence_threshold (default: any positive duration).
QuantumState apply_laser(const QuantumState& s, const Eigensystem& es,
                         const RateParams& r, double duration,
                         double coherence_threshold = 0.0);

// Amplitude envelope of the stored coherence, exp(-t (1/t2c_pure + 1/t1e)).
double storage_decay_envelope(const DecayParams& d, double t);

// Electron flip times in [0, horizon): a Poisson process at rate 1/t1e,
// deterministic for a fixed seed.
std::vector<double> sample_t1_flips(double t1e, double horizon, std::uint64_t seed);

// --- Two-frequency telegraph phase bookkeeping -------------------------------
//
// During storage the nuclear coherence precesses at one of two frequencies,
// selected by the electron manifold (1 or 0); refocusing pulses conjugate the
// accumulated phase only when they address the manifold the coherence
// currently occupies.

enum class PulseKind {
  invert_m1,  // pi pulse on the mS=1 nuclear transition
  invert_m0,  // effective pi pulse on the mS=0 nuclear transition
};

struct PhasePulse {
  double time = 0.0;
  PulseKind kind = PulseKind::invert_m1;
};

struct TelegraphResult {
  double phase = 0.0;  // accumulated phase, rad
  int manifold = 1;    // electron manifold at t_end
};

// Walk flips and pulses in time order (pulses first on ties) and integrate
// the phase at freq_m1 / freq_m0 depending on the current manifold.
TelegraphResult run_telegraph_trajectory(const std::vector<double>& flips,
                                         const std::vector<PhasePulse>& pulses,
                                         double freq_m1, double freq_m0,
                                         double t_end, int start_manifold = 1);

} // namespace nvmem
