#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nvmem/linalg.hpp"
#include "nvmem/params.hpp"
#include "nvmem/state.hpp"

namespace nvmem {

// Static Hamiltonian of the register in Hz:
//   H = D Sz^2 - gamma_e B Sz + A_par Sz Iz + A_perp (Sx Ix + Sy Iy) + gamma_n B Iz.
// The field is oriented antiparallel to the z axis of the register frame, so
// the driven mS=+1 manifold sits on the lower Zeeman branch.
Matrix6c build_hamiltonian(const RegisterParams& p);

struct Eigensystem {
  Vector6d values;           // ascending, Hz
  Matrix6c vectors;          // columns, orthonormal
  std::array<int, 6> label;  // product-basis index -> eigenvector column
  std::array<int, 6> product_of;  // eigenvector column -> product-basis index

  int column_of(Level l) const { return label[level_index(l)]; }
  double energy_of(Level l) const { return values(column_of(l)); }
};

// Diagonalize a Hermitian 6x6 Hamiltonian and label each eigenvector by the
// product state it overlaps most strongly (ties resolved toward lower index).
// Throws std::invalid_argument on non-Hermitian input.
Eigensystem eigensystem(const Matrix6c& h);

// Populations over the labeled eigenstates (the stationary levels the laser
// pumps and the readout distinguishes).
double level_population(const QuantumState& s, const Eigensystem& es, Level l);
// Total population of the labeled mS=0 (bright) pair.
double bright_population(const QuantumState& s, const Eigensystem& es);

// Statistical mixture of labeled eigenstates; weights need not be normalized
// beyond summing to one.
QuantumState eigenstate_mixture(const Eigensystem& es,
                                const std::vector<std::pair<Level, double>>& weights);

enum class TransitionLabel { MW1, MW2, RF1, RF2 };

std::string to_string(TransitionLabel l);

// A driven two-level subspace, identified by eigenvector columns.
struct Transition {
  TransitionLabel label;
  int lower = 0;  // eigenvector column of the lower-energy state
  int upper = 0;
  double frequency = 0.0;  // Hz
};

struct Transitions {
  Transition mw1;  // |0,dn> <-> |1,dn>
  Transition mw2;  // |0,up> <-> |1,up>
  Transition rf1;  // |1,dn> <-> |1,up>
  Transition rf2;  // |0,dn> <-> |0,up>

  const Transition& by_label(TransitionLabel l) const;
};

Transitions find_transitions(const Eigensystem& es);

// Closed-form estimate of the hyperfine enhancement of the nuclear Rabi
// frequency: (gamma_e/gamma_n) (A_perp/D) (3|mS|-2). Negative for mS=0.
double enhancement_factor_analytic(const RegisterParams& p, int ms);

// Ratio of the eigenbasis matrix element of the drive operator
// gamma_e Sx + gamma_n Ix (per unit field) to the bare matrix element of the
// same product-basis pair. Throws if eigenlevels are too close to identify
// the transition.
double enhancement_factor_numeric(const RegisterParams& p, const Eigensystem& es,
                                  const Transition& t);
// Convenience overload for RF1 at the given parameters.
double enhancement_factor_numeric(const RegisterParams& p);

// Instantaneous selective rotation on the transition subspace. The phase
// convention is fixed so that a pi/2 pulse from the lower state produces
// <upper| rho |lower> with argument phi.
QuantumState apply_ideal_pulse(const QuantumState& s, const Eigensystem& es,
                               const Transition& t, double angle, double phase = 0.0);

struct Frame {
  bool rotating = false;
  int upper = 0;               // eigenvector column carrying the frame phase
  double reference_freq = 0.0; // Hz

  static Frame lab() { return {}; }
  // Frame rotating at the transition frequency plus a programmed detuning;
  // the transition coherence then precesses at -detuning.
  static Frame rotating_at(const Transition& t, double detuning = 0.0) {
    return {true, t.upper, t.frequency + detuning};
  }
};

// Free evolution under the static Hamiltonian for duration >= 0 seconds.
// When t2star_n > 0, nuclear coherences (within each mS manifold) decay with
// an exponential envelope exp(-duration/t2star_n).
QuantumState evolve_free(const QuantumState& s, const Eigensystem& es, double duration,
                         const Frame& frame = Frame::lab(), double t2star_n = 0.0);

struct DrivenResult {
  QuantumState state;
  bool selectivity_warning = false;  // drive bandwidth exceeds neighbor splitting
  double effective_rabi = 0.0;       // Hz, bare rabi times enhancement
};

// Resonant (or detuned) drive on one transition in the rotating-wave
// approximation. `bare_rabi` is the Rabi frequency the same field would give
// an uncoupled spin; the subspace is driven at bare_rabi times the transition
// enhancement. Spectator levels evolve freely. Populations are exact;
// coherence phases are reported in the interaction picture of the drive.
DrivenResult evolve_driven(const QuantumState& s, const RegisterParams& p,
                           const Eigensystem& es, const Transition& t,
                           double bare_rabi, double phase, double duration,
                           double detuning = 0.0);

// Brute-force lab-frame propagation under the full cosine drive
//   H(t) = H0 + b1 cos(2 pi f t + phase) (gamma_e Sx + gamma_n Ix),
// fixed midpoint-exponential steps with dt <= 1/(50 max_frequency).
// Exists to validate the RWA path and the enhancement factor.
QuantumState integrate_cosine_drive(const QuantumState& s, const RegisterParams& p,
                                    double b1, double freq, double phase,
                                    double duration);

} // namespace nvmem
