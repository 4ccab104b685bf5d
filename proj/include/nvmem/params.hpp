#pragma once

#include <stdexcept>

namespace nvmem {

// Physical constants and relaxation times of the electron + 13C register.
// Frequencies in Hz, fields in T, times in s.
struct RegisterParams {
  double zero_field_splitting = 2.870e9;  // D
  double b_field = 6.5e-3;                // 65 G along the NV axis
  double gamma_e = 28.03e9;               // electron gyromagnetic ratio, Hz/T
  double gamma_n = 10.705e6;              // 13C gyromagnetic ratio, Hz/T
  double a_par = 0.0;                     // secular hyperfine coupling
  double a_perp = 127.0e6;                // nonsecular hyperfine coupling
  double t1e = 3.3e-3;                    // electron longitudinal relaxation
  double t2star_e = 1.0e-6;               // electron inhomogeneous dephasing
  double t2star_n = 50.0e-6;              // nuclear inhomogeneous dephasing
  double t2c_pure = 33.0e-3;              // pure nuclear dephasing

  void validate() const;
};

// Defaults with a_par calibrated so that the nuclear doublet splitting in the
// driven mS=+1 manifold comes out at 127.2 MHz. The calibration is a secant
// root find on the exact eigen-splitting; see calibrate_a_par().
const RegisterParams& default_params();

// Solve for the secular hyperfine coupling that places the mS=+1 nuclear
// splitting at target_rf1, holding every other parameter fixed.
double calibrate_a_par(RegisterParams p, double target_rf1);

// Laser pumping rates of the four-level model, all in 1/s.
struct RateParams {
  double alpha = 0.0;  // nuclear-spin-conserving pumping
  double beta = 0.0;   // nuclear-spin-flipping pumping
  double gamma = 0.0;  // ground-state depolarization

  void validate() const;
};

// Rates for the nominal green-laser power, from fits to pumping curves:
// 1/alpha = 0.17 us, 1/beta = 0.92 us, 1/gamma = 1.6 us.
RateParams nominal_rates();

struct DecayParams {
  double t1e = 3.3e-3;
  double t2c_pure = 33.0e-3;

  void validate() const;
};

} // namespace nvmem
