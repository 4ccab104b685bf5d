#pragma once

#include <Eigen/Dense>

#include "nvmem/params.hpp"

namespace nvmem {

// Populations of the four optically pumped levels, ordered
// (P_|0,up>, P_|0,dn>, P_|1,up>, P_|1,dn>).
struct Populations {
  Eigen::Vector4d p = Eigen::Vector4d::Zero();

  double sum() const { return p.sum(); }
  // Entries >= -1e-12 and sum within 1e-12 of 1.
  bool is_valid(double tol = 1e-12) const;

  // State after one ideal swap from the electron-polarized state:
  // nuclear spin fully up, electron depolarized.
  static Populations swapped() { return {{0.5, 0.0, 0.5, 0.0}}; }
};

// Transition matrix M of dP/dt = M P in the ordering above. Columns sum to
// zero: alpha pumps |1,s> -> |0,s>, beta pumps |1,s> -> |0,-s>, gamma mixes
// the two mS=0 levels.
Eigen::Matrix4d rate_matrix(const RateParams& r);

// Closed-form populations at time t for the initial condition swapped().
// The degenerate case alpha+beta = 2 gamma is handled by a stable
// divided-difference evaluation, so the expression is smooth across it.
Populations analytic_populations(const RateParams& r, double t);

// General initial condition via the matrix exponential exp(M t) p0.
Populations propagate_rates(const Populations& p0, const RateParams& r, double t);

// Stable evaluation of (exp(-x t) - exp(-y t)) / (x - y), the divided
// difference that appears in the closed-form solution.
double exp_divided_difference(double x, double y, double t);

} // namespace nvmem
