#pragma once

#include "nvmem/linalg.hpp"

namespace nvmem {

// Product-basis levels, ordered |mS,nuc> with nuclear up before down.
enum class Level : int {
  m_minus1_up = 0,
  m_minus1_dn = 1,
  m0_up = 2,
  m0_dn = 3,
  m1_up = 4,
  m1_dn = 5,
};

inline constexpr int level_index(Level l) { return static_cast<int>(l); }

// mS quantum number of a product-basis index (-1, 0, +1).
inline constexpr int ms_of(int index) { return index / 2 - 1; }
// true if the nuclear spin of a product-basis index is up.
inline constexpr bool nuclear_up(int index) { return index % 2 == 0; }

// Density matrix of the six-level register.
struct QuantumState {
  Matrix6c rho = Matrix6c::Zero();

  static QuantumState pure(Level l);
  // mS=0 with a fully depolarized nuclear spin (post long-laser state).
  static QuantumState electron_polarized();

  // Product-basis diagonal; see level_population() for the labeled
  // eigenstate populations the experiments read out.
  double population(Level l) const { return rho(level_index(l), level_index(l)).real(); }
  double trace() const { return rho.trace().real(); }
  double purity() const { return (rho * rho).trace().real(); }

  // Hermitian to 1e-12, unit trace to 1e-12, eigenvalues >= -1e-10.
  bool is_physical(double herm_tol = 1e-12, double trace_tol = 1e-12,
                   double eig_tol = 1e-10) const;

  // Scale every off-diagonal element by f in [0,1]. Completely positive
  // (Schur product with a PSD correlation matrix); used for lumped pulse
  // error budgets.
  void attenuate_coherences(double f);
};

} // namespace nvmem
