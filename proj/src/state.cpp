#include "nvmem/state.hpp"

#include <Eigen/Eigenvalues>

namespace nvmem {

QuantumState QuantumState::pure(Level l) {
  QuantumState s;
  s.rho(level_index(l), level_index(l)) = 1.0;
  return s;
}

QuantumState QuantumState::electron_polarized() {
  QuantumState s;
  s.rho(2, 2) = 0.5;
  s.rho(3, 3) = 0.5;
  return s;
}

bool QuantumState::is_physical(double herm_tol, double trace_tol, double eig_tol) const {
  if (hermiticity_defect(rho) > herm_tol) return false;
  if (std::abs(trace() - 1.0) > trace_tol) return false;
  Eigen::SelfAdjointEigenSolver<Matrix6c> solver(rho, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff() >= -eig_tol;
}

void QuantumState::attenuate_coherences(double f) {
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      if (i != j) rho(i, j) *= f;
}

} // namespace nvmem
