#pragma once

#include <complex>
#include <Eigen/Dense>

namespace nvmem {

using complexd = std::complex<double>;
using Matrix6c = Eigen::Matrix<complexd, 6, 6>;
using Vector6c = Eigen::Matrix<complexd, 6, 1>;
using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix3c = Eigen::Matrix<complexd, 3, 3>;
using Matrix2c = Eigen::Matrix<complexd, 2, 2>;

inline constexpr double two_pi = 6.283185307179586476925286766559;

// Spin-1 operators in the basis (mS = -1, 0, +1), dimensionless.
Matrix3c spin1_sz();
Matrix3c spin1_sx();
Matrix3c spin1_sy();

// Spin-1/2 operators in the basis (up, down), dimensionless.
Matrix2c spin_half_iz();
Matrix2c spin_half_ix();
Matrix2c spin_half_iy();

// Kronecker product, electron factor first: index = 2*mS_index + nuclear_index.
Matrix6c kron(const Matrix3c& a, const Matrix2c& b);

// Max-norm distance from Hermiticity, ||A - A^dagger||_inf.
double hermiticity_defect(const Matrix6c& a);

// Matrix exponential of a small dense real matrix, scaling-and-squaring
// with a diagonal Pade(6,6) approximant.
Eigen::MatrixXd expm(const Eigen::MatrixXd& a);

} // namespace nvmem
