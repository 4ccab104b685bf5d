#include "nvmem/linalg.hpp"

#include <cmath>
#include <numbers>

namespace nvmem {

namespace {
const complexd iu(0.0, 1.0);
const double s2 = std::numbers::sqrt2_v<double>;
} // namespace

Matrix3c spin1_sz() {
  Matrix3c m = Matrix3c::Zero();
  m(0, 0) = -1.0;
  m(2, 2) = 1.0;
  return m;
}

Matrix3c spin1_sx() {
  Matrix3c m = Matrix3c::Zero();
  m(0, 1) = m(1, 0) = m(1, 2) = m(2, 1) = 1.0 / s2;
  return m;
}

Matrix3c spin1_sy() {
  Matrix3c m = Matrix3c::Zero();
  m(0, 1) = iu / s2;
  m(1, 0) = -iu / s2;
  m(1, 2) = iu / s2;
  m(2, 1) = -iu / s2;
  return m;
}

Matrix2c spin_half_iz() {
  Matrix2c m = Matrix2c::Zero();
  m(0, 0) = 0.5;
  m(1, 1) = -0.5;
  return m;
}

Matrix2c spin_half_ix() {
  Matrix2c m = Matrix2c::Zero();
  m(0, 1) = m(1, 0) = 0.5;
  return m;
}

Matrix2c spin_half_iy() {
  Matrix2c m = Matrix2c::Zero();
  m(0, 1) = -0.5 * iu;
  m(1, 0) = 0.5 * iu;
  return m;
}

Matrix6c kron(const Matrix3c& a, const Matrix2c& b) {
  Matrix6c out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          out(2 * i + k, 2 * j + l) = a(i, j) * b(k, l);
  return out;
}

double hermiticity_defect(const Matrix6c& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

Eigen::MatrixXd expm(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);

  // Scale so the Pade approximant stays in its accuracy region.
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) {
    squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / 0.5))));
  }
  const Eigen::MatrixXd as = a / std::ldexp(1.0, squarings);

  // Diagonal Pade(6,6): exp(x) ~ q(-x)^-1 q(x), q(x) = sum c_k x^k.
  static const double c[7] = {1.0,       1.0 / 2.0,  5.0 / 44.0, 1.0 / 66.0,
                              1.0 / 792.0, 1.0 / 15840.0, 1.0 / 665280.0};
  const Eigen::MatrixXd a2 = as * as;
  const Eigen::MatrixXd a4 = a2 * a2;
  const Eigen::MatrixXd a6 = a4 * a2;
  const Eigen::MatrixXd even = c[0] * id + c[2] * a2 + c[4] * a4 + c[6] * a6;
  const Eigen::MatrixXd odd = as * (c[1] * id + c[3] * a2 + c[5] * a4);

  Eigen::MatrixXd result =
      (even - odd).partialPivLu().solve(even + odd);
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

} // namespace nvmem
