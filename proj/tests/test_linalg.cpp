#include <doctest.h>

#include "nvmem/linalg.hpp"
#include "oracles.hpp"

using namespace nvmem;

TEST_SUITE("linalg") {

TEST_CASE("spin operators satisfy the angular momentum algebra") {
  const Matrix3c sx = spin1_sx(), sy = spin1_sy(), sz = spin1_sz();
  const Matrix3c comm = sx * sy - sy * sx;
  const Matrix3c expect = complexd(0, 1) * sz;
  CHECK((comm - expect).cwiseAbs().maxCoeff() < 1e-14);
  // Casimir S^2 = s(s+1) = 2 for spin 1.
  const Matrix3c s2 = sx * sx + sy * sy + sz * sz;
  CHECK((s2 - 2.0 * Matrix3c::Identity()).cwiseAbs().maxCoeff() < 1e-14);

  const Matrix2c ix = spin_half_ix(), iy = spin_half_iy(), iz = spin_half_iz();
  const Matrix2c comm2 = ix * iy - iy * ix;
  CHECK((comm2 - complexd(0, 1) * iz).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("kron ordering puts the electron index first") {
  Matrix3c a = Matrix3c::Zero();
  a(2, 2) = 1.0;  // |+1><+1|
  Matrix2c b = Matrix2c::Zero();
  b(1, 1) = 1.0;  // |dn><dn|
  const Matrix6c k = kron(a, b);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      CHECK(k(i, j) == (i == 5 && j == 5 ? complexd(1, 0) : complexd(0, 0)));
}

TEST_CASE("expm matches the diagonal closed form") {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 3);
  d(0, 0) = -2.0;
  d(1, 1) = 0.5;
  d(2, 2) = 3.0;
  const Eigen::MatrixXd e = expm(d);
  for (int i = 0; i < 3; ++i) CHECK(e(i, i) == doctest::Approx(std::exp(d(i, i))).epsilon(1e-13));
}

TEST_CASE("expm matches a truncated series on random contractions") {
  oracle::TestRng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd a(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) a(i, j) = rng.uniform(-0.2, 0.2);
    Eigen::MatrixXd series = Eigen::MatrixXd::Identity(4, 4);
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(4, 4);
    for (int k = 1; k <= 25; ++k) {
      term = term * a / k;
      series += term;
    }
    CHECK((expm(a) - series).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("expm respects the group law exp(A)exp(A) = exp(2A)") {
  oracle::TestRng rng(7);
  Eigen::MatrixXd a(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) a(i, j) = rng.uniform(-2.0, 2.0);
  const Eigen::MatrixXd once = expm(a);
  CHECK((once * once - expm(2.0 * a)).cwiseAbs().maxCoeff() <
        1e-10 * expm(2.0 * a).cwiseAbs().maxCoeff());
}

} // TEST_SUITE
