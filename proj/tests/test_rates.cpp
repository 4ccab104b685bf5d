#include <doctest.h>

#include <cmath>

#include "nvmem/rates.hpp"
#include "nvmem/linalg.hpp"
#include "oracles.hpp"

using namespace nvmem;

TEST_SUITE("rates") {

TEST_CASE("rate matrix entries and probability conservation") {
  SUBCASE("all-zero rates give the zero matrix") {
    const Eigen::Matrix4d m = rate_matrix(RateParams{});
    CHECK(m.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("nominal rates populate the expected entries") {
    const RateParams r = nominal_rates();
    const Eigen::Matrix4d m = rate_matrix(r);
    CHECK(m(0, 2) == doctest::Approx(1.0 / 0.17e-6));   // alpha
    CHECK(m(0, 3) == doctest::Approx(1.0 / 0.92e-6));   // beta
    CHECK(m(1, 0) == doctest::Approx(1.0 / 1.6e-6));    // gamma
    CHECK(m(2, 2) == doctest::Approx(-(r.alpha + r.beta)));
    CHECK(m(3, 3) == doctest::Approx(-(r.alpha + r.beta)));
    for (int c = 0; c < 4; ++c) CHECK(m.col(c).sum() == doctest::Approx(0.0));
  }
  SUBCASE("the propagator is column-stochastic") {
    const Eigen::Matrix4d m = rate_matrix(nominal_rates());
    for (double t : {0.1e-6, 1.0e-6, 10.0e-6}) {
      const Eigen::Matrix4d u = expm(m * t);
      for (int c = 0; c < 4; ++c) CHECK(u.col(c).sum() == doctest::Approx(1.0).epsilon(1e-10));
      CHECK(u.minCoeff() >= -1e-12);
    }
  }
}

TEST_CASE("closed-form populations") {
  const RateParams r = nominal_rates();
  SUBCASE("initial condition") {
    const Populations p0 = analytic_populations(r, 0.0);
    CHECK(p0.p(0) == doctest::Approx(0.5));
    CHECK(p0.p(1) == doctest::Approx(0.0));
    CHECK(p0.p(2) == doctest::Approx(0.5));
    CHECK(p0.p(3) == doctest::Approx(0.0));
  }
  SUBCASE("long-time equilibrium splits the bright manifold evenly") {
    const Populations eq = analytic_populations(r, 1.0);
    CHECK(eq.p(0) == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(eq.p(1) == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(eq.p(2) + eq.p(3) < 1e-6);
  }
  SUBCASE("the pumped population peaks near 0.76 after 0.30 us") {
    double best_t = 0.0, best_p = 0.0;
    for (double t = 0.0; t < 1.0e-6; t += 1.0e-10) {
      const double v = analytic_populations(r, t).p(0);
      if (v > best_p) {
        best_p = v;
        best_t = t;
      }
    }
    CHECK(best_p == doctest::Approx(0.759).epsilon(0.005 / 0.759));
    CHECK(best_t == doctest::Approx(0.300e-6).epsilon(0.01e-6 / 0.3e-6));
  }
  SUBCASE("negative time is rejected") {
    CHECK_THROWS_AS(analytic_populations(r, -1.0e-9), std::invalid_argument);
  }
}

TEST_CASE("matrix-exponential propagation") {
  const RateParams r = nominal_rates();
  SUBCASE("zero time is the identity") {
    Populations p0;
    p0.p << 0.1, 0.2, 0.3, 0.4;
    const Populations p1 = propagate_rates(p0, r, 0.0);
    CHECK((p1.p - p0.p).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("a pure |1,up> population decays as a bare exponential") {
    Populations p0;
    p0.p << 0.0, 0.0, 1.0, 0.0;
    const double t = 0.92e-6;
    const Populations p1 = propagate_rates(p0, r, t);
    CHECK(p1.p(2) == doctest::Approx(std::exp(-(r.alpha + r.beta) * t)).epsilon(1e-9));
  }
  SUBCASE("agrees with the closed form for the swap initial condition") {
    for (double t : {0.05e-6, 0.3e-6, 1.0e-6, 5.0e-6}) {
      const Populations a = analytic_populations(r, t);
      const Populations b = propagate_rates(Populations::swapped(), r, t);
      CHECK((a.p - b.p).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("analytic, matrix exponential and RK4 agree on random points") {
  oracle::TestRng rng(2024);
  int degenerate_cases = 0;
  for (int trial = 0; trial < 20; ++trial) {
    RateParams r;
    if (trial % 5 == 4) {
      // Degenerate branch: alpha + beta = 2 gamma.
      r.alpha = rng.uniform(0.5e6, 8.0e6);
      r.beta = rng.uniform(0.2e6, 4.0e6);
      r.gamma = 0.5 * (r.alpha + r.beta);
      ++degenerate_cases;
    } else {
      r.alpha = rng.uniform(0.2e6, 8.0e6);
      r.beta = rng.uniform(0.2e6, 8.0e6);
      r.gamma = rng.uniform(0.1e6, 4.0e6);
    }
    const double t = rng.uniform(0.01e-6, 4.0e-6);

    const Populations closed = analytic_populations(r, t);
    const Populations via_expm = propagate_rates(Populations::swapped(), r, t);
    const Eigen::Vector4d via_rk4 =
        oracle::rk4_rates(rate_matrix(r), Populations::swapped().p, t, 4000);

    CHECK((closed.p - via_expm.p).cwiseAbs().maxCoeff() < 1e-7);
    CHECK((closed.p - via_rk4).cwiseAbs().maxCoeff() < 1e-7);
    CHECK(closed.sum() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(closed.p.minCoeff() >= -1e-12);
  }
  CHECK(degenerate_cases == 4);
}

TEST_CASE("exact degeneracy matches the matrix exponential") {
  RateParams r;
  r.alpha = 3.0e6;
  r.beta = 1.0e6;
  r.gamma = 2.0e6;  // alpha + beta = 2 gamma exactly
  for (double t : {0.1e-6, 0.5e-6, 2.0e-6}) {
    const Populations closed = analytic_populations(r, t);
    const Populations via_expm = propagate_rates(Populations::swapped(), r, t);
    CHECK((closed.p - via_expm.p).cwiseAbs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("divided difference is smooth through the degeneracy") {
  const double t = 0.7e-6;
  const double base = exp_divided_difference(4.0e6, 4.0e6, t);
  CHECK(base == doctest::Approx(-t * std::exp(-4.0e6 * t)).epsilon(1e-12));
  // approaching from both sides
  CHECK(exp_divided_difference(4.0e6 + 1e-3, 4.0e6, t) == doctest::Approx(base).epsilon(1e-9));
  CHECK(exp_divided_difference(4.0e6 - 1e-3, 4.0e6, t) == doctest::Approx(base).epsilon(1e-9));
}

} // TEST_SUITE
