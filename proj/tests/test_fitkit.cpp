#include <doctest.h>

#include <cmath>

#include "nvmem/fitkit.hpp"
#include "nvmem/rates.hpp"
#include "nvmem/rng.hpp"
#include "oracles.hpp"

using namespace nvmem;

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = a + (b - a) * i / (n - 1.0);
  return out;
}

void check_jacobian_fd(const FitModel& model, const Eigen::VectorXd& p) {
  const Eigen::MatrixXd j = model.jacobian(p);
  for (int k = 0; k < p.size(); ++k) {
    const double h = std::max(1e-7 * std::abs(p(k)), 1e-10);
    Eigen::VectorXd plus = p, minus = p;
    plus(k) += h;
    minus(k) -= h;
    const Eigen::VectorXd fd = (model.residuals(plus) - model.residuals(minus)) / (2 * h);
    const double scale = std::max(1.0, j.col(k).cwiseAbs().maxCoeff());
    CHECK((j.col(k) - fd).cwiseAbs().maxCoeff() / scale < 1e-4);
  }
}

} // namespace

TEST_SUITE("fitkit") {

TEST_CASE("cosine fit recovers exact model parameters") {
  const auto x = linspace(0, 1.0e-6, 120);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    y[i] = 0.5 + 0.5 * std::cos(6.283185307179586 * 4.3e6 * x[i] + 0.8);
  const FitResult fit = fit_cosine(x, y);
  REQUIRE(fit.converged);
  CHECK(fit.param("frequency") == doctest::Approx(4.3e6).epsilon(1e-6));
  CHECK(fit.param("amplitude") == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(fit.param("phase") == doctest::Approx(0.8).epsilon(1e-5));
  CHECK(fit.param("offset") == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(fit.residual < 1e-12);
}

TEST_CASE("cosine fit tolerates gaussian noise") {
  const auto x = linspace(0, 1.0e-6, 100);
  std::mt19937_64 rng(7);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    y[i] = 0.5 + 0.5 * std::cos(6.283185307179586 * 4.3e6 * x[i]) +
           0.05 * standard_normal(rng);
  const FitResult fit = fit_cosine(x, y);
  REQUIRE(fit.converged);
  CHECK(std::abs(fit.param("frequency") - 4.3e6) / 4.3e6 < 0.01);
  CHECK(fit.std_errors(1) > 0.0);
}

TEST_CASE("constant data is flagged as non-converged") {
  const auto x = linspace(0, 1.0e-6, 50);
  const std::vector<double> y(x.size(), 0.37);
  const FitResult fit = fit_cosine(x, y);
  CHECK_FALSE(fit.converged);
  CHECK(fit.param("amplitude") == doctest::Approx(0.0));
  CHECK(fit.param("offset") == doctest::Approx(0.37));
}

TEST_CASE("exponential fit") {
  SUBCASE("noiseless recovery") {
    const auto x = linspace(0, 12e-3, 60);
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::exp(-x[i] / 3.3e-3);
    const FitResult fit = fit_exponential(x, y);
    REQUIRE(fit.converged);
    CHECK(fit.param("time_constant") == doctest::Approx(3.3e-3).epsilon(1e-6));
    CHECK(fit.param("amplitude") == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(fit.param("offset")) < 1e-7);
  }
  SUBCASE("noisy synthetic echo decay lands near its generator") {
    const auto x = linspace(0.2e-3, 12e-3, 40);
    std::mt19937_64 rng(11);
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
      y[i] = std::exp(-x[i] / 4.1e-3) + 0.02 * standard_normal(rng);
    const FitResult fit = fit_exponential(x, y);
    REQUIRE(fit.converged);
    CHECK(std::abs(fit.param("time_constant") - 4.1e-3) / 4.1e-3 < 0.1);
  }
  SUBCASE("offset-only data is flagged") {
    const auto x = linspace(0, 1e-3, 20);
    const std::vector<double> y(x.size(), 0.5);
    CHECK_FALSE(fit_exponential(x, y).converged);
  }
}

TEST_CASE("damped cosine recovers the envelope time") {
  const auto x = linspace(0, 120e-6, 400);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    y[i] = 0.5 + 0.4 * std::exp(-x[i] / 50e-6) *
                     std::cos(6.283185307179586 * 150e3 * x[i] + 0.3);
  const FitResult fit = fit_damped_cosine(x, y);
  REQUIRE(fit.converged);
  CHECK(fit.param("damping_time") == doctest::Approx(50e-6).epsilon(1e-4));
  CHECK(fit.param("frequency") == doctest::Approx(150e3).epsilon(1e-6));
}

TEST_CASE("rate parameter recovery") {
  const RateParams truth = nominal_rates();
  // Dense early sampling so the fast alpha+beta decay is well constrained.
  std::vector<double> t = linspace(0.0, 0.4e-6, 81);
  for (double v : linspace(0.42e-6, 3.0e-6, 80)) t.push_back(v);
  std::vector<double> total(t.size()), up(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const Populations p = analytic_populations(truth, t[i]);
    total[i] = p.p(0) + p.p(1);
    up[i] = p.p(0);
  }

  SUBCASE("noiseless data reproduces the generator to 1e-5") {
    const FitResult fit = fit_rate_params(t, total, up);
    REQUIRE(fit.converged);
    CHECK(std::abs(fit.param("alpha") - truth.alpha) / truth.alpha < 1e-5);
    CHECK(std::abs(fit.param("beta") - truth.beta) / truth.beta < 1e-5);
    CHECK(std::abs(fit.param("gamma") - truth.gamma) / truth.gamma < 1e-5);
  }
  SUBCASE("one percent noise keeps the recovery within two percent") {
    std::mt19937_64 rng(3);
    std::vector<double> total_n = total, up_n = up;
    for (std::size_t i = 0; i < t.size(); ++i) {
      total_n[i] += 0.01 * standard_normal(rng);
      up_n[i] += 0.01 * standard_normal(rng);
    }
    const FitResult fit = fit_rate_params(t, total_n, up_n);
    REQUIRE(fit.converged);
    CHECK(std::abs(fit.param("alpha") - truth.alpha) / truth.alpha < 0.02);
    CHECK(std::abs(fit.param("beta") - truth.beta) / truth.beta < 0.02);
    CHECK(std::abs(fit.param("gamma") - truth.gamma) / truth.gamma < 0.02);
  }
  SUBCASE("the degenerate symmetric case recovers its identifiable content") {
    // With alpha = beta = gamma the up-curve is flat at one half, so the data
    // determine only alpha+beta and alpha-gamma; any split of alpha+beta with
    // alpha = gamma reproduces the curves exactly.
    RateParams deg;
    deg.alpha = deg.beta = deg.gamma = 2.0e6;
    std::vector<double> total_d(t.size()), up_d(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
      const Populations p = analytic_populations(deg, t[i]);
      total_d[i] = p.p(0) + p.p(1);
      up_d[i] = p.p(0);
    }
    const FitResult fit = fit_rate_params(t, total_d, up_d);
    REQUIRE(fit.converged);
    const double ab = fit.param("alpha") + fit.param("beta");
    CHECK(std::abs(ab - 4.0e6) / 4.0e6 < 1e-4);
    CHECK(std::abs(fit.param("alpha") - fit.param("gamma")) / 2.0e6 < 1e-4);
    CHECK(fit.residual < 1e-10);
    // With an informed start the generator itself is reproduced.
    const FitResult pinned = fit_rate_params(t, total_d, up_d, &deg);
    REQUIRE(pinned.converged);
    CHECK(std::abs(pinned.param("alpha") - deg.alpha) / deg.alpha < 1e-4);
    CHECK(std::abs(pinned.param("beta") - deg.beta) / deg.beta < 1e-4);
    CHECK(std::abs(pinned.param("gamma") - deg.gamma) / deg.gamma < 1e-4);
  }
  SUBCASE("flat curves are flagged as non-identifiable") {
    const std::vector<double> flat(t.size(), 0.75);
    const std::vector<double> flat2(t.size(), 0.5);
    CHECK_FALSE(fit_rate_params(t, flat, flat2).converged);
  }
}

TEST_CASE("analytic Jacobians match central finite differences") {
  oracle::TestRng rng(31);
  const auto x = linspace(0, 2.0e-6, 40);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    y[i] = 0.4 + 0.3 * std::cos(6.283185307179586 * 2.1e6 * x[i] + 0.4);

  SUBCASE("cosine model") {
    const FitModel model = cosine_fit_model(x, y);
    for (int k = 0; k < 10; ++k) {
      Eigen::VectorXd p(4);
      p << rng.uniform(0.1, 0.8), rng.uniform(0.5e6, 8e6), rng.uniform(-3, 3),
          rng.uniform(-0.5, 0.5);
      check_jacobian_fd(model, p);
    }
  }
  SUBCASE("exponential model") {
    const FitModel model = exponential_fit_model(x, y);
    for (int k = 0; k < 10; ++k) {
      Eigen::VectorXd p(3);
      p << rng.uniform(0.2, 1.5), rng.uniform(0.2e-6, 4e-6), rng.uniform(-0.5, 0.5);
      check_jacobian_fd(model, p);
    }
  }
  SUBCASE("damped cosine model") {
    const FitModel model = damped_cosine_fit_model(x, y);
    for (int k = 0; k < 10; ++k) {
      Eigen::VectorXd p(5);
      p << rng.uniform(0.1, 0.8), rng.uniform(0.5e6, 8e6), rng.uniform(-3, 3),
          rng.uniform(0.2e-6, 4e-6), rng.uniform(-0.5, 0.5);
      check_jacobian_fd(model, p);
    }
  }
  SUBCASE("rates model, including near the degenerate branch") {
    const auto t = linspace(0, 3e-6, 30);
    std::vector<double> total(t.size()), up(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
      const Populations p = analytic_populations(nominal_rates(), t[i]);
      total[i] = p.p(0) + p.p(1);
      up[i] = p.p(0);
    }
    const FitModel model = rates_fit_model(t, total, up);
    for (int k = 0; k < 10; ++k) {
      Eigen::VectorXd p(3);
      p << rng.uniform(1e6, 8e6), rng.uniform(0.5e6, 4e6), rng.uniform(0.3e6, 3e6);
      if (k >= 8) p(2) = 0.5 * (p(0) + p(1)) * (1.0 + 1e-9);  // near-degenerate
      check_jacobian_fd(model, p);
    }
  }
}

TEST_CASE("fits are deterministic given data and start") {
  const auto x = linspace(0, 1.0e-6, 64);
  std::mt19937_64 rng(5);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    y[i] = 0.5 + 0.5 * std::cos(6.283185307179586 * 3.0e6 * x[i]) +
           0.02 * standard_normal(rng);
  const FitResult a = fit_cosine(x, y);
  const FitResult b = fit_cosine(x, y);
  CHECK(a.parameters == b.parameters);
  CHECK(a.iterations == b.iterations);
}

} // TEST_SUITE
