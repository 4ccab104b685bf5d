#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nvmem/params.hpp"

namespace nvmem {

struct FitResult {
  std::vector<std::string> names;
  std::vector<std::string> units;
  Eigen::VectorXd parameters;
  Eigen::VectorXd std_errors;  // from the Jacobian at the optimum
  double residual = 0.0;       // sum of squared residuals
  bool converged = false;
  int iterations = 0;

  double param(const std::string& name) const;
};

// Residuals r(p) and Jacobian dr/dp for a stacked data vector.
struct FitModel {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> residuals;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian;
  Eigen::VectorXd lower_bounds;  // enforced by projection
  Eigen::VectorXd upper_bounds;
};

struct LmOptions {
  int max_iterations = 200;
  double gradient_tol = 1e-12;  // on |J^T r| relative to 1 + residual
  double step_tol = 1e-14;
};

// Damped Gauss-Newton with a Levenberg-Marquardt damping schedule.
// Residuals decrease across accepted iterations; on non-convergence the best
// point found is returned with converged=false.
FitResult lm_fit(const FitModel& model, Eigen::VectorXd initial,
                 const LmOptions& options = {});

// Model builders behind the named fits; exposed so the analytic Jacobians
// can be checked against finite differences. The vectors must outlive the
// returned model.
FitModel cosine_fit_model(const std::vector<double>& x, const std::vector<double>& y);
FitModel exponential_fit_model(const std::vector<double>& x, const std::vector<double>& y);
FitModel damped_cosine_fit_model(const std::vector<double>& x,
                                 const std::vector<double>& y);
FitModel rates_fit_model(const std::vector<double>& durations,
                         const std::vector<double>& p_total_ms0,
                         const std::vector<double>& p_up);

// y = offset + amplitude cos(2 pi frequency x + phase).
// Initial frequency defaults to the peak of a zero-padded DFT scan.
FitResult fit_cosine(const std::vector<double>& x, const std::vector<double>& y,
                     const Eigen::VectorXd* initial_guess = nullptr);

// y = offset + amplitude exp(-x / time_constant), time_constant > 0.
FitResult fit_exponential(const std::vector<double>& x, const std::vector<double>& y);

// y = offset + amplitude exp(-x / damping_time) cos(2 pi frequency x + phase).
FitResult fit_damped_cosine(const std::vector<double>& x, const std::vector<double>& y);

// Joint fit of the two pumping tomography curves against the closed-form
// rate solution: total mS=0 population and P_|0,up>, both on the common
// duration grid. Recovers (alpha, beta, gamma).
FitResult fit_rate_params(const std::vector<double>& durations,
                          const std::vector<double>& p_total_ms0,
                          const std::vector<double>& p_up,
                          const RateParams* initial_guess = nullptr);

} // namespace nvmem
