#include "nvmem/fitkit.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "nvmem/linalg.hpp"
#include "nvmem/rates.hpp"

namespace nvmem {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd project(const FitModel& m, Eigen::VectorXd p) {
  for (int i = 0; i < p.size(); ++i) {
    if (m.lower_bounds.size() > i) p(i) = std::max(p(i), m.lower_bounds(i));
    if (m.upper_bounds.size() > i) p(i) = std::min(p(i), m.upper_bounds(i));
  }
  return p;
}

double standard_deviation(const std::vector<double>& y) {
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / y.size());
}

} // namespace

double FitResult::param(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return parameters(static_cast<int>(i));
  throw std::invalid_argument("unknown fit parameter: " + name);
}

FitResult lm_fit(const FitModel& model, Eigen::VectorXd initial, const LmOptions& opt) {
  FitResult out;
  Eigen::VectorXd p = project(model, std::move(initial));
  Eigen::VectorXd r = model.residuals(p);
  double cost = r.squaredNorm();
  double lambda = 1e-3;

  // Scale-invariant gradient test: weight each component by the parameter
  // magnitude so MHz-scale parameters converge as tightly as order-one ones.
  auto scaled_gradient = [&](const Eigen::VectorXd& g, const Eigen::VectorXd& at) {
    double worst = 0.0;
    for (int i = 0; i < g.size(); ++i)
      worst = std::max(worst, std::abs(g(i)) * std::max(std::abs(at(i)), 1.0));
    return worst;
  };

  for (int it = 0; it < opt.max_iterations; ++it) {
    out.iterations = it + 1;
    const Eigen::MatrixXd j = model.jacobian(p);
    const Eigen::VectorXd g = j.transpose() * r;
    if (scaled_gradient(g, p) < opt.gradient_tol * (1.0 + cost)) {
      out.converged = true;
      break;
    }

    Eigen::MatrixXd jtj = j.transpose() * j;
    Eigen::VectorXd diag = jtj.diagonal().cwiseMax(1e-12);
    bool accepted = false;
    for (int tries = 0; tries < 40; ++tries) {
      Eigen::MatrixXd damped = jtj;
      damped.diagonal() += lambda * diag;
      const Eigen::VectorXd step = damped.ldlt().solve(-g);
      const Eigen::VectorXd p_new = project(model, p + step);
      const Eigen::VectorXd r_new = model.residuals(p_new);
      const double cost_new = r_new.squaredNorm();
      if (cost_new < cost) {
        if ((p_new - p).lpNorm<Eigen::Infinity>() <
            opt.step_tol * (1.0 + p.lpNorm<Eigen::Infinity>())) {
          out.converged = true;
        }
        p = p_new;
        r = r_new;
        cost = cost_new;
        lambda = std::max(lambda * 0.2, 1e-14);
        accepted = true;
        break;
      }
      lambda *= 8.0;
      if (lambda > 1e14) break;
    }
    if (!accepted) {
      // Could not decrease the residual: either at the optimum or stuck.
      const Eigen::VectorXd g2 = model.jacobian(p).transpose() * r;
      out.converged = g2.lpNorm<Eigen::Infinity>() < 1e-6 * (1.0 + cost);
      break;
    }
    if (out.converged) break;
  }

  out.parameters = p;
  out.residual = cost;

  // Standard errors from the Jacobian at the optimum.
  const Eigen::MatrixXd j = model.jacobian(p);
  const int n = static_cast<int>(r.size());
  const int k = static_cast<int>(p.size());
  out.std_errors = Eigen::VectorXd::Zero(k);
  if (n > k) {
    const double sigma2 = cost / static_cast<double>(n - k);
    Eigen::MatrixXd jtj = j.transpose() * j;
    jtj.diagonal() += Eigen::VectorXd::Constant(k, 1e-300);
    const Eigen::MatrixXd cov = sigma2 * jtj.inverse();
    for (int i = 0; i < k; ++i)
      out.std_errors(i) = std::sqrt(std::max(0.0, cov(i, i)));
  }
  return out;
}

// --- cosine -----------------------------------------------------------------

namespace {

// Peak of a zero-padded DFT scan over (0, nyquist]; returns {freq, amp, phase}.
std::array<double, 3> spectral_guess(const std::vector<double>& x,
                                     const std::vector<double>& y) {
  const std::size_t n = x.size();
  double dx_min = kInf;
  for (std::size_t i = 1; i < n; ++i) dx_min = std::min(dx_min, x[i] - x[i - 1]);
  const double nyquist = 0.5 / std::max(dx_min, 1e-300);
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;

  const int bins = static_cast<int>(4 * n);
  double best_power = -1.0, best_f = nyquist / 4;
  std::complex<double> best_c;
  for (int b = 1; b <= bins; ++b) {
    const double f = nyquist * b / bins;
    std::complex<double> c(0, 0);
    for (std::size_t i = 0; i < n; ++i)
      c += (y[i] - mean) * std::exp(std::complex<double>(0, -two_pi * f * x[i]));
    if (std::norm(c) > best_power) {
      best_power = std::norm(c);
      best_f = f;
      best_c = c;
    }
  }
  const double amp = 2.0 * std::abs(best_c) / n;
  const double phase = std::arg(best_c);
  return {best_f, amp, phase};
}

} // namespace

FitModel cosine_fit_model(const std::vector<double>& x, const std::vector<double>& y) {
  double dx_min = kInf;
  for (std::size_t i = 1; i < x.size(); ++i) dx_min = std::min(dx_min, x[i] - x[i - 1]);
  const double nyquist = 0.5 / std::max(dx_min, 1e-300);

  FitModel model;
  model.lower_bounds = Eigen::Vector4d(-kInf, nyquist * 1e-9, -kInf, -kInf);
  model.upper_bounds = Eigen::Vector4d(kInf, nyquist, kInf, kInf);
  model.residuals = [&x, &y](const Eigen::VectorXd& p) {
    Eigen::VectorXd r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
      r(i) = p(3) + p(0) * std::cos(two_pi * p(1) * x[i] + p(2)) - y[i];
    return r;
  };
  model.jacobian = [&x](const Eigen::VectorXd& p) {
    Eigen::MatrixXd j(x.size(), 4);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double th = two_pi * p(1) * x[i] + p(2);
      j(i, 0) = std::cos(th);
      j(i, 1) = -p(0) * two_pi * x[i] * std::sin(th);
      j(i, 2) = -p(0) * std::sin(th);
      j(i, 3) = 1.0;
    }
    return j;
  };
  return model;
}

FitResult fit_cosine(const std::vector<double>& x, const std::vector<double>& y,
                     const Eigen::VectorXd* initial_guess) {
  if (x.size() != y.size() || x.size() < 8)
    throw std::invalid_argument("fit_cosine: need >= 8 matched points");

  FitResult flagged;
  flagged.names = {"amplitude", "frequency", "phase", "offset"};
  flagged.units = {"", "Hz", "rad", ""};

  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
  if (standard_deviation(y) < 1e-12 * (1.0 + std::abs(mean))) {
    // Constant data: amplitude ~ 0, frequency unidentifiable.
    flagged.parameters = Eigen::Vector4d(0.0, 0.0, 0.0, mean);
    flagged.std_errors = Eigen::Vector4d::Zero();
    flagged.converged = false;
    return flagged;
  }

  const FitModel model = cosine_fit_model(x, y);
  Eigen::VectorXd p0(4);
  if (initial_guess) {
    p0 = *initial_guess;
  } else {
    const auto [f0, a0, ph0] = spectral_guess(x, y);
    p0 << a0, f0, ph0, mean;
  }
  FitResult out = lm_fit(model, p0);
  out.names = flagged.names;
  out.units = flagged.units;
  // Canonical form: positive amplitude, phase in [-pi, pi).
  if (out.parameters(0) < 0) {
    out.parameters(0) = -out.parameters(0);
    out.parameters(2) += std::numbers::pi_v<double>;
  }
  out.parameters(2) = std::remainder(out.parameters(2), two_pi);
  return out;
}

FitModel damped_cosine_fit_model(const std::vector<double>& x,
                                 const std::vector<double>& y) {
  FitModel model;
  model.lower_bounds.resize(5);
  model.upper_bounds.resize(5);
  double dx_min = kInf;
  for (std::size_t i = 1; i < x.size(); ++i) dx_min = std::min(dx_min, x[i] - x[i - 1]);
  const double nyquist = 0.5 / std::max(dx_min, 1e-300);
  model.lower_bounds << -kInf, nyquist * 1e-9, -kInf, 1e-300, -kInf;
  model.upper_bounds << kInf, nyquist, kInf, kInf, kInf;

  model.residuals = [&x, &y](const Eigen::VectorXd& p) {
    Eigen::VectorXd r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
      r(i) = p(4) + p(0) * std::exp(-x[i] / p(3)) * std::cos(two_pi * p(1) * x[i] + p(2)) -
             y[i];
    return r;
  };
  model.jacobian = [&x](const Eigen::VectorXd& p) {
    Eigen::MatrixXd j(x.size(), 5);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double e = std::exp(-x[i] / p(3));
      const double th = two_pi * p(1) * x[i] + p(2);
      j(i, 0) = e * std::cos(th);
      j(i, 1) = -p(0) * e * two_pi * x[i] * std::sin(th);
      j(i, 2) = -p(0) * e * std::sin(th);
      j(i, 3) = p(0) * e * std::cos(th) * x[i] / (p(3) * p(3));
      j(i, 4) = 1.0;
    }
    return j;
  };
  return model;
}

FitResult fit_damped_cosine(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 10)
    throw std::invalid_argument("fit_damped_cosine: need >= 10 matched points");

  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
  if (standard_deviation(y) < 1e-12 * (1.0 + std::abs(mean))) {
    FitResult flagged;
    flagged.names = {"amplitude", "frequency", "phase", "damping_time", "offset"};
    flagged.units = {"", "Hz", "rad", "s", ""};
    flagged.parameters.setZero(5);
    flagged.parameters(3) = 1.0;
    flagged.parameters(4) = mean;
    flagged.std_errors.setZero(5);
    flagged.converged = false;
    return flagged;
  }

  const FitModel model = damped_cosine_fit_model(x, y);
  const auto [f0, a0, ph0] = spectral_guess(x, y);
  Eigen::VectorXd p0(5);
  p0 << a0, f0, ph0, (x.back() - x.front()) / 2.0, mean;

  LmOptions opt;
  opt.max_iterations = 400;
  FitResult out = lm_fit(model, p0, opt);
  out.names = {"amplitude", "frequency", "phase", "damping_time", "offset"};
  out.units = {"", "Hz", "rad", "s", ""};
  if (out.parameters(0) < 0) {
    out.parameters(0) = -out.parameters(0);
    out.parameters(2) += std::numbers::pi_v<double>;
  }
  out.parameters(2) = std::remainder(out.parameters(2), two_pi);
  return out;
}

// --- exponential -------------------------------------------------------------

FitModel exponential_fit_model(const std::vector<double>& x,
                               const std::vector<double>& y) {
  FitModel model;
  model.lower_bounds = Eigen::Vector3d(-kInf, 1e-300, -kInf);
  model.upper_bounds = Eigen::Vector3d(kInf, kInf, kInf);
  model.residuals = [&x, &y](const Eigen::VectorXd& p) {
    Eigen::VectorXd r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
      r(i) = p(2) + p(0) * std::exp(-x[i] / p(1)) - y[i];
    return r;
  };
  model.jacobian = [&x](const Eigen::VectorXd& p) {
    Eigen::MatrixXd j(x.size(), 3);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double e = std::exp(-x[i] / p(1));
      j(i, 0) = e;
      j(i, 1) = p(0) * e * x[i] / (p(1) * p(1));
      j(i, 2) = 1.0;
    }
    return j;
  };
  return model;
}

FitResult fit_exponential(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3)
    throw std::invalid_argument("fit_exponential: need >= 3 matched points");

  FitResult flagged;
  flagged.names = {"amplitude", "time_constant", "offset"};
  flagged.units = {"", "s", ""};

  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
  if (standard_deviation(y) < 1e-12 * (1.0 + std::abs(mean))) {
    flagged.parameters = Eigen::Vector3d(0.0, 1.0, mean);
    flagged.std_errors = Eigen::Vector3d::Zero();
    flagged.converged = false;
    return flagged;
  }

  const FitModel model = exponential_fit_model(x, y);

  // Log-linear warm start on the early part of the decay.
  const double tail = y.back();
  const double head = y.front();
  double tau0 = (x.back() - x.front()) / 3.0;
  double sum_t = 0, sum_l = 0, sum_tt = 0, sum_tl = 0;
  int used = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = (y[i] - tail) / (head - tail + 1e-300);
    if (v > 0.05) {
      const double l = std::log(v);
      sum_t += x[i];
      sum_l += l;
      sum_tt += x[i] * x[i];
      sum_tl += x[i] * l;
      ++used;
    }
  }
  if (used >= 2) {
    const double denom = used * sum_tt - sum_t * sum_t;
    if (std::abs(denom) > 0) {
      const double slope = (used * sum_tl - sum_t * sum_l) / denom;
      if (slope < 0) tau0 = -1.0 / slope;
    }
  }
  Eigen::VectorXd p0(3);
  p0 << head - tail, tau0, tail;

  FitResult out = lm_fit(model, p0);
  out.names = flagged.names;
  out.units = flagged.units;
  return out;
}

// --- pumping rate recovery ----------------------------------------------------

namespace {

// d/dx and d/dy of exp_divided_difference(x, y, t), series for small (x-y)t.
std::pair<double, double> dd_derivatives(double x, double y, double t) {
  const double d = x - y;
  const double ey = std::exp(-y * t);
  if (std::abs(d * t) < 1e-5) {
    const double z = d * t;
    const double ds_dx = t * t * ey * (0.5 - z / 3.0 + z * z / 8.0);
    const double ds_dy = t * t * ey * (0.5 - z / 6.0 + z * z / 24.0);
    return {ds_dx, ds_dy};
  }
  const double dd = exp_divided_difference(x, y, t);
  const double ex = std::exp(-x * t);
  return {(-t * ex - dd) / d, (t * ey + dd) / d};
}

} // namespace

FitModel rates_fit_model(const std::vector<double>& durations,
                         const std::vector<double>& p_total_ms0,
                         const std::vector<double>& p_up) {
  const std::size_t n = durations.size();
  FitModel model;
  model.lower_bounds = Eigen::Vector3d(0.0, 0.0, 0.0);
  model.upper_bounds = Eigen::Vector3d(kInf, kInf, kInf);
  model.residuals = [&durations, &p_total_ms0, &p_up, n](const Eigen::VectorXd& p) {
    Eigen::VectorXd r(2 * n);
    const double ab = p(0) + p(1);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = durations[i];
      const double e1 = std::exp(-ab * t);
      const double dd = exp_divided_difference(ab, 2.0 * p(2), t);
      r(i) = (1.0 - 0.5 * e1) - p_total_ms0[i];
      r(n + i) = (0.5 - 0.5 * (p(0) - p(2)) * dd) - p_up[i];
    }
    return r;
  };
  model.jacobian = [&durations, n](const Eigen::VectorXd& p) {
    Eigen::MatrixXd j(2 * n, 3);
    const double ab = p(0) + p(1);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = durations[i];
      const double e1 = std::exp(-ab * t);
      const double dd = exp_divided_difference(ab, 2.0 * p(2), t);
      const auto [dd_dx, dd_dy] = dd_derivatives(ab, 2.0 * p(2), t);
      j(i, 0) = 0.5 * t * e1;
      j(i, 1) = 0.5 * t * e1;
      j(i, 2) = 0.0;
      const double k = 0.5 * (p(0) - p(2));
      j(n + i, 0) = -0.5 * dd - k * dd_dx;
      j(n + i, 1) = -k * dd_dx;
      j(n + i, 2) = 0.5 * dd - k * dd_dy * 2.0;
    }
    return j;
  };
  return model;
}

FitResult fit_rate_params(const std::vector<double>& durations,
                          const std::vector<double>& p_total_ms0,
                          const std::vector<double>& p_up,
                          const RateParams* initial_guess) {
  const std::size_t n = durations.size();
  if (p_total_ms0.size() != n || p_up.size() != n || n < 4)
    throw std::invalid_argument("fit_rate_params: need >= 4 matched points");

  FitResult flagged;
  flagged.names = {"alpha", "beta", "gamma"};
  flagged.units = {"1/s", "1/s", "1/s"};

  if (standard_deviation(p_total_ms0) < 1e-10 && standard_deviation(p_up) < 1e-10) {
    flagged.parameters = Eigen::Vector3d::Zero();
    flagged.std_errors = Eigen::Vector3d::Zero();
    flagged.converged = false;
    return flagged;
  }

  const FitModel model = rates_fit_model(durations, p_total_ms0, p_up);
  Eigen::VectorXd p0(3);
  if (initial_guess) {
    p0 << initial_guess->alpha, initial_guess->beta, initial_guess->gamma;
  } else {
    // alpha+beta from the total mS=0 curve: 2(1 - curve) = exp(-(a+b) t).
    double ab0 = 1e6;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = 2.0 * (1.0 - p_total_ms0[i]);
      if (v < 0.4 && durations[i] > 0) {
        ab0 = -std::log(std::max(v, 1e-12)) / durations[i];
        break;
      }
    }
    p0 << 0.7 * ab0, 0.3 * ab0, 0.25 * ab0;
  }

  LmOptions opt;
  opt.max_iterations = 400;
  FitResult out = lm_fit(model, p0, opt);
  out.names = flagged.names;
  out.units = flagged.units;
  return out;
}

} // namespace nvmem
