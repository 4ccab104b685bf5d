#include "nvmem/rates.hpp"

#include <cmath>

#include "nvmem/linalg.hpp"

namespace nvmem {

bool Populations::is_valid(double tol) const {
  if (std::abs(sum() - 1.0) > tol) return false;
  return p.minCoeff() >= -tol;
}

Eigen::Matrix4d rate_matrix(const RateParams& r) {
  r.validate();
  Eigen::Matrix4d m;
  const double a = r.alpha, b = r.beta, g = r.gamma;
  m << -g,  g,        a,        b,
        g, -g,        b,        a,
        0,  0, -(a + b),        0,
        0,  0,        0, -(a + b);
  return m;
}

double exp_divided_difference(double x, double y, double t) {
  const double d = x - y;
  if (d == 0.0) return -t * std::exp(-y * t);
  // exp(-xt) - exp(-yt) = exp(-yt) expm1(-dt); expm1 keeps small d accurate.
  return std::exp(-y * t) * std::expm1(-d * t) / d;
}

Populations analytic_populations(const RateParams& r, double t) {
  if (t < 0) throw std::invalid_argument("analytic_populations: negative time");
  r.validate();
  const double ab = r.alpha + r.beta;
  const double g2 = 2.0 * r.gamma;
  const double e1 = std::exp(-ab * t);
  const double e2 = std::exp(-g2 * t);
  const double dd = exp_divided_difference(ab, g2, t);  // (e1 - e2)/(ab - g2)

  Populations out;
  out.p(0) = 0.5 - 0.5 * (r.alpha - r.gamma) * dd;
  // P_|0,dn> written with the same divided difference so the degenerate
  // branch needs no special casing:
  //   1/2 - (beta-gamma)/(2 d) e1 - (alpha-gamma)/(2 d) e2
  //     = 1/2 - e2/2 - (beta-gamma)/2 dd,   d = ab - g2.
  out.p(1) = 0.5 - 0.5 * e2 - 0.5 * (r.beta - r.gamma) * dd;
  out.p(2) = 0.5 * e1;
  out.p(3) = 0.0;
  return out;
}

Populations propagate_rates(const Populations& p0, const RateParams& r, double t) {
  if (t < 0) throw std::invalid_argument("propagate_rates: negative time");
  Populations out;
  out.p = expm(rate_matrix(r) * t) * p0.p;
  return out;
}

} // namespace nvmem
