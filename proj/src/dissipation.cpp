#include "nvmem/dissipation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "nvmem/linalg.hpp"

namespace nvmem {

namespace {

// Six-level pumping generator over the product ordering
// (-1,up), (-1,dn), (0,up), (0,dn), (1,up), (1,dn).
Eigen::Matrix<double, 6, 6> pump_matrix(const RateParams& r) {
  Eigen::Matrix<double, 6, 6> m = Eigen::Matrix<double, 6, 6>::Zero();
  const double a = r.alpha, b = r.beta, g = r.gamma;

  auto pump = [&m, a, b](int src_up, int src_dn) {
    m(2, src_up) += a;  // conserve nuclear spin into (0,up)
    m(3, src_up) += b;  // flip into (0,dn)
    m(src_up, src_up) -= a + b;
    m(3, src_dn) += a;
    m(2, src_dn) += b;
    m(src_dn, src_dn) -= a + b;
  };
  pump(4, 5);  // mS=+1
  pump(0, 1);  // mS=-1

  m(2, 2) -= g;
  m(3, 2) += g;
  m(3, 3) -= g;
  m(2, 3) += g;
  return m;
}

} // namespace

QuantumState apply_laser(const QuantumState& s, const Eigensystem& es,
                         const RateParams& r, double duration,
                         double coherence_threshold) {
  if (duration < 0) throw std::invalid_argument("apply_laser: negative duration");
  r.validate();
  if (duration == 0.0) return s;

  Matrix6c rho_eig = es.vectors.adjoint() * s.rho * es.vectors;
  Eigen::Matrix<double, 6, 1> pops;  // indexed in product-label order
  for (int q = 0; q < 6; ++q) pops(q) = rho_eig(es.label[q], es.label[q]).real();
  pops = expm(pump_matrix(r) * duration) * pops;

  if (duration > coherence_threshold) rho_eig.setZero();
  for (int q = 0; q < 6; ++q) rho_eig(es.label[q], es.label[q]) = pops(q);

  QuantumState out;
  out.rho = es.vectors * rho_eig * es.vectors.adjoint();
  return out;
}

double storage_decay_envelope(const DecayParams& d, double t) {
  if (t < 0) throw std::invalid_argument("storage_decay_envelope: negative time");
  d.validate();
  return std::exp(-t * (1.0 / d.t2c_pure + 1.0 / d.t1e));
}

std::vector<double> sample_t1_flips(double t1e, double horizon, std::uint64_t seed) {
  if (horizon < 0) throw std::invalid_argument("sample_t1_flips: negative horizon");
  if (t1e <= 0) throw std::invalid_argument("sample_t1_flips: t1e must be > 0");

  std::mt19937_64 rng(seed);
  std::vector<double> flips;
  double t = 0.0;
  for (;;) {
    // Inverse-CDF exponential gap; 1-u avoids log(0).
    const double u = std::generate_canonical<double, 53>(rng);
    t += -t1e * std::log1p(-u);
    if (t >= horizon) break;
    flips.push_back(t);
  }
  return flips;
}

TelegraphResult run_telegraph_trajectory(const std::vector<double>& flips,
                                         const std::vector<PhasePulse>& pulses,
                                         double freq_m1, double freq_m0,
                                         double t_end, int start_manifold) {
  struct Event {
    double time;
    bool is_flip;
    PulseKind kind;
  };
  std::vector<Event> events;
  events.reserve(flips.size() + pulses.size());
  for (const auto& p : pulses)
    if (p.time < t_end) events.push_back({p.time, false, p.kind});
  for (double f : flips)
    if (f < t_end) events.push_back({f, true, PulseKind::invert_m1});
  // Pulses act before a simultaneous flip.
  std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    if (a.time != b.time) return a.time < b.time;
    return !a.is_flip && b.is_flip;
  });

  TelegraphResult r;
  r.manifold = start_manifold;
  double t = 0.0;
  for (const auto& e : events) {
    r.phase += two_pi * (r.manifold == 1 ? freq_m1 : freq_m0) * (e.time - t);
    t = e.time;
    if (e.is_flip) {
      r.manifold = r.manifold == 1 ? 0 : 1;
    } else if ((e.kind == PulseKind::invert_m1 && r.manifold == 1) ||
               (e.kind == PulseKind::invert_m0 && r.manifold == 0)) {
      r.phase = -r.phase;
    }
  }
  r.phase += two_pi * (r.manifold == 1 ? freq_m1 : freq_m0) * (t_end - t);
  return r;
}

} // namespace nvmem
