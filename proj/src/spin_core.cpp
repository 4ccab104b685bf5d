#include "nvmem/spin_core.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace nvmem {

namespace {

const complexd iu(0.0, 1.0);

Matrix6c drive_operator(const RegisterParams& p) {
  const Matrix2c id2 = Matrix2c::Identity();
  const Matrix3c id3 = Matrix3c::Identity();
  return p.gamma_e * kron(spin1_sx(), id2) + p.gamma_n * kron(id3, spin_half_ix());
}

} // namespace

Matrix6c build_hamiltonian(const RegisterParams& p) {
  p.validate();
  const Matrix2c id2 = Matrix2c::Identity();
  const Matrix3c id3 = Matrix3c::Identity();
  const Matrix3c sz = spin1_sz();

  Matrix6c h = p.zero_field_splitting * kron(sz * sz, id2);
  h -= p.gamma_e * p.b_field * kron(sz, id2);
  h += p.gamma_n * p.b_field * kron(id3, spin_half_iz());
  h += p.a_par * kron(sz, spin_half_iz());
  h += p.a_perp * (kron(spin1_sx(), spin_half_ix()) + kron(spin1_sy(), spin_half_iy()));
  return h;
}

Eigensystem eigensystem(const Matrix6c& h) {
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if (hermiticity_defect(h) > 1e-9 * scale)
    throw std::invalid_argument("eigensystem: input is not Hermitian");

  Eigen::SelfAdjointEigenSolver<Matrix6c> solver(h);
  Eigensystem es;
  es.values = solver.eigenvalues();
  es.vectors = solver.eigenvectors();

  // Greedy maximum-overlap assignment of product labels to eigenvectors.
  std::array<bool, 6> col_taken{}, prod_taken{};
  for (int pass = 0; pass < 6; ++pass) {
    double best = -1.0;
    int best_col = 0, best_prod = 0;
    for (int c = 0; c < 6; ++c) {
      if (col_taken[c]) continue;
      for (int q = 0; q < 6; ++q) {
        if (prod_taken[q]) continue;
        const double w = std::norm(es.vectors(q, c));
        if (w > best) {
          best = w;
          best_col = c;
          best_prod = q;
        }
      }
    }
    col_taken[best_col] = prod_taken[best_prod] = true;
    es.label[best_prod] = best_col;
    es.product_of[best_col] = best_prod;
  }
  return es;
}

double level_population(const QuantumState& s, const Eigensystem& es, Level l) {
  const Vector6c v = es.vectors.col(es.column_of(l));
  return (v.adjoint() * s.rho * v)(0).real();
}

double bright_population(const QuantumState& s, const Eigensystem& es) {
  return level_population(s, es, Level::m0_up) + level_population(s, es, Level::m0_dn);
}

QuantumState eigenstate_mixture(const Eigensystem& es,
                                const std::vector<std::pair<Level, double>>& weights) {
  QuantumState s;
  for (const auto& [level, weight] : weights) {
    const Vector6c v = es.vectors.col(es.column_of(level));
    s.rho += weight * v * v.adjoint();
  }
  return s;
}

std::string to_string(TransitionLabel l) {
  switch (l) {
    case TransitionLabel::MW1: return "MW1";
    case TransitionLabel::MW2: return "MW2";
    case TransitionLabel::RF1: return "RF1";
    case TransitionLabel::RF2: return "RF2";
  }
  return "?";
}

const Transition& Transitions::by_label(TransitionLabel l) const {
  switch (l) {
    case TransitionLabel::MW1: return mw1;
    case TransitionLabel::MW2: return mw2;
    case TransitionLabel::RF1: return rf1;
    case TransitionLabel::RF2: return rf2;
  }
  return mw1;
}

Transitions find_transitions(const Eigensystem& es) {
  auto make = [&es](TransitionLabel label, Level a, Level b) {
    int ca = es.column_of(a);
    int cb = es.column_of(b);
    if (es.values(ca) > es.values(cb)) std::swap(ca, cb);
    return Transition{label, ca, cb, es.values(cb) - es.values(ca)};
  };
  Transitions t;
  t.mw1 = make(TransitionLabel::MW1, Level::m0_dn, Level::m1_dn);
  t.mw2 = make(TransitionLabel::MW2, Level::m0_up, Level::m1_up);
  t.rf1 = make(TransitionLabel::RF1, Level::m1_dn, Level::m1_up);
  t.rf2 = make(TransitionLabel::RF2, Level::m0_dn, Level::m0_up);
  return t;
}

double enhancement_factor_analytic(const RegisterParams& p, int ms) {
  if (ms < -1 || ms > 1) throw std::invalid_argument("mS must be in {-1, 0, +1}");
  return (p.gamma_e / p.gamma_n) * (p.a_perp / p.zero_field_splitting) *
         (3.0 * std::abs(ms) - 2.0);
}

double enhancement_factor_numeric(const RegisterParams& p, const Eigensystem& es,
                                  const Transition& t) {
  // Reject ambiguous level identification.
  for (int i = 0; i < 5; ++i) {
    const double gap = es.values(i + 1) - es.values(i);
    if (gap < 1e-6 * std::max(1.0, std::abs(es.values(i))))
      throw std::invalid_argument("enhancement_factor_numeric: degenerate eigenlevels");
  }
  const Matrix6c v = drive_operator(p);
  const complexd full = es.vectors.col(t.upper).adjoint() * v * es.vectors.col(t.lower);

  const int pu = es.product_of[t.upper];
  const int pl = es.product_of[t.lower];
  const complexd bare = v(pu, pl);
  if (std::abs(bare) == 0.0)
    throw std::invalid_argument("enhancement_factor_numeric: bare element vanishes");
  return std::abs(full) / std::abs(bare);
}

double enhancement_factor_numeric(const RegisterParams& p) {
  const auto es = eigensystem(build_hamiltonian(p));
  return enhancement_factor_numeric(p, es, find_transitions(es).rf1);
}

namespace {

// sigma_d = i e^{i phi} |u><l| + h.c.; exp(-i theta/2 sigma_d) on the subspace.
Matrix2c subspace_rotation(double angle, double phase) {
  const double c = std::cos(angle / 2.0);
  const double s = std::sin(angle / 2.0);
  Matrix2c u;  // basis order (upper, lower)
  u(0, 0) = c;
  u(0, 1) = s * std::exp(iu * phase);
  u(1, 0) = -s * std::exp(-iu * phase);
  u(1, 1) = c;
  return u;
}

QuantumState apply_subspace_unitary(const QuantumState& s, const Eigensystem& es,
                                    int upper, int lower, const Matrix2c& u_sub) {
  Matrix6c u_eig = Matrix6c::Identity();
  u_eig(upper, upper) = u_sub(0, 0);
  u_eig(upper, lower) = u_sub(0, 1);
  u_eig(lower, upper) = u_sub(1, 0);
  u_eig(lower, lower) = u_sub(1, 1);
  const Matrix6c u = es.vectors * u_eig * es.vectors.adjoint();
  QuantumState out;
  out.rho = u * s.rho * u.adjoint();
  return out;
}

} // namespace

QuantumState apply_ideal_pulse(const QuantumState& s, const Eigensystem& es,
                               const Transition& t, double angle, double phase) {
  return apply_subspace_unitary(s, es, t.upper, t.lower, subspace_rotation(angle, phase));
}

QuantumState evolve_free(const QuantumState& s, const Eigensystem& es, double duration,
                         const Frame& frame, double t2star_n) {
  if (duration < 0) throw std::invalid_argument("evolve_free: negative duration");

  Matrix6c rho_eig = es.vectors.adjoint() * s.rho * es.vectors;
  Vector6c phases;
  for (int i = 0; i < 6; ++i)
    phases(i) = std::exp(-iu * two_pi * es.values(i) * duration);
  if (frame.rotating)
    phases(frame.upper) *= std::exp(iu * two_pi * frame.reference_freq * duration);

  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      rho_eig(i, j) *= phases(i) * std::conj(phases(j));

  if (t2star_n > 0.0 && duration > 0.0) {
    const double f = std::exp(-duration / t2star_n);
    // Nuclear coherences: eigenpairs labeled (mS,up)/(mS,dn) for each mS.
    const std::array<std::pair<Level, Level>, 3> pairs = {
        std::make_pair(Level::m_minus1_up, Level::m_minus1_dn),
        std::make_pair(Level::m0_up, Level::m0_dn),
        std::make_pair(Level::m1_up, Level::m1_dn)};
    for (const auto& [a, b] : pairs) {
      const int ca = es.column_of(a), cb = es.column_of(b);
      rho_eig(ca, cb) *= f;
      rho_eig(cb, ca) *= f;
    }
  }

  QuantumState out;
  out.rho = es.vectors * rho_eig * es.vectors.adjoint();
  return out;
}

DrivenResult evolve_driven(const QuantumState& s, const RegisterParams& p,
                           const Eigensystem& es, const Transition& t,
                           double bare_rabi, double phase, double duration,
                           double detuning) {
  if (bare_rabi < 0) throw std::invalid_argument("evolve_driven: negative rabi");
  if (duration < 0) throw std::invalid_argument("evolve_driven: negative duration");

  DrivenResult result;
  const double omega = bare_rabi * enhancement_factor_numeric(p, es, t);
  result.effective_rabi = omega;

  // Selectivity: the drive bandwidth must stay below both the spacing to any
  // competing transition sharing a level and the transition frequency itself.
  double min_sep = t.frequency;
  for (int a = 0; a < 6; ++a) {
    for (int b = a + 1; b < 6; ++b) {
      if ((a == t.lower && b == t.upper)) continue;
      const bool shares = (a == t.lower || a == t.upper || b == t.lower || b == t.upper);
      if (!shares) continue;
      min_sep = std::min(min_sep, std::abs((es.values(b) - es.values(a)) - t.frequency));
    }
  }
  result.selectivity_warning = omega > min_sep;

  // RWA propagator on the (upper, lower) subspace.
  Matrix2c h_sub = Matrix2c::Zero();
  h_sub(0, 0) = detuning / 2.0;
  h_sub(1, 1) = -detuning / 2.0;
  h_sub(0, 1) = (omega / 2.0) * iu * std::exp(iu * phase);
  h_sub(1, 0) = std::conj(h_sub(0, 1));
  Eigen::SelfAdjointEigenSolver<Matrix2c> solver(h_sub);
  Matrix2c u_sub = Matrix2c::Zero();
  for (int k = 0; k < 2; ++k) {
    const complexd ph = std::exp(-iu * two_pi * solver.eigenvalues()(k) * duration);
    u_sub += ph * solver.eigenvectors().col(k) * solver.eigenvectors().col(k).adjoint();
  }

  // Spectators evolve freely; the driven pair is reported in the drive frame.
  QuantumState out = evolve_free(s, es, duration);
  Matrix6c rho_eig = es.vectors.adjoint() * out.rho * es.vectors;
  const complexd undo_u = std::exp(iu * two_pi * es.values(t.upper) * duration);
  const complexd undo_l = std::exp(iu * two_pi * es.values(t.lower) * duration);
  for (int j = 0; j < 6; ++j) {
    rho_eig(t.upper, j) *= undo_u;
    rho_eig(j, t.upper) *= std::conj(undo_u);
  }
  for (int j = 0; j < 6; ++j) {
    if (j == t.upper) continue;
    rho_eig(t.lower, j) *= undo_l;
    rho_eig(j, t.lower) *= std::conj(undo_l);
  }
  out.rho = es.vectors * rho_eig * es.vectors.adjoint();
  out = apply_subspace_unitary(out, es, t.upper, t.lower, u_sub);
  result.state = out;
  return result;
}

QuantumState integrate_cosine_drive(const QuantumState& s, const RegisterParams& p,
                                    double b1, double freq, double phase,
                                    double duration) {
  const Matrix6c h0 = build_hamiltonian(p);
  const Matrix6c v = drive_operator(p);

  const double max_freq = std::max(freq, h0.cwiseAbs().maxCoeff());
  const double dt_max = 1.0 / (50.0 * max_freq);
  const long steps = std::max(1L, static_cast<long>(std::ceil(duration / dt_max)));
  const double dt = duration / static_cast<double>(steps);

  Matrix6c rho = s.rho;
  for (long k = 0; k < steps; ++k) {
    const double t_mid = (static_cast<double>(k) + 0.5) * dt;
    const Matrix6c h = h0 + b1 * std::cos(two_pi * freq * t_mid + phase) * v;
    Eigen::SelfAdjointEigenSolver<Matrix6c> solver(h);
    Vector6c ph;
    for (int i = 0; i < 6; ++i)
      ph(i) = std::exp(-iu * two_pi * solver.eigenvalues()(i) * dt);
    const Matrix6c u = solver.eigenvectors() * ph.asDiagonal() *
                       solver.eigenvectors().adjoint();
    rho = u * rho * u.adjoint();
  }
  QuantumState out;
  out.rho = rho;
  return out;
}

} // namespace nvmem
