#pragma once

// Generalized Fourier transform y -> y_hat(s) = (y, phi(., s))_Delta, its
// inverse against a spectral function, Parseval defects, the boundary-condition
// membership test and truncation diagnostics.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "slspec/error.hpp"
#include "slspec/nevanlinna.hpp"
#include "slspec/parallel.hpp"
#include "slspec/problem.hpp"
#include "slspec/propagator.hpp"
#include "slspec/spectral.hpp"

namespace slspec {

using RealFn = std::function<double(double)>;

struct TransformedFn {
  /// (u_j, y_hat(u_j)) in the order of SpectralFunction::ac.
  std::vector<std::pair<double, cplx>> ac_values;
  /// (s_k, y_hat(s_k)) in the order of SpectralFunction::masses.
  std::vector<std::pair<double, cplx>> mass_values;
  double source_norm_sq = 0;
};

/// Which parts of a spectral function an inverse transform uses: the first
/// k_max masses and the absolutely continuous part restricted to [ac_lo, ac_hi].
struct Truncation {
  int k_max = 0;
  double ac_lo = 0;
  double ac_hi = 0;
  std::string describe() const {
    char buf[128];
    std::snprintf(buf, sizeof buf, "k_max=%d ac=[%.6g, %.6g]", k_max, ac_lo, ac_hi);
    return buf;
  }
};

namespace detail {

/// (y, phi(., s))_Delta along one trajectory at real s.
inline cplx transform_along(const SLProblem& problem, const Trajectory& traj, const RealFn& y) {
  cplx total = 0;
  for (const auto& seg : problem.segments()) {
    if (seg.delta_zero) continue;
    auto f = [&](double t) -> cplx { return problem.delta_at(seg, t) * y(t) * std::conj(traj.at(t).y); };
    total += integrate<cplx>(f, seg.t0, seg.t1, problem.quad()).value;
  }
  return total;
}

inline void check_t(const SLProblem& problem, double t) {
  if (!(t >= problem.a() && t <= problem.b())) throw ConfigError("t outside [a, b]");
}

inline void check_alignment(const SpectralFunction& sf, const TransformedFn& yhat) {
  bool ok = sf.ac.size() == yhat.ac_values.size() && sf.masses.size() == yhat.mass_values.size();
  for (std::size_t j = 0; ok && j < sf.ac.size(); ++j) ok = sf.ac[j].u == yhat.ac_values[j].first;
  for (std::size_t k = 0; ok && k < sf.masses.size(); ++k) ok = sf.masses[k].s == yhat.mass_values[k].first;
  if (!ok) throw ConfigError("grid misalignment between spectral function and transformed function");
}

inline void check_truncation(const SpectralFunction& sf, const Truncation& tr) {
  if (tr.k_max < 0) throw ConfigError("k_max must be non-negative");
  if (tr.ac_lo > tr.ac_hi) throw ConfigError("truncation ac window is reversed");
  if (tr.ac_lo < sf.s_min || tr.ac_hi > sf.s_max) throw ConfigError("truncation exceeds the spectral window");
}

/// rho_j times the length of cell j inside [lo, hi].
inline double ac_weight(const AcNode& n, double lo, double hi) {
  const double overlap = std::min(n.hi, hi) - std::max(n.lo, lo);
  return overlap > 0 ? n.rho * overlap : 0.0;
}

}  // namespace detail

inline TransformedFn fourier_transform(const SLProblem& problem, const RealFn& y, const SpectralFunction& sf) {
  TransformedFn out;
  out.source_norm_sq = delta_norm_sq(problem, y);
  out.ac_values.resize(sf.ac.size());
  out.mass_values.resize(sf.masses.size());
  const std::size_t n_mass = sf.masses.size();
  parallel_for(n_mass + sf.ac.size(), [&](std::size_t i) {
    const double s = i < n_mass ? sf.masses[i].s : sf.ac[i - n_mass].u;
    const auto traj = propagate(problem, s, phi_initial(problem));
    const cplx v = detail::transform_along(problem, traj, y);
    if (i < n_mass) out.mass_values[i] = {s, v};
    else out.ac_values[i - n_mass] = {s, v};
  });
  return out;
}

struct InverseValue {
  cplx value{};
  /// Sum / integral of the moduli of the terms.
  double abs_bound = 0;
};

/// Inverse transform at every t of t_grid, sharing one trajectory per spectral node.
inline std::vector<InverseValue> inverse_transform_grid(const SLProblem& problem, const SpectralFunction& sf,
                                                        const TransformedFn& yhat, const std::vector<double>& t_grid,
                                                        const Truncation& tr) {
  detail::check_alignment(sf, yhat);
  detail::check_truncation(sf, tr);
  for (double t : t_grid) detail::check_t(problem, t);
  struct Term {
    double s;
    cplx coef;
  };
  std::vector<Term> terms;
  const std::size_t kmax = std::min<std::size_t>(static_cast<std::size_t>(tr.k_max), sf.masses.size());
  for (std::size_t k = 0; k < kmax; ++k) terms.push_back({sf.masses[k].s, sf.masses[k].jump * yhat.mass_values[k].second});
  for (std::size_t j = 0; j < sf.ac.size(); ++j) {
    const double w = detail::ac_weight(sf.ac[j], tr.ac_lo, tr.ac_hi);
    if (w > 0) terms.push_back({sf.ac[j].u, w * yhat.ac_values[j].second});
  }
  std::vector<std::vector<cplx>> contrib(terms.size());
  parallel_for(terms.size(), [&](std::size_t i) {
    contrib[i].resize(t_grid.size());
    if (terms[i].coef == cplx(0.0)) return;
    const auto traj = propagate(problem, terms[i].s, phi_initial(problem));
    for (std::size_t m = 0; m < t_grid.size(); ++m) contrib[i][m] = traj.at(t_grid[m]).y * terms[i].coef;
  });
  std::vector<InverseValue> out(t_grid.size());
  for (std::size_t i = 0; i < terms.size(); ++i)
    for (std::size_t m = 0; m < t_grid.size(); ++m) {
      out[m].value += contrib[i][m];
      out[m].abs_bound += std::abs(contrib[i][m]);
    }
  return out;
}

inline InverseValue inverse_transform(const SLProblem& problem, const SpectralFunction& sf, const TransformedFn& yhat,
                                      double t, const Truncation& tr) {
  return inverse_transform_grid(problem, sf, yhat, {t}, tr).front();
}

/// Transformed norm sum sigma_k |y_hat|^2 + integral rho |y_hat|^2 over the truncation.
inline double transformed_norm_sq(const SpectralFunction& sf, const TransformedFn& yhat, const Truncation& tr) {
  detail::check_alignment(sf, yhat);
  detail::check_truncation(sf, tr);
  double total = 0;
  const std::size_t kmax = std::min<std::size_t>(static_cast<std::size_t>(tr.k_max), sf.masses.size());
  for (std::size_t k = 0; k < kmax; ++k) total += sf.masses[k].jump * std::norm(yhat.mass_values[k].second);
  for (std::size_t j = 0; j < sf.ac.size(); ++j)
    total += detail::ac_weight(sf.ac[j], tr.ac_lo, tr.ac_hi) * std::norm(yhat.ac_values[j].second);
  return total;
}

inline double parseval_defect(const SpectralFunction& sf, const TransformedFn& yhat, const Truncation& tr) {
  const double t = transformed_norm_sq(sf, yhat, tr);
  const double n = yhat.source_norm_sq;
  if (n <= 1e-30) return t;
  return std::abs(t - n) / std::max(n, 1e-30);
}

inline double parseval_defect(const SLProblem& problem, const SpectralFunction& sf, const RealFn& y,
                              const Truncation& tr) {
  return parseval_defect(sf, fourier_transform(problem, y, sf), tr);
}

struct MembershipCheck {
  std::string name;
  bool pass = false;
  double residual = 0;
};

struct MembershipReport {
  bool in_F = false;
  std::vector<MembershipCheck> checks;
};

struct MembershipTolerances {
  double tol_bc = 1e-8;
  /// Residual tolerance is tol_res * (1 + ||f_y||_Delta).
  double tol_res = 1e-6;
  int samples_per_segment = 32;
};

/// Checks the left boundary condition, the right one implied by tau's class,
/// and that -y1' + q y equals Delta f_y (y1' by finite differences).
inline MembershipReport membership_in_F(const SLProblem& problem, const BoundaryParam& tau, const RealFn& y,
                                        const RealFn& y1, const RealFn& f_y, const MembershipTolerances& tol = {}) {
  MembershipReport rep;
  const double ca = detail::snap_to_zero(std::cos(problem.alpha()));
  const double sa = detail::snap_to_zero(std::sin(problem.alpha()));
  const double left = std::abs(ca * y(problem.a()) + sa * y1(problem.a()));
  rep.checks.push_back({"left boundary condition", left <= tol.tol_bc, left});

  const auto bc = classify_bc(tau);
  const double yb = y(problem.b()), y1b = y1(problem.b());
  switch (bc.label) {
    case BCClass::Label::bc1:
      rep.checks.push_back({"right boundary condition bc1: y(b) = 0", std::abs(yb) <= tol.tol_bc, std::abs(yb)});
      break;
    case BCClass::Label::bc2: {
      const double r = std::abs(y1b - *bc.d_tau * yb);
      rep.checks.push_back({"right boundary condition bc2: y1(b) = D y(b)", r <= tol.tol_bc * (1 + std::abs(yb)), r});
      break;
    }
    case BCClass::Label::bc3: {
      const double r = std::max(std::abs(yb), std::abs(y1b));
      rep.checks.push_back({"right boundary condition bc3: y(b) = y1(b) = 0", r <= tol.tol_bc, r});
      break;
    }
  }

  const double fnorm = std::sqrt(delta_norm_sq(problem, f_y));
  double worst = 0;
  for (const auto& seg : problem.segments()) {
    const double len = seg.t1 - seg.t0;
    const int n = tol.samples_per_segment;
    for (int i = 0; i < n; ++i) {
      const double t = seg.t0 + len * (i + 0.5) / n;
      const double room = std::min(t - seg.t0, seg.t1 - t);
      const double h = std::min(1e-3 * len, room / 2.5);
      const double d1 = (y1(t - 2 * h) - 8 * y1(t - h) + 8 * y1(t + h) - y1(t + 2 * h)) / (12 * h);
      const double lhs = -d1 + problem.q_at(seg, t) * y(t);
      worst = std::max(worst, std::abs(lhs - problem.delta_at(seg, t) * f_y(t)));
    }
  }
  rep.checks.push_back({"l[y] = Delta f_y", worst <= tol.tol_res * (1 + fnorm), worst});
  rep.in_F = std::all_of(rep.checks.begin(), rep.checks.end(), [](const auto& c) { return c.pass; });
  return rep;
}

struct ConvergenceEntry {
  std::string description;
  double sup_error = 0;
  /// Largest absolute-convergence bound over the t-grid.
  double abs_bound = 0;
};

struct ConvergenceReport {
  std::vector<ConvergenceEntry> truncations;
  bool monotone_tail = false;
};

/// Per-t reconstructions for each truncation of a nested schedule.
struct ProfileTables {
  ConvergenceReport report;
  std::vector<std::vector<cplx>> reconstructed;
};

inline ProfileTables uniform_convergence_tables(const SLProblem& problem, const SpectralFunction& sf,
                                                const TransformedFn& yhat, const RealFn& y_true,
                                                const std::vector<Truncation>& schedule,
                                                const std::vector<double>& t_grid) {
  if (schedule.empty()) throw ConfigError("truncation schedule is empty");
  for (std::size_t i = 1; i < schedule.size(); ++i)
    if (schedule[i].k_max < schedule[i - 1].k_max || schedule[i].ac_lo > schedule[i - 1].ac_lo ||
        schedule[i].ac_hi < schedule[i - 1].ac_hi)
      throw ConfigError("truncation schedule is not nested");
  // The widest truncation covers every term; narrower ones reuse its per-node contributions.
  const auto& widest = schedule.back();
  detail::check_alignment(sf, yhat);
  detail::check_truncation(sf, widest);
  for (double t : t_grid) detail::check_t(problem, t);
  struct Term {
    double s;
    cplx hat;
    int mass_index;  // -1 for ac nodes
    std::size_t ac_index;
  };
  std::vector<Term> terms;
  const std::size_t kmax = std::min<std::size_t>(static_cast<std::size_t>(widest.k_max), sf.masses.size());
  for (std::size_t k = 0; k < kmax; ++k)
    terms.push_back({sf.masses[k].s, yhat.mass_values[k].second, static_cast<int>(k), 0});
  for (std::size_t j = 0; j < sf.ac.size(); ++j)
    if (detail::ac_weight(sf.ac[j], widest.ac_lo, widest.ac_hi) > 0)
      terms.push_back({sf.ac[j].u, yhat.ac_values[j].second, -1, j});
  std::vector<std::vector<cplx>> phi(terms.size());
  parallel_for(terms.size(), [&](std::size_t i) {
    phi[i].assign(t_grid.size(), 0.0);
    if (terms[i].hat == cplx(0.0)) return;
    const auto traj = propagate(problem, terms[i].s, phi_initial(problem));
    for (std::size_t m = 0; m < t_grid.size(); ++m) phi[i][m] = traj.at(t_grid[m]).y;
  });
  ProfileTables out;
  for (const auto& tr : schedule) {
    std::vector<cplx> sum(t_grid.size());
    std::vector<double> bound(t_grid.size());
    for (std::size_t i = 0; i < terms.size(); ++i) {
      double w;
      if (terms[i].mass_index >= 0) w = terms[i].mass_index < tr.k_max ? sf.masses[terms[i].mass_index].jump : 0.0;
      else w = detail::ac_weight(sf.ac[terms[i].ac_index], tr.ac_lo, tr.ac_hi);
      if (w == 0) continue;
      for (std::size_t m = 0; m < t_grid.size(); ++m) {
        const cplx c = phi[i][m] * w * terms[i].hat;
        sum[m] += c;
        bound[m] += std::abs(c);
      }
    }
    ConvergenceEntry e;
    e.description = tr.describe();
    for (std::size_t m = 0; m < t_grid.size(); ++m) {
      e.sup_error = std::max(e.sup_error, std::abs(y_true(t_grid[m]) - sum[m]));
      e.abs_bound = std::max(e.abs_bound, bound[m]);
    }
    out.report.truncations.push_back(e);
    out.reconstructed.push_back(std::move(sum));
  }
  const auto& tr = out.report.truncations;
  out.report.monotone_tail = tr.size() >= 3 && tr[tr.size() - 1].sup_error <= tr[tr.size() - 2].sup_error &&
                             tr[tr.size() - 2].sup_error <= tr[tr.size() - 3].sup_error;
  return out;
}

inline ConvergenceReport uniform_convergence_profile(const SLProblem& problem, const SpectralFunction& sf,
                                                     const TransformedFn& yhat, const RealFn& y_true,
                                                     const std::vector<Truncation>& schedule,
                                                     const std::vector<double>& t_grid) {
  return uniform_convergence_tables(problem, sf, yhat, y_true, schedule, t_grid).report;
}

struct ExpansionMode {
  double lambda = 0;
  /// (y, v_k)_Delta with v_k = phi(., lambda_k) / ||phi(., lambda_k)||_Delta.
  double coefficient = 0;
  double norm_sq = 0;
  std::vector<double> values;
};

struct EigenExpansion {
  std::vector<ExpansionMode> modes;
  std::vector<double> t_grid;
  /// sum_k coefficient_k v_k(t) on t_grid.
  std::vector<double> reconstruction;
};

namespace detail {

inline double search_floor(const SLProblem& problem, const BoundaryParam& tau) {
  double qmax = 0;
  for (const auto& seg : problem.segments())
    for (int i = 0; i <= 8; ++i) qmax = std::max(qmax, std::abs(problem.q_at(seg, seg.t0 + (seg.t1 - seg.t0) * i / 8)));
  const double theta = tau.kind() == BoundaryParam::Kind::Constant ? tau.theta() : 0.0;
  const double len = problem.b() - problem.a();
  const double cot = std::abs(std::sin(problem.alpha())) > 1e-12 ? std::cos(problem.alpha()) / std::sin(problem.alpha()) : 0.0;
  return -(10.0 + 10.0 * (theta * theta + cot * cot + qmax) / (problem.weight_support_measure() / len));
}

}  // namespace detail

/// First K eigenpairs for a constant or infinite tau, coefficients of y and
/// the truncated expansion on t_grid. Cross-checked against the inverse
/// transform built from the corresponding pure point spectral function.
inline EigenExpansion eigen_expansion(const SLProblem& problem, const BoundaryParam& tau, const RealFn& y, int K,
                                      const std::vector<double>& t_grid) {
  if (K < 1) throw ConfigError("K must be at least 1");
  if (tau.kind() == BoundaryParam::Kind::Analytic)
    throw ConfigError("eigen_expansion needs a constant or infinite boundary parameter");
  for (double t : t_grid) detail::check_t(problem, t);
  const double lo = detail::search_floor(problem, tau);
  const double phase = detail::phase_length(problem);
  // Leading-order count: about phase * sqrt(lambda) / pi eigenvalues below lambda.
  double hi = std::pow(std::numbers::pi * (K + 2) / phase, 2) + 10;
  std::vector<double> eig;
  for (int attempt = 0; attempt < 8; ++attempt) {
    eig = find_eigenvalues(problem, tau, lo, hi, K);
    if (static_cast<int>(eig.size()) >= K) break;
    hi = 2 * hi + 10;
  }
  if (static_cast<int>(eig.size()) < K)
    throw NumericalError("found only " + std::to_string(eig.size()) + " eigenvalues below " + std::to_string(hi));

  EigenExpansion out;
  out.t_grid = t_grid;
  out.modes.resize(static_cast<std::size_t>(K));
  std::vector<cplx> hat(static_cast<std::size_t>(K));
  std::vector<std::vector<double>> phi_vals(static_cast<std::size_t>(K));
  parallel_for(static_cast<std::size_t>(K), [&](std::size_t k) {
    const auto traj = propagate(problem, eig[k], phi_initial(problem));
    auto phi = [&](double t) { return traj.at(t).y.real(); };
    const double nsq = delta_norm_sq(problem, phi);
    hat[k] = detail::transform_along(problem, traj, y);
    auto& m = out.modes[k];
    m.lambda = eig[k];
    m.norm_sq = nsq;
    m.coefficient = hat[k].real() / std::sqrt(nsq);
    phi_vals[k].resize(t_grid.size());
    m.values.resize(t_grid.size());
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
      phi_vals[k][i] = phi(t_grid[i]);
      m.values[i] = phi_vals[k][i] / std::sqrt(nsq);
    }
  });
  out.reconstruction.assign(t_grid.size(), 0.0);
  for (const auto& m : out.modes)
    for (std::size_t i = 0; i < t_grid.size(); ++i) out.reconstruction[i] += m.coefficient * m.values[i];

  // Same sum written as an inverse transform with jumps from the residue formula.
  std::vector<double> jumps(static_cast<std::size_t>(K));
  parallel_for(static_cast<std::size_t>(K), [&](std::size_t k) { jumps[k] = point_mass(problem, tau, eig[k]); });
  double scale = 0, diff = 0;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    double alt = 0;
    for (std::size_t k = 0; k < static_cast<std::size_t>(K); ++k) alt += jumps[k] * hat[k].real() * phi_vals[k][i];
    scale = std::max(scale, std::abs(out.reconstruction[i]));
    diff = std::max(diff, std::abs(alt - out.reconstruction[i]));
  }
  double coef_scale = 0;
  for (std::size_t k = 0; k < static_cast<std::size_t>(K); ++k)
    coef_scale = std::max(coef_scale, std::abs(hat[k].real()) * std::sqrt(jumps[k]));
  if (diff > 1e-6 * std::max(scale, coef_scale) + 1e-14)
    throw CrossCheckError("eigenfunction expansion and pure point inverse transform disagree (" +
                          std::to_string(diff) + ")");
  return out;
}

}  // namespace slspec
