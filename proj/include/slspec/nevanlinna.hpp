#pragma once

// Boundary parameters tau: real constants, the constant infinity, and
// analytic functions mapping the upper half-plane into its closure.

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "slspec/config.hpp"
#include "slspec/error.hpp"
#include "slspec/extrapolation.hpp"
#include "slspec/problem.hpp"

namespace slspec {

/// tau = num / den; den == 0 encodes the value infinity.
struct Projective {
  cplx num{1.0};
  cplx den{1.0};
  bool is_infinite() const { return den == cplx(0.0) && num != cplx(0.0); }
};

using RealInterval = std::pair<double, double>;

class BoundaryParam {
 public:
  enum class Kind { Constant, Infinity, Analytic };

  static BoundaryParam constant(double theta) {
    if (!std::isfinite(theta)) throw ConfigError("constant boundary parameter must be finite");
    BoundaryParam t;
    t.kind_ = Kind::Constant;
    t.theta_ = theta;
    char buf[64];
    std::snprintf(buf, sizeof buf, "constant:%.17g", theta);
    t.name_ = buf;
    return t;
  }

  static BoundaryParam infinity() {
    BoundaryParam t;
    t.kind_ = Kind::Infinity;
    t.name_ = "infinity";
    return t;
  }

  /// eval: tau on C \ R (both half-planes). boundary: projective limit
  /// tau(u + i0) on the real axis; when absent it is approximated by eval
  /// slightly above the axis. nonreal: the parts of [lo, hi] where
  /// Im tau(u + i0) > 0; when absent they are located by sampling.
  static BoundaryParam analytic(std::string name, std::function<Projective(cplx)> eval,
                                std::function<Projective(double)> boundary = {},
                                std::function<std::vector<RealInterval>(double, double)> nonreal = {}) {
    BoundaryParam t;
    t.kind_ = Kind::Analytic;
    t.name_ = std::move(name);
    t.eval_ = std::move(eval);
    t.boundary_ = std::move(boundary);
    t.nonreal_ = std::move(nonreal);
    return t;
  }

  Kind kind() const { return kind_; }
  double theta() const { return theta_; }
  const std::string& name() const { return name_; }

  /// Value at non-real lambda (any kind) or at real lambda for Constant/Infinity.
  Projective projective(cplx lambda) const {
    switch (kind_) {
      case Kind::Constant: return {theta_, 1.0};
      case Kind::Infinity: return {1.0, 0.0};
      case Kind::Analytic: break;
    }
    if (lambda.imag() == 0) throw ConfigError("analytic boundary parameter evaluated on the real axis");
    return eval_(lambda);
  }

  /// Boundary value tau(u + i0).
  Projective boundary(double u) const {
    if (kind_ != Kind::Analytic) return projective(u);
    if (boundary_) return boundary_(u);
    return eval_(cplx(u, 1e-13 * (1 + std::abs(u))));
  }

  /// Sub-intervals of [lo, hi] where the boundary value has positive imaginary part.
  std::vector<RealInterval> nonreal_intervals(double lo, double hi) const {
    if (kind_ != Kind::Analytic) return {};
    if (nonreal_) return nonreal_(lo, hi);
    return sample_nonreal(lo, hi);
  }

 private:
  std::vector<RealInterval> sample_nonreal(double lo, double hi) const {
    constexpr int kSamples = 512;
    auto nonreal_at = [&](double u) {
      const auto p = boundary(u);
      if (p.den == cplx(0.0)) return false;
      const cplx v = p.num / p.den;
      return v.imag() > 1e-12 * (1 + std::abs(v));
    };
    std::vector<RealInterval> out;
    bool inside = false;
    double start = lo;
    double prev_u = lo;
    for (int i = 0; i <= kSamples; ++i) {
      const double u = lo + (hi - lo) * i / kSamples;
      const bool now = nonreal_at(u);
      if (now != inside) {
        double l = prev_u, r = u;
        for (int it = 0; it < 60; ++it) {
          const double m = 0.5 * (l + r);
          (nonreal_at(m) == inside ? l : r) = m;
        }
        if (now) start = r;
        else out.emplace_back(start, r);
        inside = now;
      }
      prev_u = u;
    }
    if (inside) out.emplace_back(start, hi);
    return out;
  }

  Kind kind_ = Kind::Constant;
  double theta_ = 0;
  std::string name_;
  std::function<Projective(cplx)> eval_;
  std::function<Projective(double)> boundary_;
  std::function<std::vector<RealInterval>(double, double)> nonreal_;
};

/// Result of eval_param: a finite value or the infinity flag.
struct ParamValue {
  bool infinite = false;
  cplx value{};
};

inline ParamValue eval_param(const BoundaryParam& tau, cplx lambda) {
  const auto p = tau.projective(lambda);
  if (p.is_infinite()) return {true, {}};
  return {false, p.num / p.den};
}

/// Principal square root; Im >= 0 on the upper half-plane.
inline BoundaryParam sqrt_param() {
  return BoundaryParam::analytic(
      "sqrt", [](cplx l) { return Projective{std::sqrt(l), 1.0}; },
      [](double u) { return Projective{u >= 0 ? cplx(std::sqrt(u), 0) : cplx(0, std::sqrt(-u)), 1.0}; },
      [](double lo, double hi) {
        std::vector<RealInterval> out;
        if (lo < 0) out.emplace_back(lo, std::min(hi, 0.0));
        return out;
      });
}

/// (a lambda + b) / (c lambda + d) with real coefficients.
inline BoundaryParam mobius_param(double a, double b, double c, double d) {
  for (double v : {a, b, c, d})
    if (!std::isfinite(v)) throw ConfigError("mobius coefficients must be finite");
  if (c == 0 && d == 0) throw ConfigError("mobius parameter with c = d = 0 is undefined");
  char buf[160];
  std::snprintf(buf, sizeof buf, "mobius:%.17g,%.17g,%.17g,%.17g", a, b, c, d);
  return BoundaryParam::analytic(
      buf, [=](cplx l) { return Projective{a * l + b, c * l + d}; },
      [=](double u) { return Projective{a * u + b, c * u + d}; },
      [](double, double) { return std::vector<RealInterval>{}; });
}

/// tau(lambda) = lambda.
inline BoundaryParam identity_param() {
  return BoundaryParam::analytic(
      "lambda", [](cplx l) { return Projective{l, 1.0}; }, [](double u) { return Projective{u, 1.0}; },
      [](double, double) { return std::vector<RealInterval>{}; });
}

/// "constant:3.0" | "infinity" | "sqrt" | "mobius:a,b,c,d" | "lambda".
inline BoundaryParam parse_tau(const std::string& raw) {
  const std::string text = detail::trim(raw);
  if (text == "infinity" || text == "inf") return BoundaryParam::infinity();
  if (text == "sqrt") return sqrt_param();
  if (text == "lambda") return identity_param();
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (head == "constant") {
    if (args.empty()) throw ConfigError("parse failure: constant needs a value, e.g. constant:3.0");
    return BoundaryParam::constant(parse_number(args));
  }
  if (head == "mobius") {
    std::vector<double> v;
    std::stringstream ss(args);
    std::string tok;
    while (std::getline(ss, tok, ',')) v.push_back(parse_number(tok));
    if (v.size() != 4) throw ConfigError("parse failure: mobius needs four coefficients a,b,c,d");
    return mobius_param(v[0], v[1], v[2], v[3]);
  }
  throw ConfigError("parse failure: unknown boundary parameter '" + text + "'");
}

/// Limits of tau along the positive imaginary axis.
struct Asymptotics {
  /// lim tau(iy)/(iy); +inf for the infinity parameter.
  double B = 0;
  bool B_nonzero = false;
  /// lim y Im tau(iy) < inf; meaningful only when B is zero.
  bool moment_finite = false;
  /// lim tau(iy), present iff B is zero and the moment is finite.
  std::optional<double> D;
};

inline Asymptotics asymptotics(const BoundaryParam& tau, const LimitConfig& cfg = {}) {
  switch (tau.kind()) {
    case BoundaryParam::Kind::Constant: return {0.0, false, true, tau.theta()};
    case BoundaryParam::Kind::Infinity: return {std::numeric_limits<double>::infinity(), true, false, std::nullopt};
    case BoundaryParam::Kind::Analytic: break;
  }
  std::vector<cplx> ratio, value;
  std::vector<double> moment;
  for (int k = 0; k <= cfg.k_max; ++k) {
    const double y = cfg.y0 * std::ldexp(1.0, k);
    const auto v = eval_param(tau, cplx(0, y));
    if (v.infinite) throw UnresolvedAsymptoticsError("boundary parameter is infinite on the imaginary axis", "");
    ratio.push_back(v.value / cplx(0, y));
    value.push_back(v.value);
    moment.push_back(y * v.value.imag());
  }
  Asymptotics out;
  const auto b = geometric_limit<cplx>(ratio, cfg, "tau(iy)/(iy)");
  if (b.status == LimitStatus::Divergent) throw UnresolvedAsymptoticsError("tau(iy)/(iy) diverges", "");
  out.B = b.value.real();
  out.B_nonzero = std::abs(b.value) > 1e-10;
  if (out.B_nonzero) return out;
  out.B = 0;
  const auto m = geometric_limit<double>(moment, cfg, "y Im tau(iy)");
  out.moment_finite = m.status == LimitStatus::Converged;
  if (out.moment_finite) {
    const auto d = geometric_limit<cplx>(value, cfg, "tau(iy)");
    if (d.status == LimitStatus::Divergent) throw UnresolvedAsymptoticsError("tau(iy) diverges", "");
    out.D = d.value.real();
  }
  return out;
}

/// Right-endpoint relation: FullRange = {0} x C, Graph(d) = {(h, -d h)}, Zero = {(0, 0)}.
struct EtaRelation {
  enum class Case { FullRange, Graph, Zero };
  Case kind = Case::Zero;
  double d = 0;
};

inline EtaRelation eta_relation(const BoundaryParam& tau, const LimitConfig& cfg = {}) {
  if (tau.kind() == BoundaryParam::Kind::Infinity) return {EtaRelation::Case::FullRange, 0};
  const auto as = asymptotics(tau, cfg);
  if (as.B_nonzero) return {EtaRelation::Case::FullRange, 0};
  if (as.moment_finite) return {EtaRelation::Case::Graph, *as.D};
  return {EtaRelation::Case::Zero, 0};
}

/// bc1: y(b) = 0. bc2: y1(b) = d_tau y(b). bc3: y(b) = y1(b) = 0.
struct BCClass {
  enum class Label { bc1, bc2, bc3 };
  Label label = Label::bc1;
  std::optional<double> d_tau;

  std::string name() const {
    switch (label) {
      case Label::bc1: return "bc1";
      case Label::bc2: return "bc2";
      default: return "bc3";
    }
  }
};

inline BCClass classify_bc(const BoundaryParam& tau, const LimitConfig& cfg = {}) {
  const auto eta = eta_relation(tau, cfg);
  switch (eta.kind) {
    case EtaRelation::Case::FullRange: return {BCClass::Label::bc1, std::nullopt};
    case EtaRelation::Case::Graph: return {BCClass::Label::bc2, eta.d};
    default: return {BCClass::Label::bc3, std::nullopt};
  }
}

struct NevanlinnaReport {
  bool ok = true;
  /// Most negative Im tau seen on the upper half-plane (0 if none negative).
  double worst_imag = 0;
  /// Largest |tau(conj l) - conj tau(l)|.
  double worst_symmetry = 0;
  cplx worst_lambda{};
};

/// Upper half-plane positivity and conjugate symmetry on a log-polar grid
/// |lambda| in [1e-2, 1e4], arg in (0, pi).
inline NevanlinnaReport check_nevanlinna(const BoundaryParam& tau, int n_samples, double tol_nev) {
  if (n_samples < 1) throw ConfigError("check_nevanlinna needs at least one sample");
  NevanlinnaReport rep;
  if (tau.kind() != BoundaryParam::Kind::Analytic) return rep;
  const double golden = 0.5 * (std::sqrt(5.0) - 1);
  for (int i = 0; i < n_samples; ++i) {
    const double frac = (i + 0.5) / n_samples;
    const double r = std::pow(10.0, -2 + 6 * frac);
    const double arg = std::numbers::pi * (std::fmod((i + 0.5) * golden, 1.0) * 0.998 + 0.001);
    const cplx l = std::polar(r, arg);
    const auto up = eval_param(tau, l);
    const auto down = eval_param(tau, std::conj(l));
    if (up.infinite != down.infinite) {
      rep.ok = false;
      rep.worst_symmetry = std::numeric_limits<double>::infinity();
      rep.worst_lambda = l;
      continue;
    }
    if (up.infinite) continue;
    if (up.value.imag() < rep.worst_imag) {
      rep.worst_imag = up.value.imag();
      rep.worst_lambda = l;
    }
    const double sym = std::abs(down.value - std::conj(up.value));
    if (sym > rep.worst_symmetry) {
      rep.worst_symmetry = sym;
      if (sym > tol_nev) rep.worst_lambda = l;
    }
  }
  if (rep.worst_imag < -tol_nev || rep.worst_symmetry > tol_nev) rep.ok = false;
  return rep;
}

}  // namespace slspec
