#pragma once

// Problem data for -(p y')' + q y = lambda * Delta * y on a compact [a, b].

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "slspec/error.hpp"
#include "slspec/quadrature.hpp"

namespace slspec {

using cplx = std::complex<double>;

struct ConstantRule {
  double value = 0;
};

/// sum_k coeffs[k] * t^k
struct PolynomialRule {
  std::vector<double> coeffs;
};

/// Samples (t_i, v_i) with local Lagrange interpolation of the given order.
/// Between t_i and t_{i+1} the stencil is fixed, so the interpolant is
/// continuous and smooth away from the sample abscissae.
struct TableRule {
  std::vector<double> t;
  std::vector<double> v;
  int order = 1;
};

using CoefficientRule = std::variant<ConstantRule, PolynomialRule, TableRule>;

struct Piece {
  double t0 = 0;
  double t1 = 0;
  CoefficientRule rule;
};

namespace detail {

inline double eval_rule(const ConstantRule& r, double) { return r.value; }

inline double eval_rule(const PolynomialRule& r, double t) {
  double acc = 0;
  for (auto it = r.coeffs.rbegin(); it != r.coeffs.rend(); ++it) acc = acc * t + *it;
  return acc;
}

inline double eval_rule(const TableRule& r, double t) {
  const auto n = static_cast<std::ptrdiff_t>(r.t.size());
  const auto upper = std::upper_bound(r.t.begin(), r.t.end(), t) - r.t.begin();
  const std::ptrdiff_t cell = std::clamp<std::ptrdiff_t>(upper - 1, 0, n - 2);
  const int npts = std::min<int>(r.order + 1, static_cast<int>(n));
  // Stencil roughly centred on [t_cell, t_cell+1].
  std::ptrdiff_t first = cell - (npts - 2) / 2;
  first = std::clamp<std::ptrdiff_t>(first, 0, n - npts);
  double acc = 0;
  for (int i = 0; i < npts; ++i) {
    double basis = 1;
    const auto ii = first + i;
    for (int j = 0; j < npts; ++j) {
      if (j == i) continue;
      const auto jj = first + j;
      basis *= (t - r.t[jj]) / (r.t[ii] - r.t[jj]);
    }
    acc += basis * r.v[ii];
  }
  return acc;
}

inline bool rule_is_zero(const CoefficientRule& rule) {
  return std::visit(
      [](const auto& r) {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, ConstantRule>) {
          return r.value == 0;
        } else if constexpr (std::is_same_v<R, PolynomialRule>) {
          return std::all_of(r.coeffs.begin(), r.coeffs.end(), [](double c) { return c == 0; });
        } else {
          return std::all_of(r.v.begin(), r.v.end(), [](double c) { return c == 0; });
        }
      },
      rule);
}

inline void hash_mix(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
}

inline void hash_double(std::uint64_t& h, double x) { hash_mix(h, &x, sizeof x); }

}  // namespace detail

/// Piecewise coefficient: an ordered list of pieces with disjoint interiors.
class CoefficientFn {
 public:
  CoefficientFn() = default;

  explicit CoefficientFn(std::vector<Piece> pieces) : pieces_(std::move(pieces)) {
    std::sort(pieces_.begin(), pieces_.end(), [](const Piece& x, const Piece& y) { return x.t0 < y.t0; });
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      const auto& pc = pieces_[i];
      if (!(pc.t0 < pc.t1)) throw ConfigError("coefficient piece with empty or reversed subinterval");
      if (i > 0 && pc.t0 < pieces_[i - 1].t1) throw ConfigError("coefficient pieces overlap");
      if (const auto* tab = std::get_if<TableRule>(&pc.rule)) validate_table(*tab, pc);
      if (const auto* poly = std::get_if<PolynomialRule>(&pc.rule); poly && poly->coeffs.empty())
        throw ConfigError("polynomial rule needs at least one coefficient");
    }
  }

  static CoefficientFn constant(double a, double b, double value) {
    return CoefficientFn({Piece{a, b, ConstantRule{value}}});
  }

  std::span<const Piece> pieces() const { return pieces_; }
  bool empty() const { return pieces_.empty(); }

  /// Index of the piece used at t. Interior breakpoints belong to the piece on the right.
  std::size_t piece_index(double t) const {
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), t,
                               [](double x, const Piece& pc) { return x < pc.t0; });
    if (it == pieces_.begin()) return 0;
    return static_cast<std::size_t>(it - pieces_.begin()) - 1;
  }

  double eval_piece(std::size_t i, double t) const {
    return std::visit([t](const auto& r) { return detail::eval_rule(r, t); }, pieces_[i].rule);
  }

  double operator()(double t) const { return eval_piece(piece_index(t), t); }

  bool piece_is_zero(std::size_t i) const { return detail::rule_is_zero(pieces_[i].rule); }

  /// Piece endpoints plus interior table abscissae: every point where the
  /// coefficient may lose smoothness.
  std::vector<double> breakpoints() const {
    std::vector<double> out;
    for (const auto& pc : pieces_) {
      out.push_back(pc.t0);
      out.push_back(pc.t1);
      if (const auto* tab = std::get_if<TableRule>(&pc.rule))
        for (double t : tab->t)
          if (t > pc.t0 && t < pc.t1) out.push_back(t);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  void hash_into(std::uint64_t& h) const {
    for (const auto& pc : pieces_) {
      detail::hash_double(h, pc.t0);
      detail::hash_double(h, pc.t1);
      const auto idx = pc.rule.index();
      detail::hash_mix(h, &idx, sizeof idx);
      std::visit(
          [&h](const auto& r) {
            using R = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<R, ConstantRule>) {
              detail::hash_double(h, r.value);
            } else if constexpr (std::is_same_v<R, PolynomialRule>) {
              for (double c : r.coeffs) detail::hash_double(h, c);
            } else {
              for (double c : r.t) detail::hash_double(h, c);
              for (double c : r.v) detail::hash_double(h, c);
              detail::hash_mix(h, &r.order, sizeof r.order);
            }
          },
          pc.rule);
    }
  }

 private:
  static void validate_table(const TableRule& tab, const Piece& pc) {
    if (tab.t.size() != tab.v.size() || tab.t.size() < 2)
      throw ConfigError("table rule needs at least two (t, value) samples");
    if (tab.order < 1 || tab.order > 5) throw ConfigError("table interpolation order must be in 1..5");
    if (!std::is_sorted(tab.t.begin(), tab.t.end()) ||
        std::adjacent_find(tab.t.begin(), tab.t.end()) != tab.t.end())
      throw ConfigError("table abscissae must be strictly increasing");
    if (tab.t.front() > pc.t0 || tab.t.back() < pc.t1)
      throw ConfigError("table rule does not cover its piece");
  }

  std::vector<Piece> pieces_;
};

/// A maximal subinterval on which p, q and Delta are each given by a single
/// smooth rule.
struct Segment {
  double t0, t1;
  std::size_t p_piece, q_piece, delta_piece;
  bool delta_zero;
};

/// Regular Sturm-Liouville problem with semi-definite weight. Immutable.
class SLProblem {
 public:
  /// Validates every invariant; throws ConfigError with a one-line reason.
  SLProblem(double a, double b, double alpha, CoefficientFn p, CoefficientFn q, CoefficientFn delta,
            QuadConfig quad = {})
      : a_(a), b_(b), alpha_(alpha), p_(std::move(p)), q_(std::move(q)), delta_(std::move(delta)), quad_(quad) {
    if (!std::isfinite(a_) || !std::isfinite(b_)) throw ConfigError("interval endpoints must be finite");
    if (!(a_ < b_)) throw ConfigError("degenerate interval: require a < b");
    if (!std::isfinite(alpha_)) throw ConfigError("alpha must be finite");
    quad_.validate();
    check_cover(p_, "p");
    check_cover(q_, "q");
    check_cover(delta_, "delta");
    build_segments();
    check_values();
    if (weight_support_measure() <= 0) throw ConfigError("trivial weight: Delta vanishes almost everywhere");
    compute_hash();
  }

  double a() const { return a_; }
  double b() const { return b_; }
  double alpha() const { return alpha_; }
  const CoefficientFn& p() const { return p_; }
  const CoefficientFn& q() const { return q_; }
  const CoefficientFn& delta() const { return delta_; }
  const QuadConfig& quad() const { return quad_; }
  std::span<const Segment> segments() const { return segments_; }
  std::uint64_t hash() const { return hash_; }

  /// Copy with different tolerances (segments and validation are reused).
  SLProblem with_quad(const QuadConfig& quad) const {
    quad.validate();
    SLProblem copy = *this;
    copy.quad_ = quad;
    copy.compute_hash();
    return copy;
  }

  double p_at(const Segment& s, double t) const { return p_.eval_piece(s.p_piece, t); }
  double q_at(const Segment& s, double t) const { return q_.eval_piece(s.q_piece, t); }
  double delta_at(const Segment& s, double t) const {
    return s.delta_zero ? 0.0 : delta_.eval_piece(s.delta_piece, t);
  }

  /// Lebesgue measure of {Delta > 0}: total length of pieces whose rule is not identically zero.
  double weight_support_measure() const {
    double m = 0;
    for (std::size_t i = 0; i < delta_.pieces().size(); ++i)
      if (!delta_.piece_is_zero(i)) m += delta_.pieces()[i].t1 - delta_.pieces()[i].t0;
    return m;
  }

 private:
  void check_cover(const CoefficientFn& f, const char* name) const {
    const auto ps = f.pieces();
    if (ps.empty()) throw ConfigError(std::string("coefficient ") + name + " has no pieces");
    if (ps.front().t0 != a_ || ps.back().t1 != b_)
      throw ConfigError(std::string("coefficient ") + name + " does not cover [a, b]");
    for (std::size_t i = 1; i < ps.size(); ++i)
      if (ps[i].t0 != ps[i - 1].t1) throw ConfigError(std::string("coefficient ") + name + " has a gap");
  }

  void build_segments() {
    std::vector<double> cuts;
    for (const auto* f : {&p_, &q_, &delta_}) {
      auto bp = f->breakpoints();
      cuts.insert(cuts.end(), bp.begin(), bp.end());
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
      Segment s{cuts[i], cuts[i + 1], p_.piece_index(mid), q_.piece_index(mid), delta_.piece_index(mid), false};
      s.delta_zero = delta_.piece_is_zero(s.delta_piece);
      segments_.push_back(s);
    }
  }

  void check_values() const {
    constexpr int kSamples = 33;
    for (std::size_t i = 0; i < p_.pieces().size(); ++i)
      if (p_.piece_is_zero(i)) throw ConfigError("p vanishes identically on a piece; 1/p is not integrable");
    for (const auto& s : segments_) {
      int p_sign = 0;
      for (int k = 0; k <= kSamples; ++k) {
        const double t = s.t0 + (s.t1 - s.t0) * k / kSamples;
        const double pv = p_at(s, t), qv = q_at(s, t), dv = delta_at(s, t);
        if (!std::isfinite(pv) || !std::isfinite(qv) || !std::isfinite(dv))
          throw ConfigError("non-finite coefficient value at t = " + std::to_string(t));
        if (dv < 0) throw ConfigError("Delta negative at t = " + std::to_string(t));
        if (pv == 0) throw ConfigError("p vanishes at t = " + std::to_string(t));
        const int sign = pv > 0 ? 1 : -1;
        if (p_sign != 0 && sign != p_sign)
          throw ConfigError("p changes sign inside a piece near t = " + std::to_string(t));
        p_sign = sign;
      }
      // Finite integrals of |1/p|, |q|, |Delta| on every segment.
      for (int which = 0; which < 3; ++which) {
        auto integrand = [&](double t) {
          switch (which) {
            case 0: return std::abs(1.0 / p_at(s, t));
            case 1: return std::abs(q_at(s, t));
            default: return std::abs(delta_at(s, t));
          }
        };
        QuadResult<double> r;
        try {
          r = integrate<double>(integrand, s.t0, s.t1, quad_);
        } catch (const QuadratureError&) {
          throw ConfigError("coefficient not integrable on [" + std::to_string(s.t0) + ", " +
                            std::to_string(s.t1) + "]");
        }
        if (!std::isfinite(r.value))
          throw ConfigError("coefficient not integrable on [" + std::to_string(s.t0) + ", " +
                            std::to_string(s.t1) + "]");
      }
    }
  }

  void compute_hash() {
    std::uint64_t h = 1469598103934665603ULL;
    detail::hash_double(h, a_);
    detail::hash_double(h, b_);
    detail::hash_double(h, alpha_);
    p_.hash_into(h);
    q_.hash_into(h);
    delta_.hash_into(h);
    detail::hash_double(h, quad_.ode_tol);
    hash_ = h;
  }

  double a_, b_, alpha_;
  CoefficientFn p_, q_, delta_;
  QuadConfig quad_;
  std::vector<Segment> segments_;
  std::uint64_t hash_ = 0;
};

inline double weight_support_measure(const SLProblem& problem) { return problem.weight_support_measure(); }

/// Same measure for a bare weight coefficient, which may be trivial.
inline double weight_support_measure(const CoefficientFn& delta) {
  double m = 0;
  for (std::size_t i = 0; i < delta.pieces().size(); ++i)
    if (!delta.piece_is_zero(i)) m += delta.pieces()[i].t1 - delta.pieces()[i].t0;
  return m;
}

/// (f, g)_Delta = int_a^b Delta f conj(g) dt, split at every coefficient breakpoint.
/// Segments where Delta vanishes identically contribute exactly zero.
template <class F, class G>
cplx delta_inner(const SLProblem& problem, F&& f, G&& g) {
  cplx total = 0;
  for (const auto& s : problem.segments()) {
    if (s.delta_zero) continue;
    auto integrand = [&](double t) -> cplx {
      return problem.delta_at(s, t) * cplx(f(t)) * std::conj(cplx(g(t)));
    };
    total += integrate<cplx>(integrand, s.t0, s.t1, problem.quad()).value;
  }
  return total;
}

/// ||f||_Delta^2.
template <class F>
double delta_norm_sq(const SLProblem& problem, F&& f) {
  return std::max(0.0, delta_inner(problem, f, f).real());
}

}  // namespace slspec
