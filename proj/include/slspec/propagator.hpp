#pragma once

// Fundamental solutions of -(p y')' + q y = lambda Delta y, written as the
// first-order system y' = y1 / p, y1' = (q - lambda Delta) y with y1 = p y'.
//
// The integrator is the Dormand-Prince 8(5,3) pair with continuous output.
// Every coefficient breakpoint starts a fresh step sequence so no step ever
// straddles a kink in p, q or Delta.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "slspec/error.hpp"
#include "slspec/problem.hpp"

namespace slspec {

/// Solution value and quasi-derivative y1 = p y'.
struct StateVec {
  cplx y{};
  cplx y1{};
};

template <std::size_t N>
using StateN = std::array<cplx, N>;

/// One accepted step with its interpolation coefficients.
template <std::size_t N>
struct DenseStep {
  double t0 = 0;
  double h = 0;
  std::array<StateN<N>, 8> r{};

  StateN<N> eval(double t) const {
    const double s = (t - t0) / h;
    const double s1 = 1.0 - s;
    StateN<N> x;
    for (std::size_t i = 0; i < N; ++i)
      x[i] = r[0][i] +
             s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * (r[4][i] + s * (r[5][i] + s1 * (r[6][i] + s * r[7][i]))))));
    return x;
  }
  StateN<N> end() const {
    StateN<N> x;
    for (std::size_t i = 0; i < N; ++i) x[i] = r[0][i] + r[1][i];
    return x;
  }
};

namespace detail {

struct Dop853Coeffs {
  static constexpr double c2 = 0.05260015195876773187856, c3 = 0.07890022793815159781784,
                          c4 = 0.11835034190722739672676, c5 = 0.28164965809277260327324,
                          c6 = 0.33333333333333333333333, c7 = 0.25, c8 = 0.30769230769230769230769,
                          c9 = 0.65128205128205128205128, c10 = 0.6, c11 = 0.85714285714285714285714;
  static constexpr double b1 = 0.05429373411656876223805, b6 = 4.45031289275240888144114,
                          b7 = 1.89151789931450038304282, b8 = -5.80120396001058478146721,
                          b9 = 0.31116436695781989440892, b10 = -0.15216094966251607855618,
                          b11 = 0.20136540080403034837478, b12 = 0.04471061572777259051769;
  static constexpr double bhh1 = 0.24409448818897637795276, bhh2 = 0.73384668828161185734136,
                          bhh3 = 0.02205882352941176470588;
  static constexpr double er1 = 0.01312004499419488073250, er6 = -1.22515644637620444072057,
                          er7 = -0.49575894965725019152141, er8 = 1.66437718245498653696153,
                          er9 = -0.35032884874997368168865, er10 = 0.33417911871301747902973,
                          er11 = 0.08192320648511571246571, er12 = -0.02235530786388629525884;
  static constexpr double a21 = 0.05260015195876773187856, a31 = 0.01972505698453789945446,
                          a32 = 0.05917517095361369836338, a41 = 0.02958758547680684918169,
                          a43 = 0.08876275643042054754507, a51 = 0.24136513415926668550237,
                          a53 = -0.88454947932828608534486, a54 = 0.92483400326179200311574,
                          a61 = 0.03703703703703703703704, a64 = 0.17082860872947387127960,
                          a65 = 0.12546768756682242501669, a71 = 0.037109375, a74 = 0.17025221101954403931498,
                          a75 = 0.06021653898045596068502, a76 = -0.017578125,
                          a81 = 0.03709200011850479271088, a84 = 0.17038392571223999381021,
                          a85 = 0.10726203044637328465181, a86 = -0.01531943774862440175279,
                          a87 = 0.00827378916381402288758, a91 = 0.62411095871607571711443,
                          a94 = -3.36089262944694129406857, a95 = -0.86821934684172600681819,
                          a96 = 27.5920996994467083049416, a97 = 20.1540675504778934086187,
                          a98 = -43.4898841810699588477366, a101 = 0.47766253643826436589043,
                          a104 = -2.48811461997166764192642, a105 = -0.59029082683684299637145,
                          a106 = 21.2300514481811942347289, a107 = 15.2792336328824235832597,
                          a108 = -33.2882109689848629194453, a109 = -0.02033120170850862613582,
                          a111 = -0.93714243008598732571704, a114 = 5.18637242884406370830024,
                          a115 = 1.09143734899672957818500, a116 = -8.14978701074692612513997,
                          a117 = -18.5200656599969598641566, a118 = 22.7394870993505042818970,
                          a119 = 2.49360555267965238987089, a1110 = -3.04676447189821950038237,
                          a121 = 2.27331014751653820792360, a124 = -10.5344954667372501984067,
                          a125 = -2.00087205822486249909676, a126 = -17.9589318631187989172766,
                          a127 = 27.9488845294199600508500, a128 = -2.85899827713502369474066,
                          a129 = -8.87285693353062954433549, a1210 = 12.3605671757943030647266,
                          a1211 = 0.64339274601576353035597;
  // Three extra stages (c = 0.1, 0.2, 7/9) and the seventh-order continuous
  // extension built on them; index j multiplies stage j + 1, with index 12
  // being f(t + h, y_new).
  static constexpr double c_extra[3] = {0.1, 0.2, 0.777777777777777777777777777778};
  static constexpr double a_extra[3][16] = {
      {5.61675022830479523392909219681e-2, 0.0, 0.0, 0.0, 0.0, 0.0, 2.53500210216624811088794765333e-1, -2.46239037470802489917441475441e-1, -1.24191423263816360469010140626e-1, 1.5329179827876569731206322685e-1, 8.20105229563468988491666602057e-3, 7.56789766054569976138603589584e-3, -8.298e-3, 0.0, 0.0, 0.0},
      {3.18346481635021405060768473261e-2, 0.0, 0.0, 0.0, 0.0, 2.83009096723667755288322961402e-2, 5.35419883074385676223797384372e-2, -5.49237485713909884646569340306e-2, 0.0, 0.0, -1.08347328697249322858509316994e-4, 3.82571090835658412954920192323e-4, -3.40465008687404560802977114492e-4, 1.41312443674632500278074618366e-1, 0.0, 0.0},
      {-4.28896301583791923408573538692e-1, 0.0, 0.0, 0.0, 0.0, -4.69762141536116384314449447206, 7.68342119606259904184240953878, 4.06898981839711007970213554331, 3.56727187455281109270669543021e-1, 0.0, 0.0, 0.0, -1.39902416515901462129418009734e-3, 2.9475147891527723389556272149, -9.15095847217987001081870187138, 0.0},
  };
  static constexpr double dense[4][16] = {
      {-0.84289382761090128651353491142e+1, 0.0, 0.0, 0.0, 0.0, 0.56671495351937776962531783590, -0.30689499459498916912797304727e+1, 0.23846676565120698287728149680e+1, 0.21170345824450282767155149946e+1, -0.87139158377797299206789907490, 0.22404374302607882758541771650e+1, 0.63157877876946881815570249290, -0.88990336451333310820698117400e-1, 0.18148505520854727256656404962e+2, -0.91946323924783554000451984436e+1, -0.44360363875948939664310572000e+1},
      {0.10427508642579134603413151009e+2, 0.0, 0.0, 0.0, 0.0, 0.24228349177525818288430175319e+3, 0.16520045171727028198505394887e+3, -0.37454675472269020279518312152e+3, -0.22113666853125306036270938578e+2, 0.77334326684722638389603898808e+1, -0.30674084731089398182061213626e+2, -0.93321305264302278729567221706e+1, 0.15697238121770843886131091075e+2, -0.31139403219565177677282850411e+2, -0.93529243588444783865713862664e+1, 0.35816841486394083752465898540e+2},
      {0.19985053242002433820987653617e+2, 0.0, 0.0, 0.0, 0.0, -0.38703730874935176555105901742e+3, -0.18917813819516756882830838328e+3, 0.52780815920542364900561016686e+3, -0.11573902539959630126141871134e+2, 0.68812326946963000169666922661e+1, -0.10006050966910838403183860980e+1, 0.77771377980534432092869265740, -0.27782057523535084065932004339e+1, -0.60196695231264120758267380846e+2, 0.84320405506677161018159903784e+2, 0.11992291136182789328035130030e+2},
      {-0.25693933462703749003312586129e+2, 0.0, 0.0, 0.0, 0.0, -0.15418974869023643374053993627e+3, -0.23152937917604549567536039109e+3, 0.35763911791061412378285349910e+3, 0.93405324183624310003907691704e+2, -0.37458323136451633156875139351e+2, 0.10409964950896230045147246184e+3, 0.29840293426660503123344363579e+2, -0.43533456590011143754432175058e+2, 0.96324553959188282948394950600e+2, -0.39177261675615439165231486172e+2, -0.14972683625798562581422125276e+3},
  };
};

template <std::size_t N>
class Dop853 {
 public:
  Dop853(const SLProblem& problem, cplx lambda) : pb_(problem), lambda_(lambda) {
    const double tol = problem.quad().ode_tol;
    rtol_ = tol;
    atol_ = tol;
  }

  /// Integrates from a to b starting at y, handing every accepted step to
  /// observe(const DenseStep<N>&) when observe is not null.
  template <class Observer>
  StateN<N> run(StateN<N> y, Observer&& observe) {
    for (const auto& seg : pb_.segments()) {
      seg_ = &seg;
      y = run_segment(seg.t0, seg.t1, y, observe);
    }
    return y;
  }

 private:
  void rhs(double t, const StateN<N>& y, StateN<N>& dy) const {
    const double inv_p = 1.0 / pb_.p_at(*seg_, t);
    const cplx pot = pb_.q_at(*seg_, t) - lambda_ * pb_.delta_at(*seg_, t);
    for (std::size_t i = 0; i < N; i += 2) {
      dy[i] = y[i + 1] * inv_p;
      dy[i + 1] = pot * y[i];
    }
  }

  double weight(const cplx& a, const cplx& b) const { return atol_ + rtol_ * std::max(std::abs(a), std::abs(b)); }

  double initial_step(double t, double span, const StateN<N>& y, const StateN<N>& f0) const {
    double d0 = 0, d1 = 0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sk = weight(y[i], y[i]);
      d0 += std::norm(y[i]) / (sk * sk);
      d1 += std::norm(f0[i]) / (sk * sk);
    }
    double h0 = (d0 <= 1e-10 || d1 <= 1e-10) ? 1e-6 * span : 0.01 * std::sqrt(d0 / d1);
    h0 = std::min(h0, span);
    StateN<N> y1, f1;
    for (std::size_t i = 0; i < N; ++i) y1[i] = y[i] + h0 * f0[i];
    rhs(t + h0, y1, f1);
    double d2 = 0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sk = weight(y[i], y[i]);
      d2 += std::norm(f1[i] - f0[i]) / (sk * sk);
    }
    d2 = std::sqrt(d2) / h0;
    const double dmax = std::max(std::sqrt(d1), d2);
    const double h1 = dmax <= 1e-15 ? std::max(1e-6 * span, h0 * 1e-3) : std::pow(0.01 / dmax, 1.0 / 8);
    return std::min({100 * h0, h1, span});
  }

  template <class Observer>
  StateN<N> run_segment(double t, double t_end, StateN<N> y, Observer& observe) {
    using C = Dop853Coeffs;
    const double span = t_end - t;
    StateN<N> k1, k2, k3, k4, k5, k6, k7, k8, k9, k10, k11, k12, k13, tmp, ynew;
    rhs(t, y, k1);
    // Fresh start per segment: the previous segment's step says nothing about this one.
    double h = initial_step(t, span, y, k1);
    bool last = false;
    constexpr double safe = 0.9, fac1 = 0.333, fac2 = 6.0;
    while (!last) {
      if (++steps_ > kMaxSteps) throw PropagationError("step budget exhausted (blow-up or stiffness)");
      if (h < 1e-14 * std::max(1.0, std::abs(t)) || !std::isfinite(h))
        throw PropagationError("step size underflow at t = " + std::to_string(t));
      if (t + 1.01 * h >= t_end) {
        h = t_end - t;
        last = true;
      }
      auto stage = [&](double c, auto&& combine, StateN<N>& k) {
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * combine(i);
        rhs(t + c * h, tmp, k);
      };
      stage(C::c2, [&](std::size_t i) { return C::a21 * k1[i]; }, k2);
      stage(C::c3, [&](std::size_t i) { return C::a31 * k1[i] + C::a32 * k2[i]; }, k3);
      stage(C::c4, [&](std::size_t i) { return C::a41 * k1[i] + C::a43 * k3[i]; }, k4);
      stage(C::c5, [&](std::size_t i) { return C::a51 * k1[i] + C::a53 * k3[i] + C::a54 * k4[i]; }, k5);
      stage(C::c6, [&](std::size_t i) { return C::a61 * k1[i] + C::a64 * k4[i] + C::a65 * k5[i]; }, k6);
      stage(C::c7, [&](std::size_t i) { return C::a71 * k1[i] + C::a74 * k4[i] + C::a75 * k5[i] + C::a76 * k6[i]; },
            k7);
      stage(C::c8,
            [&](std::size_t i) {
              return C::a81 * k1[i] + C::a84 * k4[i] + C::a85 * k5[i] + C::a86 * k6[i] + C::a87 * k7[i];
            },
            k8);
      stage(C::c9,
            [&](std::size_t i) {
              return C::a91 * k1[i] + C::a94 * k4[i] + C::a95 * k5[i] + C::a96 * k6[i] + C::a97 * k7[i] +
                     C::a98 * k8[i];
            },
            k9);
      stage(C::c10,
            [&](std::size_t i) {
              return C::a101 * k1[i] + C::a104 * k4[i] + C::a105 * k5[i] + C::a106 * k6[i] + C::a107 * k7[i] +
                     C::a108 * k8[i] + C::a109 * k9[i];
            },
            k10);
      stage(C::c11,
            [&](std::size_t i) {
              return C::a111 * k1[i] + C::a114 * k4[i] + C::a115 * k5[i] + C::a116 * k6[i] + C::a117 * k7[i] +
                     C::a118 * k8[i] + C::a119 * k9[i] + C::a1110 * k10[i];
            },
            k11);
      stage(1.0,
            [&](std::size_t i) {
              return C::a121 * k1[i] + C::a124 * k4[i] + C::a125 * k5[i] + C::a126 * k6[i] + C::a127 * k7[i] +
                     C::a128 * k8[i] + C::a129 * k9[i] + C::a1210 * k10[i] + C::a1211 * k11[i];
            },
            k12);
      StateN<N> bsum;
      for (std::size_t i = 0; i < N; ++i) {
        bsum[i] = C::b1 * k1[i] + C::b6 * k6[i] + C::b7 * k7[i] + C::b8 * k8[i] + C::b9 * k9[i] + C::b10 * k10[i] +
                  C::b11 * k11[i] + C::b12 * k12[i];
        ynew[i] = y[i] + h * bsum[i];
      }
      double err = 0, err2 = 0;
      for (std::size_t i = 0; i < N; ++i) {
        const double sk = weight(y[i], ynew[i]);
        const cplx e2 = bsum[i] - C::bhh1 * k1[i] - C::bhh2 * k9[i] - C::bhh3 * k12[i];
        const cplx e1 = C::er1 * k1[i] + C::er6 * k6[i] + C::er7 * k7[i] + C::er8 * k8[i] + C::er9 * k9[i] +
                        C::er10 * k10[i] + C::er11 * k11[i] + C::er12 * k12[i];
        err2 += std::norm(e2) / (sk * sk);
        err += std::norm(e1) / (sk * sk);
      }
      double deno = err + 0.01 * err2;
      if (deno <= 0) deno = 1;
      err = std::abs(h) * err / std::sqrt(deno * static_cast<double>(N));
      if (!std::isfinite(err)) {
        for (const auto& v : ynew)
          if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw PropagationError("non-finite state at t = " + std::to_string(t));
        err = 1e10;
      }
      double fac = std::pow(err, 1.0 / 8);
      fac = std::max(1.0 / fac2, std::min(1.0 / fac1, fac / safe));
      if (err <= 1.0) {
        rhs(t + h, ynew, k13);
        if constexpr (!std::is_same_v<std::decay_t<Observer>, std::nullptr_t>) {
          std::array<const StateN<N>*, 16> K = {&k1, &k2, &k3, &k4, &k5, &k6, &k7, &k8,
                                                &k9, &k10, &k11, &k12, &k13, nullptr, nullptr, nullptr};
          std::array<StateN<N>, 3> kx;
          for (int e = 0; e < 3; ++e) {
            for (std::size_t i = 0; i < N; ++i) {
              cplx acc = 0;
              for (int j = 0; j < 13 + e; ++j)
                if (C::a_extra[e][j] != 0) acc += C::a_extra[e][j] * (*K[j])[i];
              tmp[i] = y[i] + h * acc;
            }
            rhs(t + C::c_extra[e] * h, tmp, kx[e]);
            K[13 + e] = &kx[e];
          }
          DenseStep<N> ds;
          ds.t0 = t;
          ds.h = h;
          for (std::size_t i = 0; i < N; ++i) {
            const cplx ydiff = ynew[i] - y[i];
            const cplx bspl = h * k1[i] - ydiff;
            ds.r[0][i] = y[i];
            ds.r[1][i] = ydiff;
            ds.r[2][i] = bspl;
            ds.r[3][i] = ydiff - h * k13[i] - bspl;
            for (int row = 0; row < 4; ++row) {
              cplx acc = 0;
              for (int j = 0; j < 16; ++j)
                if (C::dense[row][j] != 0) acc += C::dense[row][j] * (*K[j])[i];
              ds.r[4 + row][i] = h * acc;
            }
          }
          observe(ds);
        }
        k1 = k13;
        y = ynew;
        t = last ? t_end : t + h;
        h /= fac;
      } else {
        h /= std::min(1.0 / fac1, fac / safe);
        last = false;
      }
    }
    return y;
  }

  static constexpr long kMaxSteps = 2'000'000;

  const SLProblem& pb_;
  cplx lambda_;
  const Segment* seg_ = nullptr;
  double rtol_, atol_;
  long steps_ = 0;
};

inline double snap_to_zero(double x) { return std::abs(x) < 1e-15 ? 0.0 : x; }

}  // namespace detail

/// phi(a) = -sin(alpha), phi1(a) = cos(alpha).
inline StateVec phi_initial(const SLProblem& problem) {
  return {-detail::snap_to_zero(std::sin(problem.alpha())), detail::snap_to_zero(std::cos(problem.alpha()))};
}

/// psi(a) = -cos(alpha), psi1(a) = -sin(alpha).
inline StateVec psi_initial(const SLProblem& problem) {
  return {-detail::snap_to_zero(std::cos(problem.alpha())), -detail::snap_to_zero(std::sin(problem.alpha()))};
}

/// Densely sampled solution of the system for one spectral parameter.
class Trajectory {
 public:
  struct Node {
    double t;
    StateVec state;
  };

  Trajectory(cplx lambda, double a, double b, std::vector<DenseStep<2>> steps)
      : lambda_(lambda), a_(a), b_(b), steps_(std::move(steps)) {}

  cplx lambda() const { return lambda_; }
  double a() const { return a_; }
  double b() const { return b_; }
  std::size_t step_count() const { return steps_.size(); }

  /// Step boundaries, first at a and last at b.
  std::vector<Node> nodes() const {
    std::vector<Node> out;
    out.reserve(steps_.size() + 1);
    for (const auto& s : steps_) out.push_back({s.t0, {s.r[0][0], s.r[0][1]}});
    const auto e = steps_.back().end();
    out.push_back({b_, {e[0], e[1]}});
    return out;
  }

  /// Continuous-extension value at any t in [a, b].
  StateVec at(double t) const {
    if (t < a_ || t > b_) throw ConfigError("evaluation point outside [a, b]");
    auto it = std::upper_bound(steps_.begin(), steps_.end(), t,
                               [](double x, const DenseStep<2>& s) { return x < s.t0; });
    if (it != steps_.begin()) --it;
    if (t == b_) {
      const auto e = steps_.back().end();
      return {e[0], e[1]};
    }
    const auto v = it->eval(t);
    return {v[0], v[1]};
  }

  StateVec end() const { return at(b_); }

 private:
  cplx lambda_;
  double a_, b_;
  std::vector<DenseStep<2>> steps_;
};

/// Integrates from a to b with initial data init. Pure.
inline Trajectory propagate(const SLProblem& problem, cplx lambda, StateVec init) {
  if (!std::isfinite(init.y.real()) || !std::isfinite(init.y.imag()) || !std::isfinite(init.y1.real()) ||
      !std::isfinite(init.y1.imag()))
    throw ConfigError("initial state must be finite");
  std::vector<DenseStep<2>> steps;
  detail::Dop853<2> solver(problem, lambda);
  solver.run(StateN<2>{init.y, init.y1}, [&](const DenseStep<2>& s) { steps.push_back(s); });
  return Trajectory(lambda, problem.a(), problem.b(), std::move(steps));
}

/// Value at b only; no interpolation data is kept.
inline StateVec propagate_to_end(const SLProblem& problem, cplx lambda, StateVec init) {
  detail::Dop853<2> solver(problem, lambda);
  const auto y = solver.run(StateN<2>{init.y, init.y1}, nullptr);
  return {y[0], y[1]};
}

/// phi and psi together with their quasi-derivatives at b.
struct EndpointData {
  cplx phi, phi1, psi, psi1;
};

namespace detail {

struct CacheKey {
  std::uint64_t problem;
  double re, im;
  int which;
  bool operator==(const CacheKey&) const = default;
};

struct CacheKeyHash {
  std::size_t operator()(const CacheKey& k) const {
    std::uint64_t h = k.problem;
    hash_double(h, k.re);
    hash_double(h, k.im);
    hash_mix(h, &k.which, sizeof k.which);
    return static_cast<std::size_t>(h);
  }
};

/// Bounded, mutex-protected memo table; oldest entries are evicted first.
template <class V>
class BoundedCache {
 public:
  explicit BoundedCache(std::size_t capacity) : capacity_(capacity) {}

  template <class Make>
  V get_or_make(const CacheKey& key, Make&& make) {
    {
      std::lock_guard lock(mutex_);
      if (auto it = map_.find(key); it != map_.end()) return it->second;
    }
    V value = make();
    std::lock_guard lock(mutex_);
    if (map_.emplace(key, value).second) {
      order_.push_back(key);
      if (order_.size() > capacity_) {
        map_.erase(order_.front());
        order_.pop_front();
      }
    }
    return value;
  }

  void clear() {
    std::lock_guard lock(mutex_);
    map_.clear();
    order_.clear();
  }

 private:
  std::size_t capacity_;
  std::mutex mutex_;
  std::unordered_map<CacheKey, V, CacheKeyHash> map_;
  std::list<CacheKey> order_;
};

inline BoundedCache<std::shared_ptr<const Trajectory>>& trajectory_cache() {
  static BoundedCache<std::shared_ptr<const Trajectory>> cache(128);
  return cache;
}

inline BoundedCache<EndpointData>& endpoint_cache() {
  static BoundedCache<EndpointData> cache(1 << 16);
  return cache;
}

}  // namespace detail

/// Cached trajectory of phi (which = 0) or psi (which = 1).
inline std::shared_ptr<const Trajectory> cached_trajectory(const SLProblem& problem, cplx lambda, int which) {
  return detail::trajectory_cache().get_or_make({problem.hash(), lambda.real(), lambda.imag(), which}, [&] {
    const auto init = which == 0 ? phi_initial(problem) : psi_initial(problem);
    return std::make_shared<const Trajectory>(propagate(problem, lambda, init));
  });
}

inline StateVec phi_at(const SLProblem& problem, cplx lambda, double t) {
  return cached_trajectory(problem, lambda, 0)->at(t);
}

inline StateVec psi_at(const SLProblem& problem, cplx lambda, double t) {
  return cached_trajectory(problem, lambda, 1)->at(t);
}

/// phi psi1 - phi1 psi; identically 1 for exact solutions.
inline cplx wronskian(const SLProblem& problem, cplx lambda, double t) {
  const auto f = phi_at(problem, lambda, t);
  const auto g = psi_at(problem, lambda, t);
  return f.y * g.y1 - f.y1 * g.y;
}

/// phi, psi and quasi-derivatives at b from one coupled integration (cached).
inline EndpointData endpoint_data(const SLProblem& problem, cplx lambda) {
  return detail::endpoint_cache().get_or_make({problem.hash(), lambda.real(), lambda.imag(), 2}, [&] {
    const auto f = phi_initial(problem);
    const auto g = psi_initial(problem);
    detail::Dop853<4> solver(problem, lambda);
    const auto y = solver.run(StateN<4>{f.y, f.y1, g.y, g.y1}, nullptr);
    return EndpointData{y[0], y[1], y[2], y[3]};
  });
}

/// phi and phi1 at b only (single-solution integration, not cached).
inline StateVec phi_end(const SLProblem& problem, cplx lambda) {
  return propagate_to_end(problem, lambda, phi_initial(problem));
}

inline void clear_propagation_caches() {
  detail::trajectory_cache().clear();
  detail::endpoint_cache().clear();
}

}  // namespace slspec
