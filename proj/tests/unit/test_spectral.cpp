#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "slspec/config.hpp"
#include "slspec/example_suite.hpp"
#include "slspec/spectral.hpp"
#include "shooting_oracle.hpp"

using namespace slspec;
using std::numbers::pi;

namespace {

double a_k(int k) { return pi * pi * (k - 0.25) * (k - 0.25); }

}  // namespace

TEST(MFunction, SqrtOnNegativeAxis) {
  // sqrt(-1) = i: (i sinh 1 - cosh 1) / (i (cosh 1 + i sinh 1)) = tanh 2 + i sech 2
  const cplx m = m_function(free_problem(), sqrt_param(), -1.0);
  EXPECT_NEAR(m.real(), std::tanh(2.0), 1e-9);
  EXPECT_NEAR(m.imag(), 1 / std::cosh(2.0), 1e-9);
  EXPECT_NEAR(m.real(), 0.96403, 5e-6);
  EXPECT_NEAR(m.imag(), 0.26580, 5e-6);
}

TEST(MFunction, SqrtAtTwoI) {
  const cplx l(0, 2);
  const cplx exact = closed_form::sqrt_m(l);
  EXPECT_LE(std::abs(m_function(free_problem(), sqrt_param(), l) - exact), 1e-8 * std::abs(exact));
}

TEST(MFunction, NeumannLeadingBehaviour) {
  const auto pb = free_problem();
  for (double l : {1e-3, -1e-3, 1e-5}) {
    const cplx m = m_function(pb, BoundaryParam::constant(0), l);
    EXPECT_NEAR(m.real(), -1 / l, 1e-3 * std::abs(1 / l));
    EXPECT_NEAR(m.real(), -1 / l + 1.0 / 3, 1e-6 * (1 + std::abs(1 / l)));
  }
}

TEST(MFunction, AgreesWithClosedFormAtRandomPoints) {
  const auto pb = free_problem();
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> c(-100, 100);
  int n = 0;
  while (n < 100) {
    const cplx l(c(rng), c(rng));
    if (std::abs(l) > 100 || std::abs(l.imag()) < 0.1) continue;
    const cplx exact = closed_form::sqrt_m(l);
    EXPECT_LE(std::abs(m_function(pb, sqrt_param(), l) - exact), 1e-8 * std::abs(exact)) << l;
    ++n;
  }
}

TEST(MFunction, NevanlinnaProperty) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> re(-100, 100), im(0.05, 30);
  for (const auto& pb : {free_problem(), middle_third_problem()})
    for (const auto& tau : builtin_params())
      for (int i = 0; i < 50; ++i) {
        const cplx l(re(rng), im(rng));
        const cplx up = m_function(pb, tau, l);
        EXPECT_GE(up.imag(), -1e-8) << tau.name() << " " << l;
        EXPECT_LE(std::abs(m_function(pb, tau, std::conj(l)) - std::conj(up)), 1e-8 * std::max(1.0, std::abs(up)));
      }
}

TEST(MFunction, PoleAndInputErrors) {
  // phi1(b, 0) vanishes exactly for the Neumann problem.
  EXPECT_THROW(m_function(free_problem(), BoundaryParam::constant(0), 0.0), PoleProximityError);
  EXPECT_THROW(m_function(free_problem(), sqrt_param(), cplx(std::nan(""), 1)), ConfigError);
}

TEST(Density, Examples) {
  const auto pb = free_problem();
  EXPECT_NEAR(spectral_density(pb, sqrt_param(), -1), 1 / (pi * std::cosh(2.0)), 1e-5 / (pi * std::cosh(2.0)));
  EXPECT_NEAR(spectral_density(pb, sqrt_param(), -1), 0.0846074772, 1e-9);
  EXPECT_NEAR(spectral_density(pb, sqrt_param(), 1), 0.0, 1e-9);
  EXPECT_NEAR(spectral_density(pb, BoundaryParam::constant(0), -5), 0.0, 1e-9);
  for (double s : {-0.25, -4.0, -16.0})
    EXPECT_NEAR(spectral_density(pb, sqrt_param(), s), closed_form::sqrt_density(s),
                1e-5 * closed_form::sqrt_density(s));
}

TEST(Density, ScheduleValidation) {
  EXPECT_THROW(spectral_density(free_problem(), sqrt_param(), -1, {0.1, 0.05}), ConfigError);
  EXPECT_THROW(spectral_density(free_problem(), sqrt_param(), -1, {0.1, 0.2, 0.05}), ConfigError);
}

TEST(Eigenvalues, SqrtPoles) {
  const auto e = find_eigenvalues(free_problem(), sqrt_param(), 0, 100);
  ASSERT_EQ(e.size(), 3u);
  for (int k = 1; k <= 3; ++k) EXPECT_NEAR(e[k - 1], a_k(k), 1e-10 * a_k(k));
  EXPECT_NEAR(e[0], 5.5516524756, 1e-9);
  EXPECT_NEAR(e[1], 30.225663478, 1e-8);
  EXPECT_NEAR(e[2], 74.638883283, 1e-8);
}

TEST(Eigenvalues, NeumannAndDirichletRight) {
  const auto n = find_eigenvalues(free_problem(), BoundaryParam::constant(0), -1, 50);
  ASSERT_EQ(n.size(), 3u);
  EXPECT_NEAR(n[0], 0.0, 1e-10);
  EXPECT_NEAR(n[1], pi * pi, 1e-10 * pi * pi);
  EXPECT_NEAR(n[2], 4 * pi * pi, 1e-10 * 4 * pi * pi);
  const auto d = find_eigenvalues(free_problem(), BoundaryParam::infinity(), 0, 30);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_NEAR(d[0], pi * pi / 4, 1e-10 * d[0]);
  EXPECT_NEAR(d[1], 9 * pi * pi / 4, 1e-10 * d[1]);
}

TEST(Eigenvalues, CountUpToOneThousand) {
  int expected = 0;
  while (a_k(expected + 1) <= 1000) ++expected;
  EXPECT_EQ(static_cast<int>(find_eigenvalues(free_problem(), sqrt_param(), 0, 1000).size()), expected);
  int neumann = 0;
  while (neumann * neumann * pi * pi <= 1000) ++neumann;
  EXPECT_EQ(static_cast<int>(find_eigenvalues(free_problem(), BoundaryParam::constant(0), -1, 1000).size()), neumann);
}

TEST(Eigenvalues, MiddleThirdAgainstOracle) {
  const auto ref = oracle::eigenvalues(oracle::middle_third(), -1, 300, true);
  const auto got = find_eigenvalues(middle_third_problem(), BoundaryParam::constant(0), -1, 300);
  ASSERT_EQ(got.size(), ref.size());
  for (std::size_t k = 0; k < ref.size(); ++k) EXPECT_NEAR(got[k], ref[k], 1e-9 * (1 + ref[k]));
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(closed_form::middle_third_eigenvalues[k], ref[k], 1e-12 * (1 + ref[k]));
}

TEST(Eigenvalues, MaxCountAndRange) {
  EXPECT_EQ(find_eigenvalues(free_problem(), sqrt_param(), 0, 1000, 4).size(), 4u);
  EXPECT_THROW(find_eigenvalues(free_problem(), sqrt_param(), 10, 5), ConfigError);
}

TEST(PointMass, Examples) {
  const auto pb = free_problem();
  EXPECT_NEAR(point_mass(pb, sqrt_param(), a_k(1)), 2.0, 1e-6);
  EXPECT_NEAR(point_mass(pb, BoundaryParam::constant(0), 0.0), 1.0, 1e-6);
  EXPECT_NEAR(point_mass(pb, BoundaryParam::constant(0), pi * pi), 2.0, 1e-6);
}

TEST(PointMass, JumpTimesNormIsOne) {
  for (const auto& pb : {free_problem(), middle_third_problem()})
    for (const auto& tau : {BoundaryParam::constant(0), BoundaryParam::constant(3), BoundaryParam::infinity()})
      for (double s : find_eigenvalues(pb, tau, -30, 400)) {
        const auto traj = propagate(pb, s, phi_initial(pb));
        const double nsq = delta_norm_sq(pb, [&](double t) { return traj.at(t).y.real(); });
        EXPECT_NEAR(point_mass(pb, tau, s) * nsq, 1.0, 1e-6) << tau.name() << " s=" << s;
      }
}

TEST(SpectralFunction, SqrtWindow) {
  const auto sf = build_spectral_function(free_problem(), sqrt_param(), -50, 100, 64);
  ASSERT_EQ(sf.masses.size(), 3u);
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(sf.masses[k].s, a_k(k + 1), 1e-9 * a_k(k + 1));
    EXPECT_NEAR(sf.masses[k].jump, 2.0, 1e-6);
  }
  ASSERT_FALSE(sf.ac.empty());
  for (const auto& n : sf.ac) {
    EXPECT_LT(n.u, 0.0);
    EXPECT_GT(n.rho, 0.0);
    EXPECT_GE(n.lo, -50.0);
    EXPECT_LE(n.hi, 0.0);
    EXPECT_NEAR(n.rho, closed_form::sqrt_density(n.u), 1e-6 * closed_form::sqrt_density(n.u));
  }
}

TEST(SpectralFunction, NeumannIsPurePoint) {
  const auto sf = build_spectral_function(free_problem(), BoundaryParam::constant(0), -10, 50, 16);
  EXPECT_TRUE(sf.ac.empty());
  ASSERT_EQ(sf.masses.size(), 3u);
  const double expect_s[3] = {0, pi * pi, 4 * pi * pi}, expect_j[3] = {1, 2, 2};
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(sf.masses[k].s, expect_s[k], 1e-9 * (1 + expect_s[k]));
    EXPECT_NEAR(sf.masses[k].jump, expect_j[k], 1e-6);
  }
}

TEST(SpectralFunction, GapIsEmpty) {
  for (const auto& pb : {free_problem(), middle_third_problem()}) {
    const auto sf = build_spectral_function(pb, sqrt_param(), 0.1, a_k(1) - 0.1, 16);
    EXPECT_TRUE(sf.masses.empty());
    EXPECT_TRUE(sf.ac.empty());
  }
  EXPECT_THROW(build_spectral_function(free_problem(), sqrt_param(), -1, 1, 8), ConfigError);
}

TEST(Cdf, ExamplesAndMonotonicity) {
  const auto sf = build_spectral_function(free_problem(), sqrt_param(), -50, 100, 64);
  EXPECT_EQ(stieltjes_cdf(sf, 0), 0.0);
  EXPECT_NEAR(stieltjes_cdf(sf, a_k(1) + 0.5), 2.0, 1e-6);
  EXPECT_EQ(stieltjes_cdf(sf, a_k(1)), 0.0);
  EXPECT_LT(stieltjes_cdf(sf, -1), 0.0);
  double prev = -1e300;
  for (int i = 0; i < 200; ++i) {
    const double s = -50 + 150.0 * i / 199;
    const double v = stieltjes_cdf(sf, s);
    EXPECT_GE(v, prev) << s;
    prev = v;
  }
  EXPECT_THROW(stieltjes_cdf(sf, 101), ConfigError);
}
