#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "slspec/config.hpp"
#include "slspec/propagator.hpp"
#include "shooting_oracle.hpp"

using namespace slspec;
using std::numbers::pi;

namespace {

constexpr double kOdeTol = 1e-12;

double free_error(double tol, double lambda) {
  QuadConfig q;
  q.ode_tol = tol;
  const auto end = propagate_to_end(free_problem(q), lambda, {1, 0});
  const double r = std::sqrt(lambda);
  return std::abs(end.y - std::cos(r)) + std::abs(end.y1 + r * std::sin(r));
}

std::vector<double> grid(int n) {
  std::vector<double> t;
  for (int i = 0; i < n; ++i) t.push_back(static_cast<double>(i) / (n - 1));
  return t;
}

}  // namespace

TEST(Propagate, ZeroEnergyIsConstant) {
  const auto traj = propagate(free_problem(), 0.0, {1, 0});
  for (double t : grid(21)) {
    const auto s = traj.at(t);
    EXPECT_NEAR(std::abs(s.y - 1.0), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(s.y1), 0.0, 1e-14);
  }
}

TEST(Propagate, CosineForPositiveLambda) {
  for (double lambda : {1.0, 10.0, 57.3}) {
    const auto traj = propagate(free_problem(), lambda, {1, 0});
    const double r = std::sqrt(lambda);
    for (double t : grid(41)) {
      const auto s = traj.at(t);
      EXPECT_NEAR(s.y.real(), std::cos(r * t), 100 * kOdeTol * (1 + lambda));
      EXPECT_NEAR(s.y1.real(), -r * std::sin(r * t), 100 * kOdeTol * (1 + lambda));
    }
  }
}

TEST(Propagate, AffineAcrossDeadZone) {
  const auto pb = middle_third_problem();
  const cplx lambda(7.5, 2.0);
  const auto traj = propagate(pb, lambda, {1, 0});
  const auto s0 = traj.at(0.4), s1 = traj.at(0.5), s2 = traj.at(0.6);
  EXPECT_LE(std::abs(s0.y1 - s2.y1), 1e-10);
  EXPECT_LE(std::abs(s0.y - 2.0 * s1.y + s2.y), 1e-10);
  EXPECT_LE(std::abs((s2.y - s0.y) / 0.2 - s1.y1), 1e-10);
}

TEST(Propagate, MatchesTransferMatrixOracle) {
  const auto pb = middle_third_problem();
  for (double lambda : {-30.0, 4.0, 95.0}) {
    const auto [y, dy] = oracle::shoot(oracle::middle_third(), lambda);
    const auto end = propagate_to_end(pb, lambda, {1, 0});
    EXPECT_NEAR(end.y.real(), static_cast<double>(y), 1e-9 * (1 + std::abs(static_cast<double>(y))));
    EXPECT_NEAR(end.y1.real(), static_cast<double>(dy), 1e-9 * (1 + std::abs(static_cast<double>(dy))));
  }
}

TEST(Propagate, RejectsNonFiniteInitialData) {
  EXPECT_THROW(propagate(free_problem(), 1.0, {std::nan(""), 0}), ConfigError);
}

TEST(PhiPsi, InitialValues) {
  const auto pb = free_problem();
  for (cplx l : {cplx(3, 1), cplx(-40, 0), cplx(0, 9)}) {
    EXPECT_EQ(phi_at(pb, l, 0).y, cplx(1.0));
    EXPECT_EQ(phi_at(pb, l, 0).y1, cplx(0.0));
    EXPECT_EQ(psi_at(pb, l, 0).y, cplx(0.0));
    EXPECT_EQ(psi_at(pb, l, 0).y1, cplx(1.0));
  }
  const SLProblem zero_angle(0, 1, 0.0, CoefficientFn::constant(0, 1, 1), CoefficientFn::constant(0, 1, 0),
                             CoefficientFn::constant(0, 1, 1));
  EXPECT_EQ(phi_at(zero_angle, cplx(2, 3), 0).y, cplx(0.0));
  EXPECT_EQ(phi_at(zero_angle, cplx(2, 3), 0).y1, cplx(1.0));
}

TEST(PhiPsi, FirstSqrtPole) {
  const double a1 = 9 * pi * pi / 16;
  const auto s = phi_at(free_problem(), a1, 1);
  EXPECT_NEAR(s.y.real(), -std::sqrt(2.0) / 2, 1e-10);
  EXPECT_NEAR(s.y1.real(), -3 * pi * std::sqrt(2.0) / 8, 1e-10);
}

TEST(PhiPsi, PsiClosedForms) {
  const auto pb = free_problem();
  for (double lambda : {2.0, 30.0}) {
    const double r = std::sqrt(lambda);
    const auto s = psi_at(pb, lambda, 1);
    EXPECT_NEAR(s.y.real(), std::sin(r) / r, 1e-10);
    EXPECT_NEAR(s.y1.real(), std::cos(r), 1e-10);
  }
  for (double t : grid(11)) {
    const auto s = psi_at(pb, 0.0, t);
    EXPECT_NEAR(s.y.real(), t, 1e-13);
    EXPECT_NEAR(s.y1.real(), 1.0, 1e-13);
  }
}

TEST(Wronskian, Examples) {
  EXPECT_EQ(wronskian(free_problem(), cplx(5, -2), 0), cplx(1.0));
  EXPECT_NEAR(std::abs(wronskian(free_problem(), 4.0, 1) - 1.0), 0.0, 100 * kOdeTol);
  EXPECT_NEAR(std::abs(wronskian(middle_third_problem(), cplx(0, 1), 1) - 1.0), 0.0, 100 * kOdeTol);
}

TEST(Wronskian, ConservedOnGrid) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> re(-20, 200), im(-5, 5);
  for (const auto& pb : {free_problem(), middle_third_problem()})
    for (int i = 0; i < 20; ++i) {
      const cplx l(re(rng), im(rng));
      for (double t : grid(50)) EXPECT_LE(std::abs(wronskian(pb, l, t) - 1.0), 100 * kOdeTol) << l << " t=" << t;
    }
}

TEST(Symmetry, RealityAndConjugation) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> re(-50, 150), im(-5, 5);
  for (const auto& pb : {free_problem(), middle_third_problem()})
    for (int i = 0; i < 10; ++i) {
      const double u = re(rng);
      const cplx l(u, im(rng));
      for (double t : grid(17)) {
        const auto pr = phi_at(pb, u, t), sr = psi_at(pb, u, t);
        EXPECT_LE(std::abs(pr.y.imag()) + std::abs(pr.y1.imag()), 100 * kOdeTol);
        EXPECT_LE(std::abs(sr.y.imag()) + std::abs(sr.y1.imag()), 100 * kOdeTol);
        const auto up = phi_at(pb, l, t), down = phi_at(pb, std::conj(l), t);
        const double scale = 1 + std::abs(up.y) + std::abs(up.y1);
        EXPECT_LE(std::abs(down.y - std::conj(up.y)), 100 * kOdeTol * scale);
        EXPECT_LE(std::abs(down.y1 - std::conj(up.y1)), 100 * kOdeTol * scale);
      }
    }
}

TEST(Tolerance, HalvingHalvesTheError) {
  const double coarse = free_error(kOdeTol, 10);
  const double fine = free_error(kOdeTol / 2, 10);
  EXPECT_GE(coarse / fine, 2.0) << coarse << " -> " << fine;
}

TEST(Endpoint, CoupledMatchesSeparate) {
  const auto pb = middle_third_problem();
  const cplx l(12, 0.5);
  const auto ed = endpoint_data(pb, l);
  EXPECT_LE(std::abs(ed.phi - phi_at(pb, l, 1).y), 1e-10);
  EXPECT_LE(std::abs(ed.psi1 - psi_at(pb, l, 1).y1), 1e-10);
  EXPECT_LE(std::abs(ed.phi * ed.psi1 - ed.phi1 * ed.psi - 1.0), 100 * kOdeTol);
}
