#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "slspec/nevanlinna.hpp"

using namespace slspec;

TEST(EvalParam, Examples) {
  const auto c = eval_param(BoundaryParam::constant(3), cplx(0, 1));
  EXPECT_FALSE(c.infinite);
  EXPECT_EQ(c.value, cplx(3.0));
  const auto s = eval_param(sqrt_param(), cplx(0, 1));
  EXPECT_NEAR(std::abs(s.value - std::sqrt(2.0) / 2 * cplx(1, 1)), 0.0, 1e-15);
  EXPECT_TRUE(eval_param(BoundaryParam::infinity(), cplx(2, 1)).infinite);
}

TEST(ParseTau, Catalog) {
  EXPECT_EQ(parse_tau("constant:3.0").kind(), BoundaryParam::Kind::Constant);
  EXPECT_EQ(parse_tau("constant:3.0").theta(), 3.0);
  EXPECT_EQ(parse_tau("infinity").kind(), BoundaryParam::Kind::Infinity);
  EXPECT_EQ(parse_tau("sqrt").name(), "sqrt");
  EXPECT_EQ(parse_tau("lambda").name(), "lambda");
  const auto m = parse_tau("mobius:2,1,1,3");
  EXPECT_NEAR(std::abs(eval_param(m, cplx(1, 1)).value - (cplx(2, 2) + 1.0) / (cplx(1, 1) + 3.0)), 0.0, 1e-15);
  EXPECT_THROW(parse_tau("constant:"), ConfigError);
  EXPECT_THROW(parse_tau("mobius:1,2,3"), ConfigError);
  EXPECT_THROW(parse_tau("mobius:1,2,0,0"), ConfigError);
  EXPECT_THROW(parse_tau("cosh"), ConfigError);
}

TEST(Asymptotics, ConstantIsExact) {
  for (double theta : {-2.5, 0.0, 3.0, 1e6}) {
    const auto as = asymptotics(BoundaryParam::constant(theta));
    EXPECT_EQ(as.B, 0.0);
    EXPECT_TRUE(as.moment_finite);
    ASSERT_TRUE(as.D.has_value());
    EXPECT_EQ(*as.D, theta);
  }
}

TEST(Asymptotics, SqrtHasInfiniteMoment) {
  const auto as = asymptotics(sqrt_param());
  EXPECT_EQ(as.B, 0.0);
  EXPECT_FALSE(as.B_nonzero);
  EXPECT_FALSE(as.moment_finite);
  EXPECT_FALSE(as.D.has_value());
}

TEST(Asymptotics, LinearSlopeDetected) {
  EXPECT_NEAR(asymptotics(identity_param()).B, 1.0, 1e-6);
  for (double c : {0.5, 2.0, 7.0}) {
    const double theta = -1.5;
    const auto tau = BoundaryParam::analytic(
        "linear", [=](cplx l) { return Projective{c * l + theta, 1.0}; },
        [=](double u) { return Projective{c * u + theta, 1.0}; }, [](double, double) { return std::vector<RealInterval>{}; });
    const auto as = asymptotics(tau);
    EXPECT_TRUE(as.B_nonzero);
    EXPECT_NEAR(as.B, c, 1e-6 * c);
  }
}

TEST(Asymptotics, MobiusLimitIsAOverC) {
  const auto as = asymptotics(mobius_param(2, 1, 1, 3));
  EXPECT_FALSE(as.B_nonzero);
  EXPECT_TRUE(as.moment_finite);
  ASSERT_TRUE(as.D.has_value());
  EXPECT_NEAR(*as.D, 2.0, 1e-8);
}

TEST(Asymptotics, OscillationIsUnresolved) {
  // tau(iy) / (iy) keeps wandering between 0.5 and 1.5.
  const auto tau = BoundaryParam::analytic(
      "wobble", [](cplx l) { return Projective{l * (1.0 + 0.5 * std::sin(2.1 * std::log2(std::abs(l)))), 1.0}; },
      [](double u) { return Projective{u, 1.0}; }, [](double, double) { return std::vector<RealInterval>{}; });
  EXPECT_THROW(asymptotics(tau), UnresolvedAsymptoticsError);
}

TEST(EtaRelation, Cases) {
  const auto g = eta_relation(BoundaryParam::constant(1.25));
  EXPECT_EQ(g.kind, EtaRelation::Case::Graph);
  EXPECT_EQ(g.d, 1.25);
  EXPECT_EQ(eta_relation(sqrt_param()).kind, EtaRelation::Case::Zero);
  EXPECT_EQ(eta_relation(identity_param()).kind, EtaRelation::Case::FullRange);
  EXPECT_EQ(eta_relation(BoundaryParam::infinity()).kind, EtaRelation::Case::FullRange);
}

TEST(ClassifyBc, Examples) {
  const double beta = 0.7;
  const double d = -std::cos(beta) / std::sin(beta);
  const auto c = classify_bc(BoundaryParam::constant(d));
  EXPECT_EQ(c.label, BCClass::Label::bc2);
  ASSERT_TRUE(c.d_tau.has_value());
  EXPECT_EQ(*c.d_tau, d);
  EXPECT_EQ(classify_bc(sqrt_param()).label, BCClass::Label::bc3);
  EXPECT_EQ(classify_bc(identity_param()).label, BCClass::Label::bc1);
  EXPECT_EQ(classify_bc(BoundaryParam::infinity()).label, BCClass::Label::bc1);
}

TEST(ClassifyBc, ConsistentWithEta) {
  for (const auto& tau : {BoundaryParam::constant(0), BoundaryParam::constant(-4), BoundaryParam::infinity(), sqrt_param(),
                          identity_param(), mobius_param(2, 1, 1, 3), mobius_param(0, -1, 1, 0)}) {
    ASSERT_TRUE(check_nevanlinna(tau, 64, 1e-10).ok) << tau.name();
    const auto eta = eta_relation(tau);
    const auto bc = classify_bc(tau);
    switch (eta.kind) {
      case EtaRelation::Case::FullRange: EXPECT_EQ(bc.label, BCClass::Label::bc1) << tau.name(); break;
      case EtaRelation::Case::Graph:
        EXPECT_EQ(bc.label, BCClass::Label::bc2) << tau.name();
        EXPECT_EQ(*bc.d_tau, eta.d);
        break;
      case EtaRelation::Case::Zero: EXPECT_EQ(bc.label, BCClass::Label::bc3) << tau.name(); break;
    }
  }
}

TEST(CheckNevanlinna, Examples) {
  EXPECT_TRUE(check_nevanlinna(BoundaryParam::constant(5), 50, 1e-10).ok);
  EXPECT_TRUE(check_nevanlinna(sqrt_param(), 50, 1e-10).ok);
  const auto anti = BoundaryParam::analytic(
      "conj", [](cplx l) { return Projective{std::conj(l), 1.0}; }, [](double u) { return Projective{u, 1.0}; },
      [](double, double) { return std::vector<RealInterval>{}; });
  const auto rep = check_nevanlinna(anti, 50, 1e-10);
  EXPECT_FALSE(rep.ok);
  EXPECT_LT(rep.worst_imag, 0.0);
  // a d - b c < 0 flips the half-plane.
  EXPECT_FALSE(check_nevanlinna(mobius_param(1, 0, 0, -1), 50, 1e-10).ok);
  EXPECT_THROW(check_nevanlinna(sqrt_param(), 0, 1e-10), ConfigError);
}

TEST(BoundaryValues, SqrtNonrealOnNegativeAxis) {
  const auto iv = sqrt_param().nonreal_intervals(-5, 10);
  ASSERT_EQ(iv.size(), 1u);
  EXPECT_EQ(iv[0].first, -5.0);
  EXPECT_EQ(iv[0].second, 0.0);
  EXPECT_TRUE(sqrt_param().nonreal_intervals(1, 10).empty());
  EXPECT_THROW(sqrt_param().projective(cplx(-1, 0)), ConfigError);
}
