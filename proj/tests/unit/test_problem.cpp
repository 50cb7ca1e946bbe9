#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "slspec/config.hpp"

using namespace slspec;

namespace {

const char* kFree = R"(
[interval]
a = 0
b = 1
alpha = -pi/2
[coefficients.p]
piece1 = 0, 1, constant 1
[coefficients.q]
piece1 = 0, 1, constant 0
[coefficients.delta]
piece1 = 0, 1, constant 1
)";

const char* kMiddle = R"(
[interval]
a = 0
b = 1
alpha = -pi/2
[coefficients.p]
piece1 = 0, 1, constant 1
[coefficients.q]
piece1 = 0, 1, constant 0
[coefficients.delta]
piece1 = 0, 1/3, constant 1
piece2 = 1/3, 2/3, constant 0
piece3 = 2/3, 1, constant 1
)";

std::string with_delta(const std::string& delta_lines) {
  return std::string(R"(
[interval]
a = 0
b = 1
alpha = -pi/2
[coefficients.p]
piece1 = 0, 1, constant 1
[coefficients.q]
piece1 = 0, 1, constant 0
[coefficients.delta]
)") + delta_lines;
}

}  // namespace

TEST(LoadProblem, FreeProblemFromConfig) {
  const auto pb = load_problem(kFree);
  EXPECT_EQ(pb.a(), 0.0);
  EXPECT_EQ(pb.b(), 1.0);
  EXPECT_DOUBLE_EQ(pb.alpha(), -std::numbers::pi / 2);
  EXPECT_EQ(pb.delta()(0.5), 1.0);
  EXPECT_EQ(pb.hash(), free_problem().hash());
}

TEST(LoadProblem, TrivialWeightRejected) {
  try {
    load_problem(with_delta("piece1 = 0, 1, constant 0\n"));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("trivial weight"), std::string::npos);
  }
}

TEST(LoadProblem, MiddleThirdIsValid) {
  const auto pb = load_problem(kMiddle);
  EXPECT_EQ(pb.hash(), middle_third_problem().hash());
  EXPECT_EQ(pb.delta()(0.5), 0.0);
  EXPECT_EQ(pb.delta()(0.9), 1.0);
}

TEST(LoadProblem, RejectsBadDocuments) {
  EXPECT_THROW(load_problem("[interval]\na = 0\n"), ConfigError);
  EXPECT_THROW(load_problem(with_delta("piece1 = 0, 0.5, constant 1\n")), ConfigError);  // gap
  EXPECT_THROW(load_problem(with_delta("piece1 = 0, 1, constant -1\n")), ConfigError);   // negative weight
  EXPECT_THROW(load_problem(with_delta("piece1 = 0, 1, wiggle 1\n")), ConfigError);
  EXPECT_THROW(load_problem(with_delta("piece1 = 0, 1, constant abc\n")), ConfigError);
  EXPECT_THROW(load_problem(std::string(kFree) + "[quadrature]\nbogus = 1\n"), ConfigError);
  std::string reversed = kFree;
  reversed.replace(reversed.find("b = 1"), 5, "b = -1");
  EXPECT_THROW(load_problem(reversed), ConfigError);
}

TEST(LoadProblem, PolynomialAndTableRules) {
  const auto pb = load_problem(with_delta("piece1 = 0, 1/2, poly 1 2\npiece2 = 1/2, 1, table 2 0.5:2 0.75:2.5 1:3\n"));
  EXPECT_DOUBLE_EQ(pb.delta()(0.25), 1.5);
  EXPECT_NEAR(pb.delta()(0.6), 2.2, 1e-14);
  EXPECT_THROW(load_problem(with_delta("piece1 = 0, 1, table 6 0:1 1:1\n")), ConfigError);
}

TEST(ParseNumber, Forms) {
  EXPECT_DOUBLE_EQ(parse_number("-pi/2"), -std::numbers::pi / 2);
  EXPECT_DOUBLE_EQ(parse_number("3*pi/4"), 3 * std::numbers::pi / 4);
  EXPECT_DOUBLE_EQ(parse_number("1/3"), 1.0 / 3);
  EXPECT_DOUBLE_EQ(parse_number(" 2e-3 "), 2e-3);
  EXPECT_THROW(parse_number("1/0"), ConfigError);
  EXPECT_THROW(parse_number(""), ConfigError);
}

TEST(DeltaInner, CosineSquared) {
  // int_0^1 cos^2(3 pi t / 4) dt = 1/2 + sin(3 pi / 2) / (3 pi) = 1/2 - 1/(3 pi)
  const auto pb = free_problem();
  auto f = [](double t) { return std::cos(0.75 * std::numbers::pi * t); };
  const cplx v = delta_inner(pb, f, f);
  EXPECT_NEAR(v.real(), 0.5 - 1 / (3 * std::numbers::pi), 1e-13);
  EXPECT_EQ(v.imag(), 0.0);
}

TEST(DeltaInner, UnitIntegrand) {
  const auto pb = free_problem();
  auto one = [](double) { return 1.0; };
  EXPECT_NEAR(delta_inner(pb, one, one).real(), 1.0, 1e-15);
}

TEST(DeltaInner, DeadZoneSupportGivesZero) {
  const auto pb = middle_third_problem();
  auto f = [](double t) { return t > 1.0 / 3 && t < 2.0 / 3 ? std::exp(t) : 0.0; };
  auto g = [](double t) { return 1 + t * t; };
  EXPECT_EQ(delta_inner(pb, f, g), cplx(0.0));
}

TEST(WeightSupport, Measures) {
  EXPECT_DOUBLE_EQ(free_problem().weight_support_measure(), 1.0);
  EXPECT_NEAR(middle_third_problem().weight_support_measure(), 2.0 / 3, 1e-15);
  // A zero weight cannot form a problem, so measure the coefficient alone.
  EXPECT_EQ(weight_support_measure(CoefficientFn::constant(0, 1, 0)), 0.0);
  CoefficientFn mixed({Piece{0, 0.25, PolynomialRule{{0, 0}}}, Piece{0.25, 1, TableRule{{0.25, 1}, {0, 1}, 1}}});
  EXPECT_DOUBLE_EQ(weight_support_measure(mixed), 0.75);
}

TEST(DeltaInner, LinearityAndPositivity) {
  const auto pb = middle_third_problem();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coef(-2, 2);
  for (int trial = 0; trial < 20; ++trial) {
    const double c1 = coef(rng), c2 = coef(rng), c3 = coef(rng), w1 = coef(rng), w2 = coef(rng);
    auto f = [=](double t) { return c1 + c2 * std::sin(5 * t) + c3 * t * t; };
    auto g = [=](double t) { return std::cos(c1 * t) + c2 * t; };
    auto h = [=](double t) { return c3 * std::exp(-t) + c1; };
    auto combo = [&](double t) { return w1 * f(t) + w2 * g(t); };
    const cplx lhs = delta_inner(pb, combo, h);
    const cplx rhs = w1 * delta_inner(pb, f, h) + w2 * delta_inner(pb, g, h);
    const double scale = std::abs(w1 * delta_inner(pb, f, h)) + std::abs(w2 * delta_inner(pb, g, h)) + 1e-300;
    EXPECT_LE(std::abs(lhs - rhs), 10 * pb.quad().rel_tol * scale);
    EXPECT_GE(delta_inner(pb, f, f).real(), 0.0);
  }
}

TEST(Tau, ConfigEntry) {
  EXPECT_EQ(load_tau_text(std::string(kFree) + "[boundary]\ntau = sqrt\n").value(), "sqrt");
  EXPECT_FALSE(load_tau_text(kFree).has_value());
}
