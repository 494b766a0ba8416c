#include "hjb/errors.hpp"
#include "hjb/hypotheses.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace hjb;

namespace {
const double pi = std::numbers::pi;

struct Setup {
    Grid grid;
    DiscreteOperator dop;
    Spectrum spectrum;
};

Setup make(int n) {
    Grid g(Domain::interval(1.0), n);
    auto dop = discretize(HJBOperator::barenblatt(1, 2), g);
    auto sp = principal_spectrum(dop);
    return {g, dop, sp};
}

Nonlinearity model(const Grid& g, double kappa) {
    return builtin("model", {{"alpha", 0.5}, {"kappa", kappa}, {"eps_reg", 1.0}, {"h", 1.0}}, g);
}
}  // namespace

TEST(ConstructDR, ImplicationHoldsOnLargeMultiplesAndPositiveNoise) {
    auto s = make(60);
    auto f = model(s.grid, 1.0);
    const auto c = GridFunction::constant(s.grid, 1.0);
    const double eps = 1e-2;
    auto pair = construct_dR(f, BoundSide::plus_lower, c, eps, s.spectrum.plus.efun);
    EXPECT_LE(pair.distance, eps);
    EXPECT_EQ(pair.p, 3.0);
    EXPECT_GT(pair.sigma, 0.0);
    const auto& phi = s.spectrum.plus.efun;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> noise(0.0, 10.0);
    GridFunction bumped = pair.R * phi;
    for (std::size_t i = 0; i < bumped.size(); ++i) bumped[i] += noise(rng);
    for (const auto& u : {pair.R * phi, 2.0 * pair.R * phi, bumped}) {
        EXPECT_TRUE(dR_implication_holds(f, BoundSide::plus_lower, pair.d, u));
    }
}

TEST(ConstructDR, MirroredSideOnNegativeMultiples) {
    auto s = make(60);
    auto f = model(s.grid, -1.0);
    const auto c = GridFunction::constant(s.grid, 1.0);
    auto pair = construct_dR(f, BoundSide::minus_lower, c, 1e-2, s.spectrum.minus.efun);
    const auto& phi = s.spectrum.minus.efun;
    for (const auto& u : {pair.R * phi, 2.0 * pair.R * phi}) {
        EXPECT_TRUE(dR_implication_holds(f, BoundSide::minus_lower, pair.d, u));
    }
}

TEST(ConstructDR, RejectsAConstantAboveTheLimit) {
    auto s = make(40);
    auto f = model(s.grid, -1.0);
    EXPECT_THROW(construct_dR(f, BoundSide::plus_lower, GridFunction::constant(s.grid, 0.0), 1e-2,
                              s.spectrum.plus.efun),
                 BoundViolated);
}

TEST(Landesman, GrowingModelSatisfiesTheLeftConditions) {
    auto s = make(60);
    auto f = model(s.grid, 1.0);
    EXPECT_EQ(check_landesman(f, s.dop, s.spectrum, LandesmanSide::left_plus).verdict.verdict, Verdict::holds);
    EXPECT_EQ(check_landesman(f, s.dop, s.spectrum, LandesmanSide::left_minus).verdict.verdict, Verdict::holds);
    EXPECT_EQ(check_landesman(f, s.dop, s.spectrum, LandesmanSide::right_plus).verdict.verdict, Verdict::fails);
    EXPECT_EQ(check_landesman(f, s.dop, s.spectrum, LandesmanSide::right_minus).verdict.verdict, Verdict::fails);
}

TEST(Landesman, DecayingModelSatisfiesTheRightConditions) {
    auto s = make(60);
    auto f = model(s.grid, -1.0);
    EXPECT_EQ(check_landesman(f, s.dop, s.spectrum, LandesmanSide::right_plus).verdict.verdict, Verdict::holds);
    EXPECT_EQ(check_landesman(f, s.dop, s.spectrum, LandesmanSide::right_minus).verdict.verdict, Verdict::holds);
}

TEST(Landesman, BoundedPositiveForcingGivesLeftPlus) {
    auto s = make(60);
    auto f = builtin("forcing", {}, s.grid, {{"g", GridFunction::constant(s.grid, 1.0)}});
    auto v = check_landesman(f, s.dop, s.spectrum, LandesmanSide::left_plus);
    EXPECT_EQ(v.verdict.verdict, Verdict::holds);
    ASSERT_TRUE(v.verdict.tstar_bracket.has_value());
    EXPECT_LT(v.verdict.tstar_bracket->second, 0.0);
}

TEST(Landesman, StraddlingBracketIsInconclusive) {
    auto s = make(60);
    auto g = GridFunction::sample(s.grid, [](const Point& p) { return std::cos(pi * p[0]); });
    auto f = builtin("forcing", {}, s.grid, {{"g", g}});
    EXPECT_EQ(check_landesman(f, s.dop, s.spectrum, LandesmanSide::left_plus).verdict.verdict, Verdict::inconclusive);
}
