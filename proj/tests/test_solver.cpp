#include "hjb/eigen.hpp"
#include "hjb/errors.hpp"
#include "hjb/nonlin.hpp"
#include "hjb/oracle.hpp"
#include "hjb/solver.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace hjb;

namespace {
const double pi = std::numbers::pi;

Grid line(int n) { return Grid(Domain::interval(1.0), n); }

GridFunction random_function(const Grid& g, std::mt19937_64& rng, double lo = -1, double hi = 1) {
    std::uniform_real_distribution<double> d(lo, hi);
    GridFunction u(g);
    for (std::size_t i = 0; i < g.size(); ++i) u[i] = d(rng);
    return u;
}

GridFunction sine(const Grid& g, double amp = 1.0) {
    return GridFunction::sample(g, [amp](const Point& p) { return amp * std::sin(pi * p[0]); });
}
}  // namespace

TEST(SolveProper, ZeroDataGivesZeroInOneIteration) {
    auto dop = discretize(HJBOperator::barenblatt(1, 2), line(50));
    auto rep = solve_proper(dop, -1.0, GridFunction(dop.grid()));
    ASSERT_TRUE(rep.converged());
    EXPECT_EQ(rep.iters, 1);
    EXPECT_EQ(norm(rep.u, NormKind::sup), 0.0);
    EXPECT_FALSE(rep.residual_history.empty());
}

TEST(SolveProper, LaplacianMatchesDenseOracle) {
    const Grid g = line(120);
    auto op = HJBOperator::laplacian();
    const auto data = GridFunction::constant(g, -1.0);
    auto rep = solve_proper(discretize(op, g), -1.0, data);
    ASSERT_TRUE(rep.converged());
    EXPECT_GT(rep.u.min(), 0.0);
    auto dense = dense_proper_solve(op, g, -1.0, data);
    EXPECT_LE(norm(rep.u - *dense.u, NormKind::sup), 1e-8);
}

TEST(SolveProper, BarenblattMatchesDenseOracleOnRandomData) {
    const Grid g = line(60);
    auto op = HJBOperator::barenblatt(1, 2);
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 5; ++trial) {
        const auto data = random_function(g, rng, -5, 5);
        auto rep = solve_proper(discretize(op, g), -2.0, data);
        ASSERT_TRUE(rep.converged());
        auto dense = dense_proper_solve(op, g, -2.0, data);
        EXPECT_LE(norm(rep.u - *dense.u, NormKind::sup), 1e-9);
    }
}

TEST(SolveProper, PositiveDataGivesNegativeSolution) {
    auto dop = discretize(HJBOperator::barenblatt(1, 2), line(80));
    auto rep = solve_proper(dop, -1.0, GridFunction::constant(dop.grid(), 1.0));
    ASSERT_TRUE(rep.converged());
    EXPECT_LT(rep.u.max(), 0.0);
}

TEST(SolveProper, RejectsImproperShift) {
    auto dop = discretize(HJBOperator::fucik(-1.0, 5.0), line(30));
    EXPECT_THROW(solve_proper(dop, -1.0, GridFunction(dop.grid())), ImproperShift);
    EXPECT_NO_THROW(solve_proper(dop, -5.0, GridFunction(dop.grid())));
}

TEST(SolveProperProperties, MaximumPrincipleAndBound) {
    auto dop = discretize(HJBOperator::barenblatt(1, 2), line(100));
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        const auto g = random_function(dop.grid(), rng, -3, 0);
        auto rep = solve_proper(dop, -0.5, g);
        ASSERT_TRUE(rep.converged());
        EXPECT_GE(rep.u.min(), 0.0);
        // Diffusion >= 1 on (0,1): |u| <= ||g|| / 8.
        EXPECT_LE(norm(rep.u, NormKind::sup), norm(g, NormKind::sup) / 8.0 * (1 + 1e-9));
        const auto g2 = random_function(dop.grid(), rng, -3, 3);
        auto rep2 = solve_proper(dop, -0.5, g2);
        EXPECT_LE(norm(rep2.u, NormKind::sup), norm(g2, NormKind::sup) / 8.0 * (1 + 1e-9));
    }
}

TEST(SolveProperProperties, ResidualNonincreasingAfterFirstStep) {
    auto dop = discretize(HJBOperator::pucci_plus(1, 4), Grid(Domain::rectangle(1, 1), 20));
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 5; ++trial) {
        auto rep = solve_proper(dop, -1.0, random_function(dop.grid(), rng, -10, 10));
        ASSERT_TRUE(rep.converged());
        for (std::size_t k = 2; k < rep.residual_history.size(); ++k) {
            EXPECT_LE(rep.residual_history[k], rep.residual_history[k - 1] * (1 + 1e-12) + 1e-12);
        }
    }
}

TEST(SolveProperProperties, DiscreteComparisonPrinciple) {
    auto dop = discretize(HJBOperator::barenblatt(1, 2), line(60));
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> pos(0, 2);
    for (int trial = 0; trial < 100; ++trial) {
        GridFunction g1 = random_function(dop.grid(), rng, -4, 4);
        GridFunction g2 = g1;
        for (std::size_t i = 0; i < g2.size(); ++i) g2[i] -= pos(rng);
        // g1 >= g2 forces u1 <= u2.
        auto u1 = solve_proper(dop, -1.0, g1).u;
        auto u2 = solve_proper(dop, -1.0, g2).u;
        EXPECT_LE((u1 - u2).max(), 1e-12);
    }
}

TEST(SolveBelowPrincipal, MatchesDenseOracleInsideSpectralWindow) {
    const Grid g = line(80);
    auto op = HJBOperator::barenblatt(1, 2);
    auto dop = discretize(op, g);
    const double l1 = principal_eigenpair(dop, HalfSign::plus).value;
    std::mt19937_64 rng(37);
    for (double shift : {3.0, 8.0, l1 - 0.01}) {
        const auto data = random_function(g, rng, -2, 2);
        auto rep = solve_below_principal(dop, shift, data, l1);
        ASSERT_TRUE(rep.converged()) << shift;
        auto dense = dense_proper_solve(op, g, shift, data);
        EXPECT_LE(norm(rep.u - *dense.u, NormKind::sup), 1e-7 * (1 + norm(rep.u, NormKind::sup)));
    }
    EXPECT_THROW(solve_below_principal(dop, l1 + 0.1, GridFunction(g), l1), ImproperShift);
}

TEST(KMap, ZeroAndFixedPoint) {
    const Grid g = line(60);
    auto dop = discretize(HJBOperator::barenblatt(1, 2), g);
    auto zero = builtin("zero", {}, g);
    EXPECT_EQ(norm(k_map(dop, -1.0, 0.0, zero, GridFunction(g)), NormKind::sup), 0.0);

    auto f = builtin("example3", {}, g);
    const double lambda = -3.0;
    auto sol = newton_solve(dop, lambda, f, sine(g, 3.0));
    ASSERT_TRUE(sol.converged());
    const double c = monotone_shift(dop, lambda, f, 2 * norm(sol.u, NormKind::sup));
    EXPECT_LE(norm(k_map(dop, c, lambda, f, sol.u) - sol.u, NormKind::sup), 1e-9);
}

TEST(KMap, OrderPreservingOnWorkingRange) {
    const Grid g = line(60);
    auto dop = discretize(HJBOperator::barenblatt(1, 2), g);
    auto f = builtin("model", {{"alpha", 0.5}, {"h", 1.0}, {"eps_reg", 1.0}}, g);
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> pos(0, 1);
    for (double lambda : {-5.0, 0.0, 4.0}) {
        const double c = monotone_shift(dop, lambda, f, 10.0);
        for (int trial = 0; trial < 30; ++trial) {
            GridFunction v1 = random_function(g, rng, -4, 4);
            GridFunction v2 = v1;
            for (std::size_t i = 0; i < g.size(); ++i) v2[i] = std::min(4.0, v2[i] + pos(rng));
            EXPECT_LE((k_map(dop, c, lambda, f, v1) - k_map(dop, c, lambda, f, v2)).max(), 1e-12);
        }
    }
}

TEST(Perron, ModelFormBracketsCensusSolutions) {
    const Grid g = line(100);
    auto dop = discretize(HJBOperator::barenblatt(1, 2), g);
    auto f = builtin("model", {{"alpha", 0.5}, {"h", 1.0}}, g);
    const double l1 = principal_eigenpair(dop, HalfSign::plus).value;
    auto pair = construct_pair(dop, 0.0, f, l1);
    ASSERT_TRUE(pair.has_value());
    auto below = perron_solve(dop, 0.0, f, *pair, PerronDirection::from_below);
    auto above = perron_solve(dop, 0.0, f, *pair, PerronDirection::from_above);
    ASSERT_TRUE(below.converged());
    ASSERT_TRUE(above.converged());
    EXPECT_LE((below.u - above.u).max(), 1e-9);
    const double c = monotone_shift(dop, 0.0, f, 2 * norm(pair->upper, NormKind::sup));
    EXPECT_LE(norm(k_map(dop, c, 0.0, f, below.u) - below.u, NormKind::sup), 1e-8);
    // Multistart census oracle: every Newton solution lies between both limits.
    for (double a : {-10.0, -3.0, -1.0, 1.0}) {
        auto rep = newton_solve(dop, 0.0, f, sine(g, a));
        if (!rep.converged()) continue;
        EXPECT_GE((rep.u - below.u).min(), -1e-7);
        EXPECT_LE((rep.u - above.u).max(), 1e-7);
    }
}

TEST(Perron, ExactSolutionPairReturnsImmediately) {
    const Grid g = line(60);
    auto dop = discretize(HJBOperator::barenblatt(1, 2), g);
    auto f = builtin("example3", {}, g);
    auto sol = newton_solve(dop, -2.0, f, sine(g, 2.0));
    ASSERT_TRUE(sol.converged());
    SubSuperPair pair{sol.u, sol.u, 0.0, 0.0};
    auto rep = perron_solve(dop, -2.0, f, pair, PerronDirection::from_below);
    ASSERT_TRUE(rep.converged());
    EXPECT_EQ(rep.iters, 0);
    EXPECT_EQ(norm(rep.u - sol.u, NormKind::sup), 0.0);
}

TEST(Perron, InvalidPairs) {
    const Grid g = line(40);
    auto dop = discretize(HJBOperator::barenblatt(1, 2), g);
    auto f = builtin("example3", {}, g);
    EXPECT_THROW(SubSuperPair::make(sine(g, 1.0), sine(g, 0.5)), NotOrdered);
    SubSuperPair crossed{sine(g, 1.0), sine(g, 0.5), 0, 0};
    EXPECT_THROW(perron_solve(dop, 0.0, f, crossed, PerronDirection::from_below), NotOrdered);
    // 0.5 sin(pi x) has F[u] - f(u) = (1 - pi^2) u < 0: a strict super-solution used as lower.
    SubSuperPair wrong{sine(g, 0.5), sine(g, 5.0), 0, 0};
    EXPECT_THROW(perron_solve(dop, 0.0, f, wrong, PerronDirection::from_below), NotSubSuper);
}

TEST(Newton, ExactStartConvergesImmediately) {
    const Grid g = line(80);
    auto dop = discretize(HJBOperator::barenblatt(1, 2), g);
    auto f = builtin("example3", {}, g);
    auto sol = newton_solve(dop, -1.0, f, sine(g, 4.0));
    ASSERT_TRUE(sol.converged());
    auto again = newton_solve(dop, -1.0, f, sol.u);
    ASSERT_TRUE(again.converged());
    EXPECT_LE(again.iters, 2);
}

TEST(Newton, ExampleTwoPositiveSolutionIsUnique) {
    const Grid g = line(200);
    auto dop = discretize(HJBOperator::barenblatt(1, 2), g);
    auto phi = principal_eigenpair(dop, HalfSign::plus).efun;
    auto f = builtin("example2", {}, g);
    auto a = newton_solve(dop, 0.0, f, 5.0 * phi);
    auto b = newton_solve(dop, 0.0, f, 20.0 * phi);
    ASSERT_TRUE(a.converged());
    ASSERT_TRUE(b.converged());
    EXPECT_GT(a.u.min(), 0.0);
    EXPECT_LE(norm(a.u - b.u, NormKind::sup), 1e-8);
}

TEST(Newton, ZeroIsTheOnlySolutionBetweenEigenvaluesWithoutData) {
    const Grid g = line(80);
    auto dop = discretize(HJBOperator::barenblatt(1, 2), g);
    auto sp = principal_spectrum(dop);
    const double lambda = sp.plus.value + 0.5 * (sp.minus.value - sp.plus.value);
    auto zero = builtin("zero", {}, g);
    std::mt19937_64 rng(43);
    auto rep = newton_solve(dop, lambda, zero, random_function(g, rng));
    ASSERT_TRUE(rep.converged());
    EXPECT_LE(norm(rep.u, NormKind::sup), 1e-9);
}

TEST(SolverProperties, UniquenessForVeryNegativeLambda) {
    const Grid g = line(80);
    auto dop = discretize(HJBOperator::barenblatt(1, 2), g);
    auto f = builtin("example3", {}, g);
    const double lambda = -(dop.gamma() + f.lipschitz(200.0)) - 1.0;
    std::mt19937_64 rng(47);
    std::optional<GridFunction> first;
    for (int k = 0; k < 6; ++k) {
        auto rep = newton_solve(dop, lambda, f, random_function(g, rng, -50, 50));
        ASSERT_TRUE(rep.converged());
        if (!first) first = rep.u;
        EXPECT_LE(norm(rep.u - *first, NormKind::sup), 1e-8);
    }
}

TEST(GrowthRate, LogSlope) {
    std::vector<double> v;
    for (int k = 0; k < 12; ++k) v.push_back(std::exp(0.3 * k));
    EXPECT_NEAR(growth_rate(v, 10), 0.3, 1e-12);
    EXPECT_NEAR(growth_rate(std::vector<double>(10, 2.0), 10), 0.0, 1e-15);
}
