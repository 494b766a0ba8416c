#include "hjb/errors.hpp"
#include "hjb/nonlin.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

using namespace hjb;

namespace {
const double pi = std::numbers::pi;
const Grid grid(Domain::interval(1.0), 40);

GridFunction sine() {
    return GridFunction::sample(grid, [](const Point& p) { return std::sqrt(2.0) * std::sin(pi * p[0]); });
}
GridFunction cosine() {
    return GridFunction::sample(grid, [](const Point& p) { return std::cos(pi * p[0]); });
}

Nonlinearity example1() {
    return builtin("example1", {{"t_bar", 0.3}, {"t_star", 0.0}, {"eps", 0.2}, {"M", 5.0}}, grid,
                   {{"phi_plus", sine()}, {"h", cosine()}});
}

// Declared limits agree with sampled values at |s| = 1e8.
void expect_limits_consistent(const Nonlinearity& f) {
    auto check = [&](const AsymptoticLimit& lim, double s) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double v = f(i, s);
            switch (lim.kind) {
                case AsymptoticLimit::Kind::finite:
                    EXPECT_NEAR(v, (*lim.value)[i], 1e-4 * (1 + std::abs(v))) << f.name() << " s=" << s;
                    break;
                case AsymptoticLimit::Kind::plus_infinity: EXPECT_GT(v, 1e3) << f.name(); break;
                case AsymptoticLimit::Kind::minus_infinity: EXPECT_LT(v, -1e3) << f.name(); break;
            }
        }
    };
    check(f.limits().lower_plus, 1e8);
    check(f.limits().upper_plus, 1e8);
    check(f.limits().lower_minus, -1e8);
    check(f.limits().upper_minus, -1e8);
}
}  // namespace

TEST(Builtin, OmegaValues) {
    auto f = builtin("omega", {}, grid);
    EXPECT_EQ(f(0, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(f(0, 4.0), 2.0);
    EXPECT_DOUBLE_EQ(f(0, -9.0), -3.0);
    auto g = builtin("example2", {}, grid);
    EXPECT_DOUBLE_EQ(g(3, 4.0), -2.0);
}

TEST(Builtin, ExampleThreeValues) {
    auto f = builtin("example3", {}, grid);
    EXPECT_DOUBLE_EQ(f(0, 0.5), -0.5);
    EXPECT_DOUBLE_EQ(f(0, 4.0), -2.0);
    EXPECT_DOUBLE_EQ(f(0, -1.0), 1.0);
}

TEST(Builtin, ModelValues) {
    auto f = builtin("model", {{"alpha", 0.5}}, grid);
    EXPECT_DOUBLE_EQ(f(0, 1.0), -1.0);
    EXPECT_DOUBLE_EQ(f(0, 4.0), -2.0);
    EXPECT_EQ(f(0, 0.0), 0.0);
    auto r = builtin("model", {{"alpha", 0.5}, {"eps_reg", 1.0}, {"kappa", 1.0}, {"h", 1.0}}, grid);
    EXPECT_DOUBLE_EQ(r(0, 3.0), 3.0 / 2.0 + 1.0);
    EXPECT_NEAR(r.derivative(0, 0.0), 1.0, 1e-15);
}

TEST(Builtin, ExampleOnePieces) {
    auto f = example1();
    const auto phi = sine();
    const auto h = cosine();
    const std::size_t i = 7;
    EXPECT_NEAR(f(i, 0.0), 0.3 * phi[i] + h[i], 1e-15);
    EXPECT_NEAR(f(i, -5.0), 0.3 * phi[i] + h[i], 1e-15);
    EXPECT_NEAR(f(i, -10.0), -0.2 * phi[i] + h[i], 1e-15);
    EXPECT_NEAR(f(i, -7.5), 0.05 * phi[i] + h[i], 1e-14);
    EXPECT_NEAR(f(i, -1e9), -0.2 * phi[i] + h[i], 1e-15);
}

TEST(Builtin, InvalidParams) {
    EXPECT_THROW(builtin("model", {{"alpha", 1.5}}, grid), InvalidParams);
    EXPECT_THROW(builtin("model", {}, grid), InvalidParams);
    EXPECT_THROW(builtin("example1", {{"t_bar", 0.3}, {"t_star", 0.0}, {"eps", 0.2}, {"M", -1.0}}, grid,
                         {{"phi_plus", sine()}, {"h", cosine()}}),
                 InvalidParams);
    EXPECT_THROW(builtin("example1", {{"t_bar", 0.3}, {"t_star", 0.0}, {"eps", 0.0}, {"M", 1.0}}, grid,
                         {{"phi_plus", sine()}, {"h", cosine()}}),
                 InvalidParams);
    EXPECT_THROW(builtin("nope", {}, grid), InvalidParams);
}

TEST(Builtin, DeclaredLimitsMatchSampledAsymptotics) {
    for (const auto& name : {"zero", "omega", "example2", "example3"}) expect_limits_consistent(builtin(name, {}, grid));
    expect_limits_consistent(builtin("model", {{"alpha", 0.5}, {"h", 1.0}}, grid));
    expect_limits_consistent(builtin("model", {{"alpha", 0.5}, {"h", 1.0}, {"kappa", 1.0}, {"eps_reg", 1.0}}, grid));
    expect_limits_consistent(builtin("linear", {{"k", -2.0}}, grid));
    expect_limits_consistent(example1());
    expect_limits_consistent(builtin("forcing", {}, grid, {{"g", cosine()}}));
}

TEST(Builtin, ExampleThreeIsOddAndOneLipschitzNearZero) {
    auto f = builtin("example3", {}, grid);
    for (int k = -200; k <= 200; ++k) {
        const double s = k * 0.05;
        EXPECT_DOUBLE_EQ(f(0, -s), -f(0, s));
    }
    EXPECT_LE(f.lipschitz(1.0), 1.0 + 1e-12);
    EXPECT_NEAR(f.lipschitz(1.0), 1.0, 1e-12);
    EXPECT_LE(f.lipschitz(50.0), 1.0 + 1e-12);
}

TEST(Piecewise, ValuesAndLimits) {
    const double inf = std::numeric_limits<double>::infinity();
    // -s on [-1, 1], -sign(s) sqrt|s| outside: reproduces the example-3 nonlinearity.
    std::vector<Piece> pieces{{-inf, -1.0, {{-1.0, 0.5, true}}}, {-1.0, 1.0, {{-1.0, 1.0, true}}},
                              {1.0, inf, {{-1.0, 0.5, true}}}};
    auto f = piecewise_power("custom", pieces, GridFunction(grid));
    auto ref = builtin("example3", {}, grid);
    for (double s : {-9.0, -1.0, -0.3, 0.0, 0.7, 4.0, 100.0}) EXPECT_NEAR(f(2, s), ref(2, s), 1e-14);
    EXPECT_EQ(f.limits().upper_plus.kind, AsymptoticLimit::Kind::minus_infinity);
    EXPECT_EQ(f.limits().lower_minus.kind, AsymptoticLimit::Kind::plus_infinity);
    auto bounded = piecewise_power("bounded", {{-inf, 0.0, {{2.0, 0.0, false}}}, {0.0, inf, {{-1.0, 0.0, false}}}},
                                   cosine());
    ASSERT_TRUE(bounded.limits().upper_plus.is_finite());
    EXPECT_NEAR((*bounded.limits().upper_plus.value)[0], cosine()[0] - 1.0, 1e-15);
    EXPECT_NEAR((*bounded.limits().lower_minus.value)[0], cosine()[0] + 2.0, 1e-15);
    EXPECT_THROW(piecewise_power("gap", {{-inf, 0.0, {}}, {1.0, inf, {}}}, GridFunction(grid)), InvalidParams);
}

TEST(CheckSublinear, Examples) {
    EXPECT_EQ(check_sublinear(builtin("omega", {}, grid)).verdict, Verdict::holds);
    auto lin = check_sublinear(builtin("linear", {{"k", 2.0}}, grid));
    EXPECT_EQ(lin.verdict, Verdict::fails);
    EXPECT_NEAR(lin.value, 2.0, 1e-12);
    EXPECT_EQ(check_sublinear(example1()).verdict, Verdict::holds);
    EXPECT_EQ(check_sublinear(builtin("model", {{"alpha", 0.5}, {"h", 1.0}}, grid)).verdict, Verdict::holds);
}

TEST(CheckF1F2, Examples) {
    auto model = check_F1_F2(builtin("model", {{"alpha", 0.5}, {"h", 1.0}, {"eps_reg", 1.0}}, grid));
    EXPECT_EQ(model.f1.verdict, Verdict::holds);
    EXPECT_EQ(model.f2.verdict, Verdict::holds);
    auto ex1 = check_F1_F2(example1());
    EXPECT_EQ(ex1.f1.verdict, Verdict::fails);
    ASSERT_TRUE(ex1.f1.node.has_value());
    EXPECT_LT(example1()(*ex1.f1.node, 0.0), 0.0);
    auto om = check_F1_F2(builtin("omega", {}, grid));
    EXPECT_EQ(om.f2.verdict, Verdict::fails);
    ASSERT_TRUE(om.f2.s_value.has_value());
    EXPECT_LT(std::abs(*om.f2.s_value), 1e-2);
    EXPECT_EQ(check_F1_F2(builtin("zero", {}, grid)).f1.verdict, Verdict::fails);
}

TEST(Lipschitz, UpperConstantOfDecreasingFunctionIsNonpositive) {
    EXPECT_LE(builtin("example2", {}, grid).upper_lipschitz(10.0), 0.0);
    EXPECT_NEAR(builtin("linear", {{"k", 3.0}}, grid).upper_lipschitz(5.0), 3.0, 1e-12);
}
