#include "hjb/branch.hpp"
#include "hjb/eigen.hpp"
#include "hjb/operator.hpp"
#include "hjb/solver.hpp"
#include "hjb/tstar.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

using namespace hjb;

namespace {

DiscreteOperator barenblatt_1d(int n) { return discretize(HJBOperator::barenblatt(1.0, 2.0), Grid(Domain::interval(1.0), n)); }

void BM_Discretize1D(benchmark::State& state) {
    const Grid g(Domain::interval(1.0), static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(discretize(HJBOperator::barenblatt(1.0, 2.0), g));
}
BENCHMARK(BM_Discretize1D)->Arg(200)->Arg(800)->Arg(3200);

void BM_PolicyIteration1D(benchmark::State& state) {
    const DiscreteOperator dop = barenblatt_1d(static_cast<int>(state.range(0)));
    const GridFunction g = GridFunction::sample(dop.grid(), [](const Point& p) { return std::cos(3 * p[0]) - 0.5; });
    for (auto _ : state) benchmark::DoNotOptimize(solve_proper(dop, -1.0, g));
}
BENCHMARK(BM_PolicyIteration1D)->Arg(200)->Arg(800)->Arg(3200);

void BM_PolicyIteration2D(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const DiscreteOperator dop = discretize(HJBOperator::pucci_plus(1.0, 2.0), Grid(Domain::rectangle(1.0, 1.0), n));
    const GridFunction g = GridFunction::sample(dop.grid(), [](const Point& p) { return std::sin(5 * p[0]) * p[1] - 0.3; });
    for (auto _ : state) benchmark::DoNotOptimize(solve_proper(dop, -1.0, g));
}
BENCHMARK(BM_PolicyIteration2D)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_PrincipalSpectrum1D(benchmark::State& state) {
    const DiscreteOperator dop = barenblatt_1d(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(principal_spectrum(dop));
}
BENCHMARK(BM_PrincipalSpectrum1D)->Arg(100)->Arg(400)->Arg(1600)->Unit(benchmark::kMillisecond);

void BM_PrincipalSpectrum2D(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const DiscreteOperator dop = discretize(HJBOperator::barenblatt(1.0, 2.0), Grid(Domain::rectangle(1.0, 1.0), n));
    for (auto _ : state) benchmark::DoNotOptimize(principal_spectrum(dop));
}
BENCHMARK(BM_PrincipalSpectrum2D)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_NewtonExample2(benchmark::State& state) {
    const DiscreteOperator dop = barenblatt_1d(static_cast<int>(state.range(0)));
    const Spectrum sp = principal_spectrum(dop);
    const Nonlinearity f = builtin("example2", {}, dop.grid());
    const GridFunction u0 = 5.0 * sp.plus.efun;
    for (auto _ : state) benchmark::DoNotOptimize(newton_solve(dop, sp.plus.value - 1.0, f, u0));
}
BENCHMARK(BM_NewtonExample2)->Arg(200)->Arg(800);

void BM_TStarResonant(benchmark::State& state) {
    const DiscreteOperator dop = barenblatt_1d(static_cast<int>(state.range(0)));
    const Spectrum sp = principal_spectrum(dop);
    const GridFunction d = GridFunction::sample(dop.grid(), [](const Point& p) {
        return -1 + 3 * std::sin(std::numbers::pi * p[0]);
    });
    for (auto _ : state) benchmark::DoNotOptimize(tstar_resonant(dop, sp, HalfSign::plus, d));
}
BENCHMARK(BM_TStarResonant)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_TStarInterior(benchmark::State& state) {
    const DiscreteOperator dop = barenblatt_1d(static_cast<int>(state.range(0)));
    const Spectrum sp = principal_spectrum(dop);
    const GridFunction d = GridFunction::sample(dop.grid(), [](const Point& p) { return std::cos(std::numbers::pi * p[0]); });
    const double lam = 0.5 * (sp.plus.value + sp.minus.value);
    for (auto _ : state) benchmark::DoNotOptimize(tstar_interior(dop, sp, lam, d));
}
BENCHMARK(BM_TStarInterior)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_ContinueExample2(benchmark::State& state) {
    const DiscreteOperator dop = barenblatt_1d(static_cast<int>(state.range(0)));
    const Spectrum sp = principal_spectrum(dop);
    const Nonlinearity f = builtin("example2", {}, dop.grid());
    const double lam0 = sp.plus.value - 1.0;
    const BranchPoint start = make_point(dop, f, lam0, newton_solve(dop, lam0, f, 5.0 * sp.plus.efun).u);
    for (auto _ : state) benchmark::DoNotOptimize(continue_branch(dop, f, start, sp.plus.value));
}
BENCHMARK(BM_ContinueExample2)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_Census(benchmark::State& state) {
    const DiscreteOperator dop = barenblatt_1d(static_cast<int>(state.range(0)));
    const Spectrum sp = principal_spectrum(dop);
    const Nonlinearity f = builtin("model", {{"alpha", 0.5}, {"kappa", 1.0}, {"eps_reg", 1.0}, {"h", 1.0}}, dop.grid());
    const double lam = 0.5 * (sp.plus.value + sp.minus.value);
    for (auto _ : state) benchmark::DoNotOptimize(census(dop, sp, f, lam));
}
BENCHMARK(BM_Census)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
