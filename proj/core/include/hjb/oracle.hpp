#pragma once

#include "hjb/eigen.hpp"
#include "hjb/grid.hpp"
#include "hjb/operator.hpp"
#include "hjb/probe.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hjb {

/// Reference computations that share no code with the solver and eigen modules.
struct OracleResult {
    std::vector<double> values;
    std::string method;
    std::string resolution;
    std::optional<GridFunction> u;
};

struct ShootingOptions {
    int steps = 100000;
    double tol = 1e-10;
};

/// Half-eigenvalue of a 1D operator by RK4 shooting from u(0) = 0, u'(0) = +-1 and
/// bisection in lambda on the first return to zero at x = L. Supports the
/// laplacian, barenblatt, pucci and fucik tags.
OracleResult shooting_eigen_1d(const HJBOperator& op, const Domain& domain, HalfSign sign,
                               const ShootingOptions& opts = {});

/// log2(|v_n - v_2n| / |v_2n - v_4n|).
double richardson_order(double v_n, double v_2n, double v_4n);

/// Dense assembly and dense LU policy iteration for F[u] + shift u = g, independent
/// of the sparse discretization.
OracleResult dense_proper_solve(const HJBOperator& op, const Grid& grid, double shift, const GridFunction& g);

struct ScanEntry {
    double t = 0.0;
    Solvability verdict = Solvability::inconclusive;
};

struct ScanResult {
    std::vector<ScanEntry> entries;
    /// (last unsolvable t, first solvable t above it).
    std::optional<std::pair<double, double>> bracket;
};

/// solvability_probe of t phi_1^+ + d at every t of an increasing grid with ten times the
/// default budget. Throws NonMonotoneScan when a solvable t lies below an unsolvable one.
ScanResult exhaustive_tstar_scan(const DiscreteOperator& dop, const Spectrum& spectrum, double lambda,
                                 const GridFunction& d, const std::vector<double>& t_grid);

}  // namespace hjb
