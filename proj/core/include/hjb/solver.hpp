#pragma once

#include "hjb/grid.hpp"
#include "hjb/nonlin.hpp"
#include "hjb/operator.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hjb {

struct SolverOptions {
    /// Residual tolerance relative to 1 + ||rhs||_sup.
    double rtol = 1e-10;
    int max_policy_iters = 200;
    int max_newton_iters = 100;
    double armijo_factor = 0.5;
    double armijo_c = 1e-4;
    double min_step = 1e-6;
    double growth_threshold = 0.05;
    int growth_window = 10;
    /// Cap on |d f / d s| in the Newton Jacobian (f may have infinite slope at 0).
    double derivative_cap = 1e12;
    int max_perron_iters = 20000;
    double strict_margin = 1e-8;
};

enum class SolveStatus { converged, diverged, stalled };

const char* to_string(SolveStatus s);

struct SolveReport {
    SolveStatus status = SolveStatus::stalled;
    /// Converged solution, or the last iterate otherwise.
    GridFunction u;
    double residual_sup = 0.0;
    double tolerance = 0.0;
    int iters = 0;
    double growth_rate = 0.0;
    std::vector<double> residual_history;

    bool converged() const { return status == SolveStatus::converged; }
};

/// Policy iteration for F[u] + shift * u = g with shift <= -gamma.
SolveReport solve_proper(const DiscreteOperator& dop, double shift, const GridFunction& g,
                         const SolverOptions& opts = {});

/// Policy iteration for F[u] + shift * u = g, valid for a sup-sense operator and any
/// shift strictly below its principal half-eigenvalue `lambda1_plus`: every policy
/// matrix then stays a nonsingular M-matrix and the iterates increase monotonically.
SolveReport solve_below_principal(const DiscreteOperator& dop, double shift, const GridFunction& g,
                                  double lambda1_plus, const SolverOptions& opts = {},
                                  const GridFunction* warm_start = nullptr);

/// F[u] + lambda u - f(x, u), node-wise.
GridFunction nonlinear_residual(const DiscreteOperator& dop, double lambda, const Nonlinearity& f,
                                const GridFunction& u);

/// Residual tolerance used for F[u] + lambda u = f(x,u): rtol (1 + ||f(u)|| + |lambda| ||u||),
/// floored by the round-off level of the discrete operator applied to u.
double nonlinear_tolerance(const DiscreteOperator& dop, double lambda, const Nonlinearity& f,
                           const GridFunction& u, const SolverOptions& opts = {});

/// Unique solution of F[u] + c u = (c - lambda) v + f(x, v), c <= -gamma.
GridFunction k_map(const DiscreteOperator& dop, double c, double lambda, const Nonlinearity& f,
                   const GridFunction& v, const SolverOptions& opts = {});

/// c = -gamma - max(upper Lipschitz of f on [-R, R], 0) - |lambda|, which makes
/// s -> f(x,s) + (c - lambda) s nonincreasing on [-R, R].
double monotone_shift(const DiscreteOperator& dop, double lambda, const Nonlinearity& f, double R);

struct SubSuperPair {
    GridFunction lower;
    GridFunction upper;
    /// min(upper - lower) over interior nodes.
    double interior_margin = 0.0;
    /// boundary_slope_margin(upper - lower).
    double slope_margin = 0.0;

    /// Throws NotOrdered when lower > upper somewhere or the slope margin is not positive.
    static SubSuperPair make(GridFunction lower, GridFunction upper);
};

/// Ordered pair for lambda below the principal half-eigenvalue, from the proper-type
/// solves F[w] + lambda w = -/+ B with B = sup_{|s| <= R} |f|; the radius R is doubled
/// until the pair encloses its own range. Returns nullopt if no pair was found.
std::optional<SubSuperPair> construct_pair(const DiscreteOperator& dop, double lambda, const Nonlinearity& f,
                                           double lambda1_plus, const SolverOptions& opts = {});

enum class PerronDirection { from_below, from_above };

SolveReport perron_solve(const DiscreteOperator& dop, double lambda, const Nonlinearity& f,
                         const SubSuperPair& pair, PerronDirection direction, const SolverOptions& opts = {});

/// Semismooth Newton with frozen active policy and Armijo damping on the residual sup-norm.
SolveReport newton_solve(const DiscreteOperator& dop, double lambda, const Nonlinearity& f,
                         const GridFunction& u0, const SolverOptions& opts = {});

/// Least-squares slope of log(values) against iteration index over the last `window` entries.
double growth_rate(const std::vector<double>& norms, int window);

}  // namespace hjb
