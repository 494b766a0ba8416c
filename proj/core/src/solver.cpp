#include "hjb/solver.hpp"

#include "hjb/errors.hpp"
#include "linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hjb {

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::converged: return "converged";
        case SolveStatus::diverged: return "diverged";
        case SolveStatus::stalled: return "stalled";
    }
    return "?";
}

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double roundoff_floor(double op_norm, double u_sup) { return 64.0 * kEps * op_norm * (1.0 + u_sup); }

SolveReport howard(const DiscreteOperator& dop, double shift, const GridFunction& g, const SolverOptions& opts,
                   const GridFunction* warm_start) {
    require_same_grid(dop.grid(), g.grid(), "policy iteration");
    SolveReport rep{SolveStatus::stalled, warm_start ? *warm_start : GridFunction(dop.grid()), 0, 0, 0, 0, {}};
    const double g_sup = norm(g, NormKind::sup);
    const double op_norm = dop.operator_norm() + std::abs(shift);
    detail::LinearSolver lu;
    Policy pol = dop.policy(rep.u);
    for (int k = 1; k <= opts.max_policy_iters; ++k) {
        lu.factor(detail::add_diagonal(dop.assemble(pol), shift), "policy iteration");
        rep.u = GridFunction(dop.grid(), lu.solve(g.values(), "policy iteration"));
        rep.iters = k;
        const GridFunction r = dop.apply(rep.u) + shift * rep.u - g;
        rep.residual_sup = norm(r, NormKind::sup);
        rep.residual_history.push_back(rep.residual_sup);
        const double u_sup = norm(rep.u, NormKind::sup);
        rep.tolerance = std::max(opts.rtol * (1.0 + g_sup), roundoff_floor(op_norm, u_sup));
        Policy next = dop.policy(rep.u);
        if (rep.residual_sup <= rep.tolerance) {
            rep.status = SolveStatus::converged;
            return rep;
        }
        if (next == pol) {
            // Fixed policy but residual above tolerance: the linear solve itself is inaccurate.
            rep.status = SolveStatus::stalled;
            return rep;
        }
        pol = std::move(next);
    }
    rep.status = SolveStatus::stalled;
    return rep;
}

}  // namespace

SolveReport solve_proper(const DiscreteOperator& dop, double shift, const GridFunction& g,
                         const SolverOptions& opts) {
    if (shift > -dop.gamma() + 1e-12 * (1.0 + dop.gamma())) {
        throw ImproperShift("shift " + std::to_string(shift) + " exceeds -gamma = " + std::to_string(-dop.gamma()));
    }
    if (!dop.monotone()) throw MonotonicityViolation("operator lacks the monotone stencil certificate");
    return howard(dop, shift, g, opts, nullptr);
}

SolveReport solve_below_principal(const DiscreteOperator& dop, double shift, const GridFunction& g,
                                  double lambda1_plus, const SolverOptions& opts,
                                  const GridFunction* warm_start) {
    if (!dop.monotone()) throw MonotonicityViolation("operator lacks the monotone stencil certificate");
    if (shift <= -dop.gamma()) return howard(dop, shift, g, opts, warm_start);
    if (dop.sense() != Sense::sup) {
        throw ImproperShift("shifts above -gamma need a sup-sense operator");
    }
    if (!(shift < lambda1_plus)) {
        throw ImproperShift("shift " + std::to_string(shift) + " is not below the principal half-eigenvalue " +
                            std::to_string(lambda1_plus));
    }
    // Start from a policy whose linear operator is invertible: the one active at the
    // proper-shift solution with the same data.
    GridFunction start = warm_start ? *warm_start : howard(dop, -dop.gamma() - 1.0, g, opts, nullptr).u;
    return howard(dop, shift, g, opts, &start);
}

GridFunction nonlinear_residual(const DiscreteOperator& dop, double lambda, const Nonlinearity& f,
                                const GridFunction& u) {
    return dop.apply(u) + lambda * u - f.evaluate(u);
}

double nonlinear_tolerance(const DiscreteOperator& dop, double lambda, const Nonlinearity& f,
                           const GridFunction& u, const SolverOptions& opts) {
    const double u_sup = norm(u, NormKind::sup);
    const double f_sup = norm(f.evaluate(u), NormKind::sup);
    return std::max(opts.rtol * (1.0 + f_sup + std::abs(lambda) * u_sup),
                    roundoff_floor(dop.operator_norm() + std::abs(lambda), u_sup));
}

GridFunction k_map(const DiscreteOperator& dop, double c, double lambda, const Nonlinearity& f,
                   const GridFunction& v, const SolverOptions& opts) {
    const GridFunction rhs = (c - lambda) * v + f.evaluate(v);
    SolveReport rep = solve_proper(dop, c, rhs, opts);
    if (!rep.converged()) throw NoConvergence("k_map: proper solve did not converge");
    return std::move(rep.u);
}

double monotone_shift(const DiscreteOperator& dop, double lambda, const Nonlinearity& f, double R) {
    const double up = f.upper_lipschitz(std::max(R, 1e-12));
    if (!std::isfinite(up)) throw InvalidParams("nonlinearity has unbounded upper slope on the working range");
    return -dop.gamma() - std::max(up, 0.0) - std::abs(lambda);
}

SubSuperPair SubSuperPair::make(GridFunction lower, GridFunction upper) {
    require_same_grid(lower.grid(), upper.grid(), "SubSuperPair");
    const GridFunction gap = upper - lower;
    Eigen::Index node = 0;
    const double m = gap.values().minCoeff(&node);
    if (m < 0.0) {
        throw NotOrdered("lower exceeds upper by " + std::to_string(-m) + " at node " + std::to_string(node));
    }
    SubSuperPair p{std::move(lower), std::move(upper), m, 0.0};
    p.slope_margin = boundary_slope_margin(gap);
    return p;
}

std::optional<SubSuperPair> construct_pair(const DiscreteOperator& dop, double lambda, const Nonlinearity& f,
                                           double lambda1_plus, const SolverOptions& opts) {
    if (!(lambda < lambda1_plus)) return std::nullopt;
    double R = 1.0;
    const Grid& grid = dop.grid();
    for (int attempt = 0; attempt < 80; ++attempt, R *= 2.0) {
        double B = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            for (int k = -64; k <= 64; ++k) B = std::max(B, std::abs(f(i, R * k / 64.0)));
        }
        if (!std::isfinite(B)) return std::nullopt;
        B += 1.0;
        const GridFunction rhs = GridFunction::constant(grid, B);
        SolveReport up = solve_below_principal(dop, lambda, -1.0 * rhs, lambda1_plus, opts);
        SolveReport lo = solve_below_principal(dop, lambda, rhs, lambda1_plus, opts);
        if (!up.converged() || !lo.converged()) return std::nullopt;
        const double reach = std::max(norm(up.u, NormKind::sup), norm(lo.u, NormKind::sup));
        if (reach <= R) {
            try {
                return SubSuperPair::make(std::move(lo.u), std::move(up.u));
            } catch (const NotOrdered&) {
                return std::nullopt;
            }
        }
    }
    return std::nullopt;
}

SolveReport perron_solve(const DiscreteOperator& dop, double lambda, const Nonlinearity& f,
                         const SubSuperPair& pair, PerronDirection direction, const SolverOptions& opts) {
    const GridFunction gap = pair.upper - pair.lower;
    if (gap.min() < 0.0) throw NotOrdered("sub-solution exceeds super-solution");
    const double tol_lo = nonlinear_tolerance(dop, lambda, f, pair.lower, opts);
    const double tol_up = nonlinear_tolerance(dop, lambda, f, pair.upper, opts);
    const GridFunction r_lo = nonlinear_residual(dop, lambda, f, pair.lower);
    const GridFunction r_up = nonlinear_residual(dop, lambda, f, pair.upper);
    if (r_lo.min() < -tol_lo) {
        throw NotSubSuper("lower violates the sub-solution inequality by " + std::to_string(-r_lo.min()));
    }
    if (r_up.max() > tol_up) {
        throw NotSubSuper("upper violates the super-solution inequality by " + std::to_string(r_up.max()));
    }
    const double R = 2.0 * std::max(norm(pair.lower, NormKind::sup), norm(pair.upper, NormKind::sup));
    const double c = monotone_shift(dop, lambda, f, R);
    SolveReport rep{SolveStatus::stalled, direction == PerronDirection::from_below ? pair.lower : pair.upper,
                    0, 0, 0, 0, {}};
    for (int k = 0; k <= opts.max_perron_iters; ++k) {
        rep.residual_sup = norm(nonlinear_residual(dop, lambda, f, rep.u), NormKind::sup);
        rep.tolerance = nonlinear_tolerance(dop, lambda, f, rep.u, opts);
        rep.residual_history.push_back(rep.residual_sup);
        rep.iters = k;
        if (rep.residual_sup <= rep.tolerance) {
            rep.status = SolveStatus::converged;
            return rep;
        }
        if (k == opts.max_perron_iters) break;
        GridFunction next = k_map(dop, c, lambda, f, rep.u, opts);
        // Keep the iterate inside the tube against round-off.
        for (std::size_t i = 0; i < next.size(); ++i) next[i] = std::clamp(next[i], pair.lower[i], pair.upper[i]);
        const double step = norm(next - rep.u, NormKind::sup);
        rep.u = std::move(next);
        if (k >= 50 && step <= 1e-6 * (1.0 + norm(rep.u, NormKind::sup))) {
            // Slow linear convergence near resonance: finish with Newton if it stays
            // on the monotone side of the current iterate.
            SolveReport polish = newton_solve(dop, lambda, f, rep.u, opts);
            if (polish.converged()) {
                const double sgn = direction == PerronDirection::from_below ? 1.0 : -1.0;
                const double slack = 1e-6 * (1.0 + norm(rep.u, NormKind::sup));
                const bool monotone_side = (sgn * (polish.u - rep.u)).min() >= -slack;
                const bool inside = (polish.u - pair.lower).min() >= -slack && (pair.upper - polish.u).min() >= -slack;
                if (monotone_side && inside) {
                    polish.iters += k + 1;
                    polish.residual_history.insert(polish.residual_history.begin(), rep.residual_history.begin(),
                                                   rep.residual_history.end());
                    return polish;
                }
            }
        }
    }
    rep.status = SolveStatus::stalled;
    return rep;
}

double growth_rate(const std::vector<double>& norms, int window) {
    const int n = static_cast<int>(norms.size());
    const int m = std::min(n, window);
    if (m < 2) return 0.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int k = 0; k < m; ++k) {
        const double x = k;
        const double y = std::log(std::max(norms[static_cast<std::size_t>(n - m + k)], 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double den = m * sxx - sx * sx;
    return den == 0.0 ? 0.0 : (m * sxy - sx * sy) / den;
}

SolveReport newton_solve(const DiscreteOperator& dop, double lambda, const Nonlinearity& f,
                         const GridFunction& u0, const SolverOptions& opts) {
    require_same_grid(dop.grid(), u0.grid(), "newton_solve");
    SolveReport rep{SolveStatus::stalled, u0, 0, 0, 0, 0, {}};
    if (!u0.all_finite()) {
        rep.status = SolveStatus::stalled;
        rep.residual_sup = std::numeric_limits<double>::infinity();
        rep.residual_history.push_back(rep.residual_sup);
        return rep;
    }
    std::vector<double> norms;
    detail::LinearSolver lu;
    GridFunction r = nonlinear_residual(dop, lambda, f, rep.u);
    double rs = norm(r, NormKind::sup);
    const std::size_t n = rep.u.size();
    for (int k = 0;; ++k) {
        rep.residual_sup = rs;
        rep.tolerance = nonlinear_tolerance(dop, lambda, f, rep.u, opts);
        rep.residual_history.push_back(rs);
        rep.iters = k;
        norms.push_back(norm(rep.u, NormKind::sup));
        if (rs <= rep.tolerance) {
            rep.status = SolveStatus::converged;
            return rep;
        }
        if (k >= opts.max_newton_iters) {
            rep.growth_rate = growth_rate(norms, opts.growth_window);
            rep.status = SolveStatus::diverged;
            return rep;
        }
        if (static_cast<int>(norms.size()) >= opts.growth_window) {
            rep.growth_rate = growth_rate(norms, opts.growth_window);
            const auto& h = rep.residual_history;
            const double then = h[h.size() - static_cast<std::size_t>(opts.growth_window)];
            if ((rep.growth_rate > opts.growth_threshold && rs > 0.1 * then) || norms.back() > 1e14) {
                rep.status = SolveStatus::diverged;
                return rep;
            }
        }
        Vector diag(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            double d = f.derivative(i, rep.u[i]);
            if (std::isnan(d)) d = 0.0;
            diag[static_cast<Eigen::Index>(i)] = lambda - std::clamp(d, -opts.derivative_cap, opts.derivative_cap);
        }
        Vector du;
        try {
            lu.factor(detail::add_diagonal(dop.assemble(dop.policy(rep.u)), diag), "newton");
            du = lu.solve(-r.values(), "newton");
        } catch (const LinearSolveFailure&) {
            rep.status = SolveStatus::stalled;
            return rep;
        }
        double theta = 1.0;
        bool accepted = false;
        while (theta >= opts.min_step) {
            GridFunction trial(dop.grid(), rep.u.values() + theta * du);
            if (trial.all_finite()) {
                GridFunction rt = nonlinear_residual(dop, lambda, f, trial);
                const double rts = norm(rt, NormKind::sup);
                if (rts <= (1.0 - opts.armijo_c * theta) * rs) {
                    rep.u = std::move(trial);
                    r = std::move(rt);
                    rs = rts;
                    accepted = true;
                    break;
                }
            }
            theta *= opts.armijo_factor;
        }
        if (!accepted) {
            rep.growth_rate = growth_rate(norms, opts.growth_window);
            rep.status = SolveStatus::stalled;
            return rep;
        }
    }
}

}  // namespace hjb
