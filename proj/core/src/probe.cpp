#include "hjb/probe.hpp"

#include "hjb/errors.hpp"
#include "hjb/nonlin.hpp"

#include <cmath>
#include <sstream>
#include <vector>

namespace hjb {

const char* to_string(Solvability s) {
    switch (s) {
        case Solvability::solvable: return "solvable";
        case Solvability::unsolvable: return "unsolvable";
        case Solvability::inconclusive: return "inconclusive";
    }
    return "?";
}

namespace {

bool close_to(double a, double b) { return std::abs(a - b) <= 1e-9 * (1.0 + std::abs(b)); }

struct Multistart {
    std::optional<GridFunction> u;
    int tried = 0;
};

Multistart multistart_newton(const DiscreteOperator& dop, const Spectrum& spectrum, double lambda,
                             const GridFunction& g, const ProbeBudget& budget, const SolverOptions& opts,
                             const std::vector<GridFunction>& extra) {
    const Grid& grid = dop.grid();
    const Nonlinearity forcing = builtin("forcing", {}, grid, {{"g", g}});
    const double g_sup = norm(g, NormKind::sup);
    const double cap = budget.max_norm_factor * (1.0 + g_sup);
    SolverOptions o = opts;
    o.max_newton_iters = static_cast<int>(std::ceil(opts.max_newton_iters * budget.scale));
    std::vector<GridFunction> starts = extra;
    starts.push_back(GridFunction(grid));
    SolveReport warm = solve_proper(dop, -dop.gamma() - 1.0, g, opts);
    if (warm.converged()) starts.push_back(warm.u);
    for (double amp = 1.0; amp <= 100.0 * budget.scale; amp *= 10.0) {
        const double A = amp * (1.0 + g_sup);
        starts.push_back(A * spectrum.plus.efun);
        starts.push_back(-A * spectrum.plus.efun);
        starts.push_back(A * spectrum.minus.efun);
        starts.push_back(-A * spectrum.minus.efun);
    }
    Multistart out;
    for (const GridFunction& s : starts) {
        ++out.tried;
        SolveReport rep = newton_solve(dop, lambda, forcing, s, o);
        if (rep.converged() && norm(rep.u, NormKind::sup) <= cap) {
            out.u = std::move(rep.u);
            return out;
        }
    }
    return out;
}

// Solution at t = 0 from a bracketing pair of curve points with t(mu_a) <= 0 <= t(mu_b).
std::optional<GridFunction> curve_root(const DiscreteOperator& dop, double lambda, const GridFunction& phi,
                                       const GridFunction& g, CurvePoint a, CurvePoint b) {
    for (int it = 0; it < 200; ++it) {
        if (std::abs(a.t) <= 1e-12 * (1.0 + norm(g, NormKind::sup))) return a.u;
        const double s = a.t == b.t ? 0.5 : std::clamp(a.t / (a.t - b.t), 0.05, 0.95);
        const double mu = a.mu + s * (b.mu - a.mu);
        auto p = solve_on_curve(dop, lambda, phi, g, mu, a.u + s * (b.u - a.u), a.t + s * (b.t - a.t));
        if (!p) return std::nullopt;
        if (p->t <= 0.0) {
            a = std::move(*p);
        } else {
            b = std::move(*p);
        }
        if (std::abs(b.mu - a.mu) <= 1e-14 * (1.0 + std::abs(a.mu))) break;
    }
    return a.u;
}

}  // namespace

ProbeResult solvability_probe(const DiscreteOperator& dop, const Spectrum& spectrum, double lambda,
                              const GridFunction& g, const ProbeBudget& budget, const SolverOptions& opts) {
    require_same_grid(dop.grid(), g.grid(), "solvability_probe");
    ProbeResult res;
    const double l1p = spectrum.plus.value;
    const double l1m = spectrum.minus.value;
    std::ostringstream ev;

    if (lambda < l1p && !close_to(lambda, l1p)) {
        SolveReport rep = solve_below_principal(dop, lambda, g, l1p, opts);
        if (rep.converged()) {
            res.verdict = Solvability::solvable;
            res.u = std::move(rep.u);
            res.evidence = "unique solution below the principal half-eigenvalue";
        } else {
            res.evidence = "policy iteration below the principal half-eigenvalue did not converge";
        }
        return res;
    }

    const bool at_plus = close_to(lambda, l1p);
    const bool at_minus = close_to(lambda, l1m);
    std::vector<GridFunction> extra;
    std::optional<ApproachFit> fit;
    if (at_plus || at_minus) {
        fit = approach_fit(dop, spectrum, at_plus ? HalfSign::plus : HalfSign::minus, g, {}, opts);
        if (fit->last) extra.push_back(*fit->last);
    }
    Multistart ms = multistart_newton(dop, spectrum, lambda, g, budget, opts, extra);
    if (ms.u) {
        res.verdict = Solvability::solvable;
        res.u = std::move(ms.u);
        res.evidence = "newton converged";
        return res;
    }
    ev << "all " << ms.tried << " newton starts failed";

    if (fit) {
        if (fit->blowup) {
            res.verdict = Solvability::unsolvable;
            ev << "; approach family blows up along phi_1^" << (at_plus ? "+" : "-") << " (b = " << fit->b << ")";
        } else {
            ev << "; approach family stays bounded (b = " << fit->b << ")";
        }
        res.evidence = ev.str();
        return res;
    }

    if (lambda > l1p && lambda < l1m) {
        const GridFunction& phi = spectrum.plus.efun;
        CriticalCurve curve = trace_critical_curve(dop, lambda, phi, g);
        if (!curve.minimum) {
            ev << "; critical curve unavailable (" << curve.note << ")";
            res.evidence = ev.str();
            return res;
        }
        const double tmin = curve.minimum->t;
        res.critical_t = tmin;
        const double margin = 1e-6 * (1.0 + norm(g, NormKind::sup));
        if (!curve.complete) {
            ev << "; critical curve incomplete (" << curve.note << ")";
        } else if (tmin > margin) {
            res.verdict = Solvability::unsolvable;
            ev << "; critical value of g is " << tmin << " > 0";
        } else if (tmin < -margin) {
            // Locate t(mu) = 0 on the traced curve next to the minimiser.
            const auto& pts = curve.points;
            std::optional<GridFunction> u;
            for (std::size_t j = 0; j + 1 < pts.size() && !u; ++j) {
                const CurvePoint& a = pts[j];
                const CurvePoint& b = pts[j + 1];
                if (a.t <= 0.0 && b.t > 0.0) u = curve_root(dop, lambda, phi, g, a, b);
                if (b.t <= 0.0 && a.t > 0.0) u = curve_root(dop, lambda, phi, g, b, a);
            }
            if (u) {
                const Nonlinearity forcing = builtin("forcing", {}, dop.grid(), {{"g", g}});
                SolveReport rep = newton_solve(dop, lambda, forcing, *u, opts);
                if (rep.converged()) {
                    res.verdict = Solvability::solvable;
                    res.u = std::move(rep.u);
                    res.evidence = "solution located on the critical curve";
                    return res;
                }
            }
            ev << "; critical value " << tmin << " < 0 but no zero crossing was resolved";
        } else {
            ev << "; critical value " << tmin << " within margin of 0";
        }
    } else {
        ev << "; no nonexistence certificate above lambda_1^-";
    }
    res.evidence = ev.str();
    return res;
}

}  // namespace hjb
