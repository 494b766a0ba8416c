#include "hjb/resonance.hpp"

#include "hjb/errors.hpp"
#include "hjb/nonlin.hpp"
#include "linalg.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace hjb {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

std::optional<GridFunction> smallest_newton_solution(const DiscreteOperator& dop, double lambda,
                                                     const Nonlinearity& f, const std::vector<GridFunction>& starts,
                                                     const SolverOptions& opts) {
    std::optional<GridFunction> best;
    double best_norm = std::numeric_limits<double>::infinity();
    for (const GridFunction& s : starts) {
        SolveReport rep = newton_solve(dop, lambda, f, s, opts);
        if (!rep.converged()) continue;
        const double nn = norm(rep.u, NormKind::sup);
        if (nn < best_norm) {
            best_norm = nn;
            best = std::move(rep.u);
        }
    }
    return best;
}

}  // namespace

ApproachFit approach_fit(const DiscreteOperator& dop, const Spectrum& spectrum, HalfSign side, const GridFunction& g,
                         const ApproachOptions& opts, const SolverOptions& solver) {
    require_same_grid(dop.grid(), g.grid(), "approach_fit");
    ApproachFit fit;
    fit.side = side;
    const EigenPair& pair = side == HalfSign::plus ? spectrum.plus : spectrum.minus;
    const Nonlinearity forcing = builtin("forcing", {}, dop.grid(), {{"g", g}});
    const double g_sup = norm(g, NormKind::sup);
    std::optional<GridFunction> prev;
    double prev_delta = 0.0;
    for (int k = 0; k < opts.points; ++k) {
        const double delta = opts.delta0 * std::ldexp(1.0, -k);
        std::optional<GridFunction> u;
        if (side == HalfSign::plus) {
            SolveReport rep = solve_below_principal(dop, spectrum.plus.value - delta, g, spectrum.plus.value, solver,
                                                    prev ? &*prev : nullptr);
            if (rep.converged()) u = std::move(rep.u);
        } else {
            const double lambda = spectrum.minus.value + delta;
            std::vector<GridFunction> starts;
            if (prev) {
                starts.push_back(*prev);
                starts.push_back((prev_delta / delta) * *prev);
            }
            starts.push_back(GridFunction(dop.grid()));
            for (double amp : {1.0, 10.0}) {
                const double A = amp * (1.0 + g_sup) / delta;
                starts.push_back(A * spectrum.minus.efun);
                starts.push_back(A * spectrum.plus.efun);
            }
            u = smallest_newton_solution(dop, lambda, forcing, starts, solver);
        }
        if (!u) {
            fit.complete = false;
            break;
        }
        fit.deltas.push_back(delta);
        fit.norms.push_back(norm(*u, NormKind::sup));
        fit.projections.push_back(inner(*u, pair.efun));
        prev = *u;
        prev_delta = delta;
    }
    fit.last = prev;
    if (!fit.complete || fit.deltas.size() < 3) {
        fit.blowup = true;
        return fit;
    }
    const std::size_t total = fit.deltas.size();
    const std::size_t first = total - std::min<std::size_t>(total, static_cast<std::size_t>(std::max(opts.fit_points, 3)));
    const Eigen::Index m = static_cast<Eigen::Index>(total - first);
    Eigen::MatrixXd A(m, 3);
    Eigen::VectorXd y(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const std::size_t j = first + static_cast<std::size_t>(i);
        const double dlt = fit.deltas[j];
        // Columns scaled by the smallest distance to keep the normal equations balanced.
        A(i, 0) = 1.0;
        A(i, 1) = fit.deltas.back() / dlt;
        A(i, 2) = dlt / fit.deltas[first];
        y[i] = fit.projections[j];
    }
    const Eigen::Vector3d coef = A.colPivHouseholderQr().solve(y);
    fit.a = coef[0];
    fit.b = coef[1] * fit.deltas.back();
    fit.c = coef[2] / fit.deltas[first];
    const double dmin = fit.deltas.back();
    const double bounded_part = std::abs(fit.a) + std::abs(fit.c) * dmin;
    const double floor = 1e-9 * (1.0 + g_sup) / dmin;
    fit.blowup = fit.b / dmin > opts.blowup_ratio * bounded_part + floor;
    return fit;
}

std::optional<CurvePoint> solve_on_curve(const DiscreteOperator& dop, double lambda, const GridFunction& phi,
                                         const GridFunction& d, double mu, const GridFunction& u0, double t0,
                                         const CurveOptions& opts) {
    const Grid& grid = dop.grid();
    const std::size_t n = grid.size();
    const double w = grid.cell_volume();
    const double pp = inner(phi, phi);
    GridFunction u = u0 + ((mu - inner(u0, phi)) / pp) * phi;
    double t = t0;
    const double d_sup = norm(d, NormKind::sup);
    const double phi_sup = norm(phi, NormKind::sup);
    auto residual = [&](const GridFunction& v, double tv) { return dop.apply(v) + lambda * v - tv * phi - d; };
    auto tolerance = [&](const GridFunction& v, double tv) {
        const double v_sup = norm(v, NormKind::sup);
        return std::max(1e-10 * (1.0 + d_sup + std::abs(tv) * phi_sup + std::abs(lambda) * v_sup),
                        64.0 * kEps * (dop.operator_norm() + std::abs(lambda)) * (1.0 + v_sup));
    };
    GridFunction r = residual(u, t);
    double rs = norm(r, NormKind::sup);
    detail::LinearSolver lu;
    const auto N = static_cast<Eigen::Index>(n);
    for (int k = 0; k <= opts.max_newton_iters; ++k) {
        if (!std::isfinite(rs)) return std::nullopt;
        if (rs <= tolerance(u, t)) return CurvePoint{mu, t, std::move(u), rs};
        if (k == opts.max_newton_iters) break;
        const SparseMatrix a = detail::add_diagonal(dop.assemble(dop.policy(u)), lambda);
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(a.nonZeros()) + 2 * n);
        for (Eigen::Index row = 0; row < a.outerSize(); ++row) {
            for (SparseMatrix::InnerIterator it(a, row); it; ++it) trip.emplace_back(row, it.col(), it.value());
        }
        for (std::size_t i = 0; i < n; ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            trip.emplace_back(ii, N, -phi[i]);
            trip.emplace_back(N, ii, w * phi[i]);
        }
        detail::ColMatrix J(N + 1, N + 1);
        J.setFromTriplets(trip.begin(), trip.end());
        J.makeCompressed();
        Vector rhs(N + 1);
        rhs.head(N) = -r.values();
        rhs[N] = 0.0;
        Vector dz;
        try {
            lu.factor(J, "critical curve");
            dz = lu.solve(rhs, "critical curve");
        } catch (const LinearSolveFailure&) {
            return std::nullopt;
        }
        double theta = 1.0;
        bool accepted = false;
        while (theta >= 1e-6) {
            GridFunction ut(grid, u.values() + theta * dz.head(N));
            const double tt = t + theta * dz[N];
            GridFunction rt = residual(ut, tt);
            const double rts = norm(rt, NormKind::sup);
            if (std::isfinite(rts) && rts <= (1.0 - 1e-4 * theta) * rs) {
                u = std::move(ut);
                t = tt;
                r = std::move(rt);
                rs = rts;
                accepted = true;
                break;
            }
            theta *= 0.5;
        }
        if (!accepted) return std::nullopt;
    }
    return std::nullopt;
}

namespace {

// Secant predictor through the last two points of a march, or the last point alone.
std::pair<GridFunction, double> predict(const std::vector<CurvePoint>& pts, double mu) {
    const CurvePoint& p1 = pts.back();
    if (pts.size() < 2) return {p1.u, p1.t};
    const CurvePoint& p0 = pts[pts.size() - 2];
    const double s = (mu - p1.mu) / (p1.mu - p0.mu);
    return {p1.u + s * (p1.u - p0.u), p1.t + s * (p1.t - p0.t)};
}

}  // namespace

CriticalCurve trace_critical_curve(const DiscreteOperator& dop, double lambda, const GridFunction& phi,
                                   const GridFunction& d, const CurveOptions& opts) {
    CriticalCurve curve;
    curve.lambda = lambda;
    const double scale = 1.0 + norm(d, NormKind::sup);
    const double h = opts.step * scale;
    auto origin = solve_on_curve(dop, lambda, phi, d, 0.0, GridFunction(dop.grid()), 0.0, opts);
    if (!origin) {
        curve.complete = false;
        curve.note = "no solution at mu = 0";
        return curve;
    }
    std::vector<CurvePoint> all{*origin};
    for (double dir : {1.0, -1.0}) {
        std::vector<CurvePoint> pts{*origin};
        double best_t = origin->t;
        double best_mu = 0.0;
        int k = 1;
        double mu = dir * h;
        while (std::abs(mu) <= opts.mu_max) {
            auto [u0, t0] = predict(pts, mu);
            auto p = solve_on_curve(dop, lambda, phi, d, mu, u0, t0, opts);
            if (!p) {
                // Retry with a shorter step from the last accepted point.
                const double last = pts.back().mu;
                double m = mu;
                for (int halving = 0; halving < 8 && !p; ++halving) {
                    m = 0.5 * (last + m);
                    auto [v0, s0] = predict(pts, m);
                    p = solve_on_curve(dop, lambda, phi, d, m, v0, s0, opts);
                }
                if (!p) {
                    curve.complete = false;
                    curve.note = "march stopped at mu = " + std::to_string(last);
                    break;
                }
                mu = m;
            }
            pts.push_back(*p);
            if (p->t < best_t) {
                best_t = p->t;
                best_mu = p->mu;
            }
            const bool past = std::abs(p->mu) >= 4.0 * std::abs(best_mu) && std::abs(p->mu) >= opts.uniform_steps * h;
            if (past && p->t > best_t + opts.rise * scale) break;
            if (k < opts.uniform_steps) {
                ++k;
                mu = dir * h * k;
            } else {
                mu = 2.0 * p->mu;
            }
        }
        all.insert(all.end(), pts.begin() + 1, pts.end());
    }
    std::sort(all.begin(), all.end(), [](const CurvePoint& a, const CurvePoint& b) { return a.mu < b.mu; });
    curve.points = all;
    std::size_t i = 0;
    for (std::size_t j = 1; j < all.size(); ++j) {
        if (all[j].t < all[i].t) i = j;
    }
    if (i == 0 || i + 1 == all.size()) {
        curve.minimum = all[i];
        curve.complete = false;
        if (curve.note.empty()) curve.note = "smallest t at the end of the traced range";
        return curve;
    }
    // Golden-section refinement on [mu_{i-1}, mu_{i+1}].
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = all[i - 1].mu;
    double b = all[i + 1].mu;
    CurvePoint best = all[i];
    std::vector<CurvePoint> seen{all[i - 1], all[i], all[i + 1]};
    auto eval = [&](double m) -> std::optional<CurvePoint> {
        const CurvePoint* near = &seen.front();
        for (const CurvePoint& s : seen) {
            if (std::abs(s.mu - m) < std::abs(near->mu - m)) near = &s;
        }
        auto p = solve_on_curve(dop, lambda, phi, d, m, near->u, near->t, opts);
        if (p) {
            seen.push_back(*p);
            if (p->t < best.t) best = *p;
        }
        return p;
    };
    double x1 = b - gr * (b - a);
    double x2 = a + gr * (b - a);
    auto f1 = eval(x1);
    auto f2 = eval(x2);
    for (int it = 0; it < 100 && f1 && f2; ++it) {
        if (b - a <= opts.mu_rtol * (1.0 + std::abs(best.mu))) break;
        if (f1->t <= f2->t) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = eval(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = eval(x2);
        }
    }
    if (!f1 || !f2) curve.note = "golden-section refinement lost the curve";
    curve.minimum = best;
    return curve;
}

}  // namespace hjb
