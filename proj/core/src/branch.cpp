#include "hjb/branch.hpp"

#include "hjb/errors.hpp"
#include "linalg.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace hjb {

const char* to_string(SignClass s) {
    switch (s) {
        case SignClass::positive: return "positive";
        case SignClass::negative: return "negative";
        case SignClass::sign_changing: return "sign_changing";
        case SignClass::zero: return "zero";
    }
    return "?";
}

const char* to_string(Provenance p) {
    switch (p) {
        case Provenance::bounded: return "bounded";
        case Provenance::from_plus_infinity: return "from_plus_infinity";
        case Provenance::from_minus_infinity: return "from_minus_infinity";
        case Provenance::from_zero: return "from_zero";
    }
    return "?";
}

const char* to_string(Termination t) {
    switch (t) {
        case Termination::reached_target: return "reached_target";
        case Termination::left_window: return "left_window";
        case Termination::norm_limit: return "norm_limit";
        case Termination::stalled: return "stalled";
        case Termination::max_points: return "max_points";
    }
    return "?";
}

SignClass classify_sign(const GridFunction& u, double hopf) {
    const double s = norm(u, NormKind::sup);
    if (s <= 1e-12) return SignClass::zero;
    if (u.min() > 0.0 && boundary_slope_margin(u) > hopf * s) return SignClass::positive;
    if (u.max() < 0.0 && boundary_slope_margin(-u) > hopf * s) return SignClass::negative;
    return SignClass::sign_changing;
}

double BranchPoint::signed_norm() const {
    switch (sign_class) {
        case SignClass::positive: return sup_norm;
        case SignClass::negative: return -sup_norm;
        default: return 0.0;
    }
}

BranchPoint make_point(const DiscreteOperator& dop, const Nonlinearity& f, double lambda, GridFunction u,
                       int arc_index, const SolverOptions& opts) {
    BranchPoint p{lambda, std::move(u), 0, 0, 0, SignClass::zero, 0, 0, arc_index};
    p.sup_norm = norm(p.u, NormKind::sup);
    p.min_val = p.u.min();
    p.max_val = p.u.max();
    p.sign_class = classify_sign(p.u);
    p.residual_sup = norm(nonlinear_residual(dop, lambda, f, p.u), NormKind::sup);
    p.tolerance = nonlinear_tolerance(dop, lambda, f, p.u, opts);
    return p;
}

double Branch::lambda_min() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& p : points) m = std::min(m, p.lambda);
    return m;
}

double Branch::lambda_max() const {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& p : points) m = std::max(m, p.lambda);
    return m;
}

namespace {

struct Tangent {
    GridFunction du;  // already divided by the u-scale
    double dl;
};

// Bordered Newton for G(u, lambda) = 0 with the linear constraint
// <u - u_pred, tau_u> / S + (lambda - lambda_pred) tau_l = 0.
std::optional<std::pair<GridFunction, double>> arclength_corrector(const DiscreteOperator& dop, const Nonlinearity& f,
                                                                   GridFunction u, double lambda, const Tangent& tau,
                                                                   double S, const SolverOptions& opts) {
    const Grid& grid = dop.grid();
    const std::size_t n = grid.size();
    const auto N = static_cast<Eigen::Index>(n);
    const double w = grid.cell_volume();
    detail::LinearSolver lu;
    GridFunction r = nonlinear_residual(dop, lambda, f, u);
    double rs = norm(r, NormKind::sup);
    for (int k = 0; k <= opts.max_newton_iters; ++k) {
        if (!std::isfinite(rs)) return std::nullopt;
        if (rs <= nonlinear_tolerance(dop, lambda, f, u, opts)) return std::make_pair(std::move(u), lambda);
        if (k == opts.max_newton_iters) break;
        Vector diag(N);
        for (std::size_t i = 0; i < n; ++i) {
            double d = f.derivative(i, u[i]);
            if (std::isnan(d)) d = 0.0;
            diag[static_cast<Eigen::Index>(i)] = lambda - std::clamp(d, -opts.derivative_cap, opts.derivative_cap);
        }
        const SparseMatrix a = detail::add_diagonal(dop.assemble(dop.policy(u)), diag);
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(a.nonZeros()) + 2 * n + 1);
        for (Eigen::Index row = 0; row < a.outerSize(); ++row) {
            for (SparseMatrix::InnerIterator it(a, row); it; ++it) trip.emplace_back(row, it.col(), it.value());
        }
        for (std::size_t i = 0; i < n; ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            trip.emplace_back(ii, N, u[i]);
            trip.emplace_back(N, ii, w * tau.du[i] / S);
        }
        trip.emplace_back(N, N, tau.dl);
        detail::ColMatrix J(N + 1, N + 1);
        J.setFromTriplets(trip.begin(), trip.end());
        J.makeCompressed();
        Vector rhs(N + 1);
        rhs.head(N) = -r.values();
        rhs[N] = 0.0;
        Vector dz;
        try {
            lu.factor(J, "arclength corrector");
            dz = lu.solve(rhs, "arclength corrector");
        } catch (const LinearSolveFailure&) {
            return std::nullopt;
        }
        double theta = 1.0;
        bool accepted = false;
        while (theta >= opts.min_step) {
            GridFunction ut(grid, u.values() + theta * dz.head(N));
            const double lt = lambda + theta * dz[N];
            GridFunction rt = nonlinear_residual(dop, lt, f, ut);
            const double rts = norm(rt, NormKind::sup);
            if (std::isfinite(rts) && rts <= (1.0 - opts.armijo_c * theta) * rs) {
                u = std::move(ut);
                lambda = lt;
                r = std::move(rt);
                rs = rts;
                accepted = true;
                break;
            }
            theta *= opts.armijo_factor;
        }
        if (!accepted) return std::nullopt;
    }
    return std::nullopt;
}

// Unit tangent from the linearization J u_lambda = -u, oriented so that lambda moves along
// `dir`; falls back to the pure lambda direction when J is singular.
Tangent initial_tangent(const DiscreteOperator& dop, const Nonlinearity& f, const GridFunction& u, double lambda,
                        double dir, double S, const SolverOptions& opts) {
    const std::size_t n = dop.grid().size();
    Vector diag(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        double d = f.derivative(i, u[i]);
        if (std::isnan(d)) d = 0.0;
        diag[static_cast<Eigen::Index>(i)] = lambda - std::clamp(d, -opts.derivative_cap, opts.derivative_cap);
    }
    Tangent tau{GridFunction(dop.grid()), dir};
    try {
        detail::LinearSolver lu;
        lu.factor(detail::add_diagonal(dop.assemble(dop.policy(u)), diag), "initial tangent");
        GridFunction v(dop.grid(), lu.solve(-u.values(), "initial tangent"));
        v *= dir / S;
        const double len = std::sqrt(1.0 + inner(v, v));
        tau = Tangent{(1.0 / len) * v, dir / len};
    } catch (const LinearSolveFailure&) {
    }
    return tau;
}

}  // namespace

Branch continue_branch(const DiscreteOperator& dop, const Nonlinearity& f, const BranchPoint& start,
                       double lambda_target, const StepControl& ctrl) {
    Branch br;
    {
        SolveReport rep = newton_solve(dop, start.lambda, f, start.u, ctrl.solver);
        if (!rep.converged()) throw NoConvergence("continue_branch: start point does not converge");
        br.points.push_back(make_point(dop, f, start.lambda, std::move(rep.u), 0, ctrl.solver));
    }
    const double dir0 = lambda_target >= start.lambda ? 1.0 : -1.0;
    if (lambda_target == start.lambda) return br;
    double h = ctrl.initial_step;
    int successes = 0;
    double last_dl = dir0;
    for (;;) {
        if (static_cast<int>(br.points.size()) >= ctrl.max_points) {
            br.termination = Termination::max_points;
            return br;
        }
        const BranchPoint& p1 = br.points.back();
        const double S = std::max(1.0, norm(p1.u, NormKind::L2));
        Tangent tau = br.points.size() < 2 ? initial_tangent(dop, f, p1.u, p1.lambda, dir0, S, ctrl.solver)
                                           : Tangent{GridFunction(dop.grid()), dir0};
        if (br.points.size() >= 2) {
            const BranchPoint& p0 = br.points[br.points.size() - 2];
            GridFunction du = (1.0 / S) * (p1.u - p0.u);
            const double dl = p1.lambda - p0.lambda;
            const double len = std::sqrt(dl * dl + inner(du, du));
            if (len > 0.0) tau = Tangent{(1.0 / len) * du, dl / len};
        }
        double lam_pred = p1.lambda + h * tau.dl;
        GridFunction u_pred = p1.u + (h * S) * tau.du;
        std::optional<std::pair<GridFunction, double>> sol;
        bool clipped = false;
        if (std::abs(tau.dl) >= ctrl.arclength_switch) {
            if ((p1.lambda - lambda_target) * (lam_pred - lambda_target) < 0.0 || lam_pred == lambda_target) {
                const double s = (lambda_target - p1.lambda) / (lam_pred - p1.lambda);
                u_pred = p1.u + s * (u_pred - p1.u);
                lam_pred = lambda_target;
                clipped = true;
            }
            SolveReport rep = newton_solve(dop, lam_pred, f, u_pred, ctrl.solver);
            if (rep.converged()) sol = std::make_pair(std::move(rep.u), lam_pred);
        } else {
            sol = arclength_corrector(dop, f, u_pred, lam_pred, tau, S, ctrl.solver);
        }
        bool ok = false;
        if (sol) {
            // Reject correctors that jumped away from the predicted point.
            const GridFunction du = (1.0 / S) * (sol->first - p1.u);
            const double dl = sol->second - p1.lambda;
            const double dist = std::sqrt(dl * dl + inner(du, du));
            const GridFunction cu = (1.0 / S) * (sol->first - u_pred);
            const double cl = sol->second - lam_pred;
            const double correction = std::sqrt(cl * cl + inner(cu, cu));
            ok = dist <= 3.0 * h + 1e-12 && dist > 0.0 && correction <= 0.5 * h + 1e-12;
            if (ok) {
                SolveReport rep = newton_solve(dop, sol->second, f, sol->first, ctrl.solver);
                ok = rep.converged();
                if (ok) sol->first = std::move(rep.u);
            }
        }
        if (!ok) {
            h *= 0.5;
            successes = 0;
            if (h < ctrl.min_step) {
                br.termination = Termination::stalled;
                return br;
            }
            continue;
        }
        const double lam_prev = p1.lambda;
        const double dl = sol->second - lam_prev;
        const int arc = p1.arc_index + 1;
        if (dl * last_dl < 0.0) br.folds.push_back(Fold{p1.lambda, last_dl > 0.0 ? 1 : -1, p1.arc_index});
        if (dl != 0.0) last_dl = dl;
        br.points.push_back(make_point(dop, f, sol->second, std::move(sol->first), arc, ctrl.solver));
        const BranchPoint& np = br.points.back();
        if ((clipped && np.lambda == lambda_target) || (lam_prev - lambda_target) * (np.lambda - lambda_target) < 0.0) {
            br.termination = Termination::reached_target;
            return br;
        }
        if (np.lambda < ctrl.lambda_min || np.lambda > ctrl.lambda_max) {
            br.termination = Termination::left_window;
            return br;
        }
        if (np.sup_norm > ctrl.max_norm) {
            br.termination = Termination::norm_limit;
            return br;
        }
        if (++successes >= 4) {
            h = std::min(2.0 * h, ctrl.max_step);
            successes = 0;
        }
    }
}

BranchPoint seed_from_infinity(const DiscreteOperator& dop, const Spectrum& spectrum, const Nonlinearity& f,
                               HalfSign sign, SeedSide side, double distance, const SolverOptions& opts) {
    const EigenPair& pair = sign == HalfSign::plus ? spectrum.plus : spectrum.minus;
    const double lambda = pair.value + (side == SeedSide::right ? distance : -distance);
    const double scale = 1.0 + norm(f.evaluate(GridFunction(dop.grid())), NormKind::sup);
    const SignClass want = sign == HalfSign::plus ? SignClass::positive : SignClass::negative;
    std::ostringstream diag;
    for (double amp : {10.0, 30.0, 100.0, 300.0}) {
        const double A = amp * scale;
        SolveReport rep = newton_solve(dop, lambda, f, A * pair.efun, opts);
        diag << " A=" << A << ":" << to_string(rep.status);
        if (!rep.converged()) continue;
        BranchPoint p = make_point(dop, f, lambda, std::move(rep.u), 0, opts);
        diag << "(" << to_string(p.sign_class) << ", |u|=" << p.sup_norm << ")";
        if (p.sign_class == want && p.sup_norm >= 10.0 * scale) return p;
    }
    throw NoSeed("no large " + std::string(to_string(want)) + " solution at lambda = " + std::to_string(lambda) +
                 ":" + diag.str());
}

std::vector<BranchPoint> census(const DiscreteOperator& dop, const Spectrum& spectrum, const Nonlinearity& f,
                                double lambda, const MultistartSpec& spec, const SolverOptions& opts) {
    const Grid& grid = dop.grid();
    const GridFunction f0 = f.evaluate(GridFunction(grid));
    const double scale = spec.scale > 0.0 ? spec.scale : 1.0 + norm(f0, NormKind::sup);
    std::vector<GridFunction> starts = spec.extra_starts;
    starts.push_back(GridFunction(grid));
    for (double a : spec.amplitudes) {
        for (const GridFunction* phi : {&spectrum.plus.efun, &spectrum.minus.efun}) {
            starts.push_back((a * scale) * *phi);
            starts.push_back((-a * scale) * *phi);
        }
    }
    // Proper-solve warm starts: F[w] + c w = -/+ (1 + |f(., 0)|).
    const double c = -dop.gamma() - 1.0;
    for (double s : {1.0, -1.0}) {
        SolveReport rep = solve_proper(dop, c, s * GridFunction::constant(grid, scale), opts);
        if (rep.converged()) starts.push_back(std::move(rep.u));
    }
    SolveReport forced = solve_proper(dop, c, f0, opts);
    if (forced.converged()) starts.push_back(std::move(forced.u));

    std::vector<GridFunction> found;
    auto add = [&](GridFunction u) {
        const double nu = norm(u, NormKind::sup);
        if (nu > spec.max_norm * scale) return;
        for (const GridFunction& v : found) {
            if (norm(u - v, NormKind::sup) <= spec.dedupe_tol * (1.0 + nu)) return;
        }
        found.push_back(std::move(u));
    };
    for (const GridFunction& s : starts) {
        SolveReport rep = newton_solve(dop, lambda, f, s, opts);
        if (rep.converged()) add(std::move(rep.u));
    }
    if (spec.use_perron && lambda < spectrum.plus.value) {
        try {
            if (auto pair = construct_pair(dop, lambda, f, spectrum.plus.value, opts)) {
                for (PerronDirection d : {PerronDirection::from_below, PerronDirection::from_above}) {
                    SolveReport rep = perron_solve(dop, lambda, f, *pair, d, opts);
                    if (rep.converged()) add(std::move(rep.u));
                }
            }
        } catch (const Error&) {
            // Perron needs a finite upper slope of f; Newton starts already ran.
        }
    }
    std::vector<BranchPoint> out;
    for (GridFunction& u : found) out.push_back(make_point(dop, f, lambda, std::move(u), 0, opts));
    std::sort(out.begin(), out.end(), [](const BranchPoint& a, const BranchPoint& b) { return a.sup_norm < b.sup_norm; });
    return out;
}

Diagram assemble_diagram(std::vector<Branch> branches, const std::vector<double>& lambda_grid) {
    Diagram d;
    d.branches = std::move(branches);
    for (std::size_t b = 0; b < d.branches.size(); ++b) {
        const Branch& br = d.branches[b];
        Polyline pl{static_cast<int>(b), {}};
        for (const BranchPoint& p : br.points) pl.points.emplace_back(p.lambda, p.signed_norm());
        d.polylines.push_back(std::move(pl));
        d.folds.insert(d.folds.end(), br.folds.begin(), br.folds.end());
    }
    for (double lam : lambda_grid) {
        int count = 0;
        for (const Branch& br : d.branches) {
            const auto& pts = br.points;
            if (pts.empty()) continue;
            for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
                const double lo = std::min(pts[i].lambda, pts[i + 1].lambda);
                const double hi = std::max(pts[i].lambda, pts[i + 1].lambda);
                if (lo <= lam && lam < hi) ++count;
            }
            if (lam == br.lambda_max()) ++count;
        }
        d.counts.push_back({lam, count});
    }
    return d;
}

void write_diagram_csv(std::ostream& os, const Diagram& diagram) {
    os << "branch,arc,lambda,signed_sup_norm,sign_class,residual\n";
    os << std::setprecision(17);
    for (std::size_t b = 0; b < diagram.branches.size(); ++b) {
        for (const BranchPoint& p : diagram.branches[b].points) {
            os << b << ',' << p.arc_index << ',' << p.lambda << ',' << p.signed_norm() << ',' << to_string(p.sign_class)
               << ',' << p.residual_sup << '\n';
        }
    }
}

}  // namespace hjb
