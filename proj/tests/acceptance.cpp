// Acceptance run: one line per criterion, exit status 1 if any fails.

#include "hjb/branch.hpp"
#include "hjb/eigen.hpp"
#include "hjb/errors.hpp"
#include "hjb/hypotheses.hpp"
#include "hjb/nonlin.hpp"
#include "hjb/operator.hpp"
#include "hjb/oracle.hpp"
#include "hjb/probe.hpp"
#include "hjb/solver.hpp"
#include "hjb/tstar.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace hjb;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double pi2 = pi * pi;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        pass = pass && ok;
        if (!ok) detail << "[failed: " << what << "] ";
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

struct Setup {
    Grid grid;
    DiscreteOperator dop;
    Spectrum spectrum;
    double lp, lm;
};

Setup setup(const HJBOperator& op, int n, double length = 1.0) {
    Grid g(Domain::interval(length), n);
    DiscreteOperator dop = discretize(op, g);
    Spectrum sp = principal_spectrum(dop);
    const double lp = sp.plus.value, lm = sp.minus.value;
    return {g, std::move(dop), std::move(sp), lp, lm};
}

GridFunction sample(const Grid& g, double (*fn)(double)) {
    return GridFunction::sample(g, [fn](const Point& p) { return fn(p[0]); });
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// ---------------------------------------------------------------------------

void half_eigenvalues_barenblatt(Outcome& o) {
    const auto t0 = Clock::now();
    const HJBOperator op = HJBOperator::barenblatt(1.0, 2.0);
    const Setup s = setup(op, 400);
    const double elapsed = seconds_since(t0);
    const double sp = shooting_eigen_1d(op, s.grid.domain(), HalfSign::plus).values.at(0);
    const double sm = shooting_eigen_1d(op, s.grid.domain(), HalfSign::minus).values.at(0);
    o.detail << "lambda+ = " << num(s.lp) << ", lambda- = " << num(s.lm) << ", shooting errors " << num(sp - pi2)
             << ", " << num(sm - 2 * pi2) << ", eigen time " << num(elapsed) << " s";
    o.require(rel(s.lp, pi2) <= 1e-2, "lambda+ within 1%");
    o.require(rel(s.lm, 2 * pi2) <= 1e-2, "lambda- within 1%");
    o.require(std::abs(sp - pi2) <= 1e-6 && std::abs(sm - 2 * pi2) <= 1e-6, "shooting within 1e-6");
    o.require(elapsed < 10.0, "runtime below 10 s");
}

void half_eigenvalues_pucci(Outcome& o) {
    const HJBOperator op = HJBOperator::pucci_plus(1.0, 2.0);
    const Setup s = setup(op, 400);
    const double sp = shooting_eigen_1d(op, s.grid.domain(), HalfSign::plus).values.at(0);
    const double sm = shooting_eigen_1d(op, s.grid.domain(), HalfSign::minus).values.at(0);
    o.detail << "lambda+ = " << num(s.lp) << " (shooting " << num(sp) << "), lambda- = " << num(s.lm) << " (shooting "
             << num(sm) << ")";
    o.require(rel(s.lp, sp) <= 1e-2 && rel(s.lm, sm) <= 1e-2, "within 1% of shooting");
    o.require(rel(sp, pi2) <= 1e-2 && rel(sm, 2 * pi2) <= 1e-2, "shooting near pi^2, 2 pi^2");
}

void linear_degeneration(Outcome& o) {
    const Setup s = setup(HJBOperator::laplacian(), 400);
    TStarOptions to;
    to.width = 1e-4;
    // -int d phi_1 with phi_1 = sqrt(2) sin(pi x), in closed form.
    struct Case {
        const char* name;
        double (*d)(double);
        double exact;
    };
    const double r2 = std::numbers::sqrt2;
    const Case cases[] = {
        {"1", [](double) { return 1.0; }, -2 * r2 / pi},
        {"x", [](double x) { return x; }, -r2 / pi},
        {"exp(x)", [](double x) { return std::exp(x); }, -r2 * pi * (std::numbers::e + 1) / (1 + pi2)},
    };
    for (const Case& c : cases) {
        const TStarResult r = tstar_resonant(s.dop, s.spectrum, HalfSign::plus, sample(s.grid, c.d), to);
        o.detail << "d = " << c.name << ": " << num(r.value) << " vs " << num(c.exact) << "; ";
        o.require(std::abs(r.value - c.exact) <= 2e-3, std::string("d = ") + c.name);
    }
}

void decomposition_identity(Outcome& o) {
    const Setup s = setup(HJBOperator::barenblatt(1.0, 2.0), 200);
    TStarOptions to;
    to.width = 1e-4;
    const GridFunction h = GridFunction::sample(s.grid, [](const Point& p) {
        return 0.5 + std::cos(pi * p[0]) + p[0] * p[0];
    });
    const Decomposition dec = decompose(h, s.spectrum.plus.efun);
    for (double lam : {s.lp, 0.5 * (s.lp + s.lm), s.lm}) {
        const TStarResult full = tstar_at(s.dop, s.spectrum, lam, h, to);
        const TStarResult perp = tstar_at(s.dop, s.spectrum, lam, dec.perp, to);
        const double err = std::abs(full.value - (perp.value - dec.coeff));
        const double tol = 2 * (full.width() + perp.width());
        o.detail << "lambda " << num(lam) << ": error " << num(err) << " (tol " << num(tol) << "); ";
        o.require(err <= tol, "identity at lambda " + num(lam));
    }
}

void one_signed_data(Outcome& o) {
    const Setup s = setup(HJBOperator::barenblatt(1.0, 2.0), 200);
    TStarOptions to;
    to.width = 1e-4;
    double (*ds[])(double) = {[](double) { return 1.0; }, [](double x) { return x * x; },
                              [](double x) { return std::max(0.0, std::sin(3 * pi * x)); }};
    double worst_neg = -1e300, worst_pos = 1e300;
    for (auto d : ds) {
        const GridFunction g = sample(s.grid, d);
        for (HalfSign side : {HalfSign::plus, HalfSign::minus}) {
            const TStarResult r = tstar_resonant(s.dop, s.spectrum, side, g, to);
            const TStarResult m = tstar_resonant(s.dop, s.spectrum, side, -g, to);
            worst_neg = std::max(worst_neg, r.bracket.second);
            worst_pos = std::min(worst_pos, m.bracket.first);
            o.require(r.bracket.second < 0.0, "nonnegative d gives t* < 0");
            o.require(m.bracket.first > 0.0, "nonpositive d gives t* > 0");
        }
    }
    o.detail << "largest upper bracket end for d >= 0: " << num(worst_neg)
             << ", smallest lower bracket end for d <= 0: " << num(worst_pos);
}

void endpoint_continuity(Outcome& o) {
    const Setup s = setup(HJBOperator::barenblatt(1.0, 2.0), 200);
    TStarOptions to;
    to.width = 1e-5;
    const GridFunction d = GridFunction::sample(s.grid, [](const Point& p) { return -1 + 3 * std::sin(pi * p[0]); });
    const double base = tstar_resonant(s.dop, s.spectrum, HalfSign::plus, d, to).value;
    const double d3 = std::abs(tstar_interior(s.dop, s.spectrum, s.lp + 1e-3, d, to).value - base);
    const double d4 = std::abs(tstar_interior(s.dop, s.spectrum, s.lp + 1e-4, d, to).value - base);
    o.detail << "t*_+ = " << num(base) << ", |diff| at +1e-3: " << num(d3) << ", at +1e-4: " << num(d4);
    o.require(d3 <= 5e-2, "within 5e-2 at +1e-3");
    o.require(d4 < d3, "decreasing with the offset");
}

// Least-squares R^2 of y against a + C x.
double r_squared(const std::vector<double>& x, const std::vector<double>& y) {
    const double m = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    const double cov = sxy - sx * sy / m, vx = sxx - sx * sx / m, vy = syy - sy * sy / m;
    return cov * cov / (vx * vy);
}

void example2_diagram(Outcome& o) {
    const Setup s = setup(HJBOperator::barenblatt(1.0, 2.0), 200);
    const Nonlinearity f = builtin("example2", {}, s.grid);
    struct Side {
        const char* name;
        double eig;
        const GridFunction& phi;
        SignClass sign;
    };
    for (const Side& side : {Side{"positive", s.lp, s.spectrum.plus.efun, SignClass::positive},
                             Side{"negative", s.lm, s.spectrum.minus.efun, SignClass::negative}}) {
        const double lam0 = side.eig - 1.0;
        const SolveReport start = newton_solve(s.dop, lam0, f, 5.0 * side.phi);
        o.require(start.converged(), std::string(side.name) + " start converges");
        if (!start.converged()) continue;
        const Branch br = continue_branch(s.dop, f, make_point(s.dop, f, lam0, start.u), side.eig);
        std::vector<double> x, y;
        bool signs = true;
        for (const BranchPoint& p : br.points) {
            signs = signs && p.sign_class == side.sign;
            x.push_back(1.0 / (side.eig - p.lambda));
            y.push_back(std::sqrt(p.sup_norm));
        }
        const double r2 = r_squared(x, y);
        o.detail << side.name << ": " << br.points.size() << " points on [" << num(br.lambda_min()) << ", "
                 << num(br.lambda_max()) << "], max |u| " << num(br.points.back().sup_norm) << ", R^2 " << num(r2)
                 << "; ";
        o.require(signs, std::string(side.name) + " sign kept");
        o.require(br.lambda_max() < side.eig && side.eig - br.lambda_max() < 1e-2, "branch reaches the eigenvalue");
        o.require(br.folds.empty(), "no folds");
        o.require(r2 >= 0.99, "blowup fit");
    }
    // Uniqueness of the positive solution: ten positive starts per lambda. Starts may also
    // fall onto the small negative solution of the branch from -infinity at lambda_1^-.
    int unique_at = 0;
    for (double off : {1.0, 0.8, 0.6, 0.4, 0.2}) {
        const double lam = s.lp - off;
        std::vector<GridFunction> found;
        int converged = 0, positive = 0, negative = 0;
        for (int k = 0; k < 10; ++k) {
            const double amp = std::pow(10.0, 0.4 * k - 1.0);
            const GridFunction shape = (k % 2 == 0) ? s.spectrum.plus.efun
                                                    : GridFunction::sample(s.grid, [](const Point& p) {
                                                          return 4 * p[0] * (1 - p[0]) * (1 + p[0]);
                                                      });
            const SolveReport r = newton_solve(s.dop, lam, f, amp * shape);
            if (!r.converged()) continue;
            ++converged;
            const SignClass sc = classify_sign(r.u);
            if (sc == SignClass::negative) ++negative;
            if (sc != SignClass::positive) continue;
            ++positive;
            const bool seen = std::any_of(found.begin(), found.end(), [&](const GridFunction& u) {
                return norm(u - r.u, NormKind::sup) <= 1e-6 * (1 + norm(u, NormKind::sup));
            });
            if (!seen) found.push_back(r.u);
        }
        const bool ok = converged == 10 && found.size() == 1 && positive + negative == 10;
        if (ok) ++unique_at;
        o.require(ok, "unique positive solution at lambda_1^+ - " + num(off) + " (" + std::to_string(converged) +
                          " converged, " + std::to_string(positive) + " positive, " + std::to_string(found.size()) +
                          " distinct)");
    }
    o.detail << "unique positive solution at " << unique_at << "/5 lambdas";
}

void example1_window(Outcome& o) {
    const Setup s = setup(HJBOperator::barenblatt(1.0, 2.0), 200);
    TStarOptions to;
    const GridFunction h = GridFunction::sample(s.grid, [](const Point& p) { return std::cos(pi * p[0]); });
    const GridFunction& phi = s.spectrum.plus.efun;
    const TStarResult tp = tstar_resonant(s.dop, s.spectrum, HalfSign::plus, h, to);
    const double lam = s.lp + 0.1;
    const double tl = tstar_interior(s.dop, s.spectrum, lam, h, to).value;
    const double t_bar = 0.5 * (tl + tp.bracket.second);
    const double eps = 0.2;
    auto make = [&](double tb) {
        return builtin("example1", {{"t_bar", tb}, {"t_star", tp.value}, {"eps", eps}, {"M", 5.0}}, s.grid,
                       {{"phi_plus", phi}, {"h", h}});
    };
    o.detail << "t*_+ = " << num(tp.value) << ", t_bar = " << num(t_bar) << ", t*_lambda = " << num(tl) << "; ";
    o.require(tp.bracket.second < t_bar && t_bar < tl, "window between t*_+ and t*_lambda");
    const auto sols = census(s.dop, s.spectrum, make(t_bar), lam);
    o.detail << "census " << sols.size() << "; ";
    o.require(sols.empty(), "census empty");
    for (double t : {t_bar, tp.value - eps}) {
        const ProbeResult pr = solvability_probe(s.dop, s.spectrum, lam, t * phi + h);
        o.detail << "probe(" << num(t) << ") " << to_string(pr.verdict) << "; ";
        o.require(pr.verdict == Solvability::unsolvable, "probe unsolvable at t = " + num(t));
    }
    const double t_hi = tl + 0.5 * (tl - tp.value);
    const auto restored = census(s.dop, s.spectrum, make(t_hi), lam);
    const ProbeResult pr = solvability_probe(s.dop, s.spectrum, lam, t_hi * phi + h);
    o.detail << "control t_bar = " << num(t_hi) << ": census " << restored.size() << ", probe "
             << to_string(pr.verdict);
    o.require(!restored.empty() && pr.verdict == Solvability::solvable, "solvability restored");
}

void model_counts(Outcome& o) {
    const Setup s = setup(HJBOperator::barenblatt(1.0, 2.0), 100);
    const Nonlinearity f = builtin("model", {{"alpha", 0.5}, {"kappa", 1.0}, {"eps_reg", 1.0}, {"h", 1.0}}, s.grid);
    for (LandesmanSide side : {LandesmanSide::left_plus, LandesmanSide::left_minus}) {
        const LandesmanVerdict v = check_landesman(f, s.dop, s.spectrum, side);
        o.detail << to_string(side) << " " << to_string(v.verdict.verdict) << "; ";
        o.require(v.verdict.verdict == Verdict::holds, std::string(to_string(side)) + " holds");
    }
    auto count = [&](double lam) { return static_cast<int>(census(s.dop, s.spectrum, f, lam).size()); };
    for (double lam : {s.lp - 3.0, s.lp - 1.0, s.lp}) {
        const int c = count(lam);
        o.detail << num(lam) << ":" << c << " ";
        o.require(c >= 1, "at least one solution at " + num(lam));
    }
    for (double lam : {s.lp + 0.05, 0.5 * (s.lp + s.lm), s.lm}) {
        const int c = count(lam);
        o.detail << num(lam) << ":" << c << " ";
        o.require(c >= 2, "at least two solutions at " + num(lam));
    }
    double found = 0.0;
    for (double delta : {0.3, 0.1, 0.05, 0.02, 0.01}) {
        const int c = count(s.lm + delta);
        o.detail << "lambda- + " << num(delta) << ":" << c << " ";
        if (c >= 3) {
            found = delta;
            break;
        }
    }
    o.require(found > 0.0, "three solutions just right of lambda-");
}

void decay(Outcome& o) {
    const Setup s = setup(HJBOperator::barenblatt(1.0, 2.0), 200, 2.0);
    const Nonlinearity f = builtin("model", {{"alpha", 0.5}, {"kappa", -1.0}, {"eps_reg", 1.0}, {"h", 1.0}}, s.grid);
    double lo = 1e300, hi = 0.0;
    std::size_t last_count = 0;
    for (double lam : {-20.0, -50.0, -100.0, -200.0}) {
        const auto sols = census(s.dop, s.spectrum, f, lam);
        if (sols.empty()) {
            o.require(false, "solution at " + num(lam));
            continue;
        }
        const double v = sols.back().sup_norm * std::abs(lam);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        last_count = sols.size();
        o.detail << num(lam) << ": |u||lambda| = " << num(v) << "; ";
    }
    const double variation = (hi - lo) / hi;
    o.detail << "variation " << num(variation) << ", census at -200: " << last_count;
    o.require(variation <= 0.2, "variation at most 20%");
    o.require(last_count == 1, "unique at -200");
}

void structure_suites(Outcome& o) {
    double worst = 0.0;
    const Grid g1(Domain::interval(1.0), 60);
    const Grid g2(Domain::rectangle(1.0, 1.0), 12);
    std::vector<std::pair<HJBOperator, const Grid*>> ops{
        {HJBOperator::laplacian(), &g1},         {HJBOperator::barenblatt(1.0, 2.0), &g1},
        {HJBOperator::pucci_plus(1.0, 2.0), &g1}, {HJBOperator::pucci_minus(1.0, 3.0), &g1},
        {HJBOperator::barenblatt(1.0, 2.0), &g2}, {HJBOperator::pucci_plus(1.0, 2.0), &g2}};
    bool all_pass = true;
    for (const auto& [op, g] : ops) {
        const StructureReport r = check_structure(discretize(op, *g), 100, 7);
        all_pass = all_pass && r.pass && r.monotone_stencil;
        worst = std::max({worst, r.worst_homogeneity, r.worst_subadditivity, r.worst_sandwich, r.worst_ellipticity});
    }
    o.detail << "worst structure violation " << num(worst) << "; ";
    o.require(all_pass && worst <= 1e-10, "structure");

    // Comparison: g1 <= g2 forces u1 >= u2 for the proper problem F[u] + c u = g.
    const DiscreteOperator dop = discretize(HJBOperator::barenblatt(1.0, 2.0), g1);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    int held = 0;
    double worst_order = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        GridFunction a(g1), b(g1);
        for (std::size_t i = 0; i < a.size(); ++i) {
            a[i] = 5 * dist(rng);
            b[i] = a[i] + (trial % 4 == 0 ? 0.0 : 2.0 * (dist(rng) + 1.0));
        }
        const double c = -1.0 - 0.1 * trial;
        const SolveReport ua = solve_proper(dop, c, a);
        const SolveReport ub = solve_proper(dop, c, b);
        const double viol = std::max(0.0, (ub.u - ua.u).max());
        worst_order = std::max(worst_order, viol);
        if (ua.converged() && ub.converged() && viol <= 1e-10 * (1 + norm(ua.u, NormKind::sup))) ++held;
    }
    o.detail << "comparison " << held << "/100 (worst " << num(worst_order) << "); ";
    o.require(held == 100, "comparison");

    double worst_res = 0.0;
    for (const auto& op : {HJBOperator::barenblatt(1.0, 2.0), HJBOperator::pucci_plus(1.0, 2.0),
                           HJBOperator::laplacian()}) {
        const Spectrum sp = principal_spectrum(discretize(op, Grid(Domain::interval(1.0), 200)));
        worst_res = std::max({worst_res, sp.plus.residual_sup, sp.minus.residual_sup});
    }
    o.detail << "eigen residual " << num(worst_res) << "; ";
    o.require(worst_res <= 1e-8, "eigen residuals");

    double v[3];
    const int ns[3] = {49, 99, 199};
    for (int k = 0; k < 3; ++k) {
        v[k] = principal_spectrum(discretize(HJBOperator::barenblatt(1.0, 2.0), Grid(Domain::interval(1.0), ns[k])))
                   .plus.value;
    }
    const double order = richardson_order(v[0], v[1], v[2]);
    o.detail << "Richardson order " << num(order);
    o.require(order >= 1.8, "Richardson order");
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<void(Outcome&)> run;
    };
    const std::vector<Criterion> criteria{
        {1, "half-eigenvalues of max{D2, 2 D2}", half_eigenvalues_barenblatt},
        {2, "half-eigenvalues of Pucci(1, 2)", half_eigenvalues_pucci},
        {3, "linear operator t* = -<d, phi_1>", linear_degeneration},
        {4, "decomposition identity along phi_1^+", decomposition_identity},
        {5, "signs of t* for one-signed data", one_signed_data},
        {6, "continuity of t*_lambda at lambda_1^+", endpoint_continuity},
        {7, "sublinear branches from infinity", example2_diagram},
        {8, "nonexistence window inside the gap", example1_window},
        {9, "solution counts for the model problem", model_counts},
        {10, "decay as lambda -> -infinity", decay},
        {11, "structure, comparison, residuals, order", structure_suites},
    };
    int failed = 0;
    for (const Criterion& c : criteria) {
        Outcome o;
        const auto t0 = Clock::now();
        try {
            c.run(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << "[exception: " << e.what() << "]";
        }
        if (!o.pass) ++failed;
        std::printf("%s %2d %s (%.2f s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, seconds_since(t0),
                    o.detail.str().c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
