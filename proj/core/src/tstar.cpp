#include "hjb/tstar.hpp"

#include "hjb/errors.hpp"

#include <cmath>

namespace hjb {

Decomposition decompose(const GridFunction& d, const GridFunction& phi_plus) {
    require_same_grid(d.grid(), phi_plus.grid(), "decompose");
    const double coeff = integrate(d.cwise_product(phi_plus));
    return {coeff, d - coeff * phi_plus};
}

const char* to_string(TStarMethod m) {
    switch (m) {
        case TStarMethod::resonant_limit: return "resonant_limit";
        case TStarMethod::interior_bisection: return "interior_bisection";
    }
    return "?";
}

namespace {

const GridFunction& checked_phi(const Spectrum& spectrum, const GridFunction& d, const TStarOptions& opts) {
    const GridFunction& phi = spectrum.plus.efun;
    const Decomposition dec = decompose(d, phi);
    if (norm(dec.perp, NormKind::L2) <= opts.parallel_tol * norm(d, NormKind::L2)) {
        throw DegenerateRHS("d is a multiple of phi_1^+: its critical value is not finite");
    }
    return phi;
}

bool near(double a, double b) { return std::abs(a - b) <= 1e-9 * (1.0 + std::abs(b)); }

}  // namespace

TStarResult tstar_resonant(const DiscreteOperator& dop, const Spectrum& spectrum, HalfSign sign, const GridFunction& d,
                           const TStarOptions& opts) {
    const GridFunction& phi = checked_phi(spectrum, d, opts);
    TStarResult res{sign == HalfSign::plus ? spectrum.plus.value : spectrum.minus.value, d, 0.0, {0.0, 0.0},
                    TStarMethod::resonant_limit, 0};
    const Decomposition dec = decompose(d, phi);
    const double width = opts.width * (1.0 + norm(d, NormKind::sup));
    auto below = [&](double t) {
        ++res.evaluations;
        return approach_fit(dop, spectrum, sign, t * phi + d, opts.approach, opts.solver).blowup;
    };
    // The critical value of d is that of perp shifted by -coeff; bracket around -coeff with a
    // half-width set by the size of perp.
    const double centre = -dec.coeff;
    double reach = 2.0 * norm(dec.perp, NormKind::sup) * std::sqrt(dop.grid().domain().measure()) + 1.0;
    double lo = centre - reach;
    double hi = centre + reach;
    int grow = 0;
    while (!below(lo)) {
        if (++grow > 8) throw Inconclusive("no lower end found for the critical value bracket");
        hi = lo;
        reach *= 2.0;
        lo = centre - reach;
    }
    grow = 0;
    while (below(hi)) {
        if (++grow > 8) throw Inconclusive("no upper end found for the critical value bracket");
        lo = hi;
        reach *= 2.0;
        hi = centre + reach;
    }
    while (hi - lo > width) {
        const double mid = 0.5 * (lo + hi);
        if (below(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    res.bracket = {lo, hi};
    res.value = 0.5 * (lo + hi);
    return res;
}

TStarResult tstar_interior(const DiscreteOperator& dop, const Spectrum& spectrum, double lambda, const GridFunction& d,
                           const TStarOptions& opts) {
    if (!(lambda > spectrum.plus.value && lambda < spectrum.minus.value)) {
        throw InvalidParams("lambda = " + std::to_string(lambda) + " is not strictly inside the half-eigenvalue gap");
    }
    const GridFunction& phi = checked_phi(spectrum, d, opts);
    const CriticalCurve curve = trace_critical_curve(dop, lambda, phi, d, opts.curve);
    if (!curve.minimum || !curve.complete) throw Inconclusive("critical curve: " + curve.note);
    const double width = opts.width * (1.0 + norm(d, NormKind::sup));
    const double v = curve.minimum->t;
    return TStarResult{lambda, d, v, {v - 0.5 * width, v + 0.5 * width}, TStarMethod::interior_bisection,
                       static_cast<int>(curve.points.size())};
}

TStarResult tstar_at(const DiscreteOperator& dop, const Spectrum& spectrum, double lambda, const GridFunction& d,
                     const TStarOptions& opts) {
    if (near(lambda, spectrum.plus.value)) return tstar_resonant(dop, spectrum, HalfSign::plus, d, opts);
    if (near(lambda, spectrum.minus.value)) return tstar_resonant(dop, spectrum, HalfSign::minus, d, opts);
    return tstar_interior(dop, spectrum, lambda, d, opts);
}

ContinuityReport tstar_continuity_scan(const DiscreteOperator& dop, const Spectrum& spectrum, double lambda,
                                       const GridFunction& d, const std::vector<GridFunction>& perturbations,
                                       const std::vector<double>& epsilons, const TStarOptions& opts) {
    ContinuityReport rep;
    const TStarResult base = tstar_at(dop, spectrum, lambda, d, opts);
    rep.base = base.value;
    rep.base_width = base.width();
    for (const GridFunction& w : perturbations) {
        std::vector<ContinuityEntry> row;
        for (double eps : epsilons) {
            ContinuityEntry e;
            e.epsilon = eps;
            e.w_norm = norm(w, NormKind::sup);
            if (eps == 0.0) {
                e.value = base.value;
                e.width = base.width();
            } else {
                const TStarResult r = tstar_at(dop, spectrum, lambda, d + eps * w, opts);
                e.value = r.value;
                e.width = r.width();
            }
            e.delta = e.value - base.value;
            row.push_back(e);
        }
        for (std::size_t i = 0; i < row.size(); ++i) {
            for (std::size_t j = 0; j < row.size(); ++j) {
                if (row[j].epsilon < row[i].epsilon &&
                    std::abs(row[j].delta) > std::abs(row[i].delta) + row[i].width + row[j].width + 2 * rep.base_width) {
                    rep.shrinking = false;
                }
            }
        }
        rep.entries.insert(rep.entries.end(), row.begin(), row.end());
    }
    return rep;
}

}  // namespace hjb
