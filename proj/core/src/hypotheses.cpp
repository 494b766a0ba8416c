#include "hjb/hypotheses.hpp"

#include "hjb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hjb {

const char* to_string(BoundSide s) {
    switch (s) {
        case BoundSide::plus_lower: return "plus_lower";
        case BoundSide::plus_upper: return "plus_upper";
        case BoundSide::minus_lower: return "minus_lower";
        case BoundSide::minus_upper: return "minus_upper";
    }
    return "?";
}

const char* to_string(LandesmanSide s) {
    switch (s) {
        case LandesmanSide::left_plus: return "Fl+";
        case LandesmanSide::left_minus: return "Fl-";
        case LandesmanSide::right_plus: return "Fr+";
        case LandesmanSide::right_minus: return "Fr-";
    }
    return "?";
}

namespace {

bool is_lower(BoundSide s) { return s == BoundSide::plus_lower || s == BoundSide::minus_lower; }

// Magnitudes |s| at which f is sampled: 0 and 32 points per decade from 1e-3 to 1e8.
std::vector<double> magnitudes() {
    std::vector<double> r{0.0};
    for (int k = -96; k <= 256; ++k) r.push_back(std::pow(10.0, k / 32.0));
    return r;
}

}  // namespace

DRPair construct_dR(const Nonlinearity& f, BoundSide side, const GridFunction& c, double epsilon,
                    const GridFunction& phi) {
    const Grid& grid = f.grid();
    require_same_grid(grid, c.grid(), "construct_dR");
    require_same_grid(grid, phi.grid(), "construct_dR");
    if (!(epsilon > 0.0)) throw InvalidParams("construct_dR: epsilon must be positive");
    const bool lower = is_lower(side);
    const double dir = (side == BoundSide::plus_lower || side == BoundSide::plus_upper) ? 1.0 : -1.0;
    DRPair out{GridFunction(grid), 0.0, 0.0, 2.0 * grid.dimension() + 1.0, 0.0, 0.0};
    const double measure = grid.domain().measure();
    out.sigma = epsilon / (2.0 * std::pow(measure, 1.0 / out.p));
    const std::vector<double> r = magnitudes();
    const std::size_t n = grid.size();
    std::vector<double> threshold(n, 0.0);
    double extreme = lower ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double bulk = lower ? c[i] - out.sigma : c[i] + out.sigma;
        // Smallest sampled magnitude beyond which the bound holds at every sample.
        std::size_t k = r.size();
        while (k > 0) {
            const double v = f(i, dir * r[k - 1]);
            if (lower ? !(v >= bulk) : !(v <= bulk)) break;
            --k;
        }
        if (k == r.size()) {
            std::ostringstream os;
            os << "f(x, " << dir * r.back() << ") = " << f(i, dir * r.back()) << (lower ? " < " : " > ") << bulk
               << " at node " << i << ": c is not an asymptotic bound";
            throw BoundViolated(os.str());
        }
        threshold[i] = r[k];
        for (double s : r) {
            const double v = f(i, dir * s);
            extreme = lower ? std::min(extreme, v) : std::max(extreme, v);
        }
        extreme = lower ? std::min(extreme, bulk) : std::max(extreme, bulk);
    }
    if (!std::isfinite(extreme)) throw BoundViolated("f is unbounded on the sampled half-line");
    out.outer_value = extreme;
    const double w = grid.cell_volume();
    for (double R = 1.0; R <= 1e14; R *= 2.0) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const bool bulk = R * std::abs(phi[i]) >= threshold[i];
            out.d[i] = bulk ? (lower ? c[i] - out.sigma : c[i] + out.sigma) : extreme;
            acc += w * std::pow(std::abs(out.d[i] - c[i]), out.p);
        }
        out.distance = std::pow(acc, 1.0 / out.p);
        if (out.distance <= epsilon) {
            out.R = R;
            return out;
        }
    }
    throw BoundViolated("no radius brings d within epsilon of c");
}

bool dR_implication_holds(const Nonlinearity& f, BoundSide side, const GridFunction& d, const GridFunction& u) {
    const bool lower = is_lower(side);
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double v = f(i, u[i]);
        const double slack = 1e-12 * (1.0 + std::abs(d[i]));
        if (lower ? v < d[i] - slack : v > d[i] + slack) return false;
    }
    return true;
}

LandesmanVerdict check_landesman(const Nonlinearity& f, const DiscreteOperator& dop, const Spectrum& spectrum,
                                 LandesmanSide side, const std::optional<GridFunction>& candidate,
                                 const TStarOptions& opts) {
    const Grid& grid = dop.grid();
    LandesmanVerdict out;
    out.verdict.hypothesis = to_string(side);
    const NonlinearityLimits& lim = f.limits();
    const AsymptoticLimit* limit = nullptr;
    BoundSide bound{};
    HalfSign sign{};
    bool want_negative = false;
    switch (side) {
        case LandesmanSide::left_plus:
            limit = &lim.lower_plus, bound = BoundSide::plus_lower, sign = HalfSign::plus, want_negative = true;
            break;
        case LandesmanSide::right_plus:
            limit = &lim.upper_plus, bound = BoundSide::plus_upper, sign = HalfSign::plus, want_negative = false;
            break;
        case LandesmanSide::left_minus:
            limit = &lim.upper_minus, bound = BoundSide::minus_upper, sign = HalfSign::minus, want_negative = false;
            break;
        case LandesmanSide::right_minus:
            limit = &lim.lower_minus, bound = BoundSide::minus_lower, sign = HalfSign::minus, want_negative = true;
            break;
    }
    const bool lower = is_lower(bound);
    if (candidate) {
        out.c = *candidate;
    } else if (limit->is_finite()) {
        out.c = *limit->value;
    } else {
        // An infinity in the favourable direction admits every constant; the other one admits none.
        const bool favourable = lower ? limit->kind == AsymptoticLimit::Kind::plus_infinity
                                      : limit->kind == AsymptoticLimit::Kind::minus_infinity;
        if (!favourable) {
            out.verdict.verdict = Verdict::fails;
            out.verdict.witness = "limit is " + limit->describe() + ": no finite bound exists";
            return out;
        }
        out.c = GridFunction::constant(grid, lower ? 1.0 : -1.0);
    }
    const GridFunction& phi = sign == HalfSign::plus ? spectrum.plus.efun : spectrum.minus.efun;
    try {
        construct_dR(f, bound, *out.c, 1e-3 * (1.0 + norm(*out.c, NormKind::sup)), phi);
    } catch (const BoundViolated& e) {
        out.verdict.verdict = Verdict::fails;
        out.verdict.witness = e.what();
        return out;
    }
    try {
        out.tstar = tstar_resonant(dop, spectrum, sign, *out.c, opts);
    } catch (const DegenerateRHS& e) {
        out.verdict.verdict = Verdict::inconclusive;
        out.verdict.witness = e.what();
        return out;
    }
    const auto [lo, hi] = out.tstar->bracket;
    const double w = out.tstar->width();
    out.verdict.value = out.tstar->value;
    out.verdict.tstar_bracket = out.tstar->bracket;
    std::ostringstream os;
    os << "t*_" << (sign == HalfSign::plus ? "+" : "-") << "(c) in [" << lo << ", " << hi << "]";
    out.verdict.witness = os.str();
    const bool negative = hi <= -w;
    const bool positive = lo >= w;
    if (want_negative ? negative : positive) {
        out.verdict.verdict = Verdict::holds;
    } else if (want_negative ? positive : negative) {
        out.verdict.verdict = Verdict::fails;
    } else {
        out.verdict.verdict = Verdict::inconclusive;
    }
    return out;
}

}  // namespace hjb
