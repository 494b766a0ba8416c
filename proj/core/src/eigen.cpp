#include "hjb/eigen.hpp"

#include "hjb/errors.hpp"

#include <algorithm>
#include <cmath>

namespace hjb {

const char* to_string(HalfSign s) { return s == HalfSign::plus ? "plus" : "minus"; }

namespace {

EigenPair positive_pair(const DiscreteOperator& op, const EigenOptions& opts) {
    const Grid& grid = op.grid();
    const double sigma = std::max(op.max_zeroth(), 0.0) + 1.0 + op.gamma();
    GridFunction u(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) u[i] = grid.distance_to_boundary(i);
    u *= 1.0 / norm(u, NormKind::L2);
    double value = 0.0;
    for (int k = 1; k <= opts.max_iters; ++k) {
        SolveReport rep = solve_proper(op, -sigma, -1.0 * u, opts.solver);
        if (!rep.converged()) throw NoConvergence("inner proper solve failed at iteration " + std::to_string(k));
        const GridFunction& v = rep.u;
        if (!(v.min() > 0.0)) {
            throw SignLoss("iterate lost interior positivity at iteration " + std::to_string(k));
        }
        const Vector ratio = v.values().cwiseQuotient(u.values());
        const double spread = ratio.maxCoeff() / ratio.minCoeff() - 1.0;
        value = inner(u, u) / inner(u, v) - sigma;
        u = (1.0 / norm(v, NormKind::L2)) * v;
        if (spread <= opts.spread_tol) {
            const double residual = norm(op.apply(u) + value * u, NormKind::sup);
            return EigenPair{HalfSign::plus, value, std::move(u), residual, k};
        }
    }
    throw NoConvergence("inverse power iteration did not reach spread tolerance in " +
                        std::to_string(opts.max_iters) + " iterations");
}

}  // namespace

EigenPair principal_eigenpair(const DiscreteOperator& dop, HalfSign sign, const EigenOptions& opts) {
    if (!dop.monotone()) throw MonotonicityViolation("operator lacks the monotone stencil certificate");
    if (sign == HalfSign::plus) {
        EigenPair p = positive_pair(dop, opts);
        p.sign = HalfSign::plus;
        return p;
    }
    // u < 0 solves F[u] + lambda u = 0 iff -u > 0 solves G[-u] + lambda (-u) = 0, G = -F[-.].
    EigenPair p = positive_pair(dop.dual(), opts);
    p.sign = HalfSign::minus;
    p.efun = -p.efun;
    p.residual_sup = norm(dop.apply(p.efun) + p.value * p.efun, NormKind::sup);
    return p;
}

Spectrum principal_spectrum(const DiscreteOperator& dop, const EigenOptions& opts) {
    return {principal_eigenpair(dop, HalfSign::plus, opts), principal_eigenpair(dop, HalfSign::minus, opts)};
}

EigenGap eigen_gap(const Spectrum& spectrum, double tol) {
    const double gap = spectrum.minus.value - spectrum.plus.value;
    return {gap, gap <= tol * (1.0 + std::abs(spectrum.plus.value))};
}

EigenGap eigen_gap(const DiscreteOperator& dop, double tol) { return eigen_gap(principal_spectrum(dop), tol); }

}  // namespace hjb
