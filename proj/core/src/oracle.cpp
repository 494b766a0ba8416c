#include "hjb/oracle.hpp"

#include "hjb/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hjb {

namespace {

// u'' as a function of (u, lambda) for the scalar equation F(u'') + lambda u = 0,
// or with zeroth-order terms for the fucik tag.
struct ScalarLaw {
    double a_min = 1.0;
    double a_max = 1.0;
    bool sup = true;
    bool fucik = false;
    double fa = 0.0;
    double fb = 0.0;

    double second_derivative(double u, double lambda) const {
        if (fucik) return -lambda * u - fb * std::max(u, 0.0) - fa * std::min(u, 0.0);
        const double q = -lambda * u;  // F(p) = q
        // sup: F(p) = a_max p for p >= 0 and a_min p for p < 0; inf: the reverse.
        if (sup) return q >= 0 ? q / a_max : q / a_min;
        return q >= 0 ? q / a_min : q / a_max;
    }
};

ScalarLaw law_for(const HJBOperator& op) {
    if (!op.tag()) throw UnsupportedOperator("shooting needs an extremal tag");
    ScalarLaw law;
    switch (*op.tag()) {
        case ExtremalTag::laplacian: break;
        case ExtremalTag::barenblatt:
        case ExtremalTag::pucci_plus:
            law.a_min = op.ellipticity_lower();
            law.a_max = op.ellipticity_upper();
            break;
        case ExtremalTag::pucci_minus:
            law.a_min = op.ellipticity_lower();
            law.a_max = op.ellipticity_upper();
            law.sup = false;
            break;
        case ExtremalTag::fucik:
            law.fucik = true;
            law.fa = op.params()[0];
            law.fb = op.params()[1];
            break;
    }
    return law;
}

// True when the solution of the IVP returns to zero strictly inside (0, L] .
bool returns_before_end(const ScalarLaw& law, double lambda, double L, double slope, int steps) {
    const double h = L / steps;
    double u = 0.0, v = slope;
    auto acc = [&](double uu) { return law.second_derivative(uu, lambda); };
    for (int k = 0; k < steps; ++k) {
        const double k1u = v, k1v = acc(u);
        const double k2u = v + 0.5 * h * k1v, k2v = acc(u + 0.5 * h * k1u);
        const double k3u = v + 0.5 * h * k2v, k3v = acc(u + 0.5 * h * k2u);
        const double k4u = v + h * k3v, k4v = acc(u + h * k3u);
        u += h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
        v += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
        if (slope * u <= 0.0) return true;
    }
    return false;
}

}  // namespace

OracleResult shooting_eigen_1d(const HJBOperator& op, const Domain& domain, HalfSign sign,
                               const ShootingOptions& opts) {
    if (domain.dimension() != 1) throw UnsupportedOperator("shooting is one-dimensional");
    const ScalarLaw law = law_for(op);
    const double L = domain.length(0);
    const double slope = sign == HalfSign::plus ? 1.0 : -1.0;
    double lo = 0.0, hi = 1.0;
    while (returns_before_end(law, lo, L, slope, opts.steps)) lo = lo == 0.0 ? -1.0 : 2.0 * lo;
    while (!returns_before_end(law, hi, L, slope, opts.steps)) hi *= 2.0;
    while (hi - lo > opts.tol * std::max(1.0, std::abs(hi))) {
        const double mid = 0.5 * (lo + hi);
        (returns_before_end(law, mid, L, slope, opts.steps) ? hi : lo) = mid;
    }
    std::ostringstream res;
    res << "rk4 steps=" << opts.steps << " bisection tol=" << opts.tol;
    return {{0.5 * (lo + hi)}, "shooting", res.str(), std::nullopt};
}

double richardson_order(double v_n, double v_2n, double v_4n) {
    const double d1 = std::abs(v_n - v_2n);
    const double d2 = std::abs(v_2n - v_4n);
    if (d1 < 1e-13 || d2 < 1e-13) throw DegenerateDifferences("increments below 1e-13");
    return std::log2(d1 / d2);
}

OracleResult dense_proper_solve(const HJBOperator& op, const Grid& grid, double shift, const GridFunction& g) {
    const int dim = grid.dimension();
    const int n = grid.n();
    const auto N = static_cast<Eigen::Index>(grid.size());
    std::vector<Eigen::MatrixXd> mats;
    for (const auto& k : op.controls(dim)) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(N, N);
        for (Eigen::Index node = 0; node < N; ++node) {
            const Point x = grid.coordinates(static_cast<std::size_t>(node));
            int idx[2] = {dim == 1 ? static_cast<int>(node) : static_cast<int>(node % n),
                          dim == 1 ? 0 : static_cast<int>(node / n)};
            m(node, node) += k.zeroth(x) + shift;
            for (int axis = 0; axis < dim; ++axis) {
                const double h = grid.spacing(axis);
                const double a = k.diffusion[static_cast<std::size_t>(axis)](x);
                const double b = k.drift[static_cast<std::size_t>(axis)](x);
                const Eigen::Index stride = axis == 0 ? 1 : n;
                m(node, node) -= 2 * a / (h * h);
                if (idx[axis] > 0) m(node, node - stride) += a / (h * h);
                if (idx[axis] < n - 1) m(node, node + stride) += a / (h * h);
                if (b > 0) {
                    m(node, node) -= b / h;
                    if (idx[axis] < n - 1) m(node, node + stride) += b / h;
                } else if (b < 0) {
                    m(node, node) += b / h;
                    if (idx[axis] > 0) m(node, node - stride) -= b / h;
                }
            }
        }
        mats.push_back(std::move(m));
    }
    const bool sup = op.sense() == Sense::sup;
    std::vector<int> pol(static_cast<std::size_t>(N), 0);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(N);
    for (int it = 0; it < 500; ++it) {
        Eigen::MatrixXd A(N, N);
        for (Eigen::Index r = 0; r < N; ++r) A.row(r) = mats[static_cast<std::size_t>(pol[static_cast<std::size_t>(r)])].row(r);
        u = A.fullPivLu().solve(g.values());
        std::vector<int> next(static_cast<std::size_t>(N), 0);
        Eigen::VectorXd best = mats[0] * u;
        for (std::size_t k = 1; k < mats.size(); ++k) {
            const Eigen::VectorXd y = mats[k] * u;
            for (Eigen::Index r = 0; r < N; ++r) {
                if (sup ? y[r] > best[r] + 1e-14 * std::abs(best[r]) : y[r] < best[r] - 1e-14 * std::abs(best[r])) {
                    best[r] = y[r];
                    next[static_cast<std::size_t>(r)] = static_cast<int>(k);
                }
            }
        }
        if (next == pol) break;
        pol = std::move(next);
    }
    return {{u.maxCoeff(), u.minCoeff()}, "dense policy enumeration", "n=" + std::to_string(n),
            GridFunction(grid, u)};
}

ScanResult exhaustive_tstar_scan(const DiscreteOperator& dop, const Spectrum& spectrum, double lambda,
                                 const GridFunction& d, const std::vector<double>& t_grid) {
    if (!std::is_sorted(t_grid.begin(), t_grid.end())) throw InvalidParams("t grid must be increasing");
    ScanResult res;
    ProbeBudget budget;
    budget.scale = 10.0;
    for (double t : t_grid) {
        const ProbeResult p = solvability_probe(dop, spectrum, lambda, t * spectrum.plus.efun + d, budget);
        res.entries.push_back({t, p.verdict});
    }
    std::optional<double> first_solvable;
    std::ostringstream bad;
    for (const ScanEntry& e : res.entries) {
        if (e.verdict == Solvability::solvable && !first_solvable) first_solvable = e.t;
        if (e.verdict == Solvability::unsolvable && first_solvable) {
            bad << " unsolvable at t = " << e.t << " above solvable t = " << *first_solvable << ";";
        }
    }
    if (!bad.str().empty()) throw NonMonotoneScan("scan is not monotone:" + bad.str());
    std::optional<double> last_unsolvable;
    for (const ScanEntry& e : res.entries) {
        if (e.verdict == Solvability::unsolvable) last_unsolvable = e.t;
    }
    if (last_unsolvable && first_solvable) res.bracket = std::make_pair(*last_unsolvable, *first_solvable);
    return res;
}

}  // namespace hjb
