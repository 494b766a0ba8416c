#pragma once

#include "hjb/eigen.hpp"
#include "hjb/grid.hpp"
#include "hjb/operator.hpp"
#include "hjb/solver.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hjb {

struct ApproachOptions {
    double delta0 = 0.1;
    /// Distances delta0 * 2^-k, k < points.
    int points = 18;
    /// The fit uses the closest fit_points distances.
    int fit_points = 6;
    /// Blowup when the 1/delta coefficient exceeds this fraction of the bounded part at the
    /// smallest distance.
    double blowup_ratio = 1e-2;
};

/// Solutions of F[u] + lambda_k u = g along lambda_k -> lambda_1^+ from below (plus) or
/// lambda_k -> lambda_1^- from above (minus), with the least-squares fit
/// <u_k, phi_1^side> = a + b / delta_k + c delta_k. Blowup means b > 0 is resolved:
/// the family escapes along the half-eigenfunction of that side.
struct ApproachFit {
    HalfSign side = HalfSign::plus;
    std::vector<double> deltas;
    std::vector<double> norms;
    /// <u_k, phi_1^side>; positive when u_k leans along the half-eigenfunction.
    std::vector<double> projections;
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    /// False when some approach point had no solution; the family then counts as unbounded.
    bool complete = true;
    bool blowup = false;
    std::optional<GridFunction> last;
};

ApproachFit approach_fit(const DiscreteOperator& dop, const Spectrum& spectrum, HalfSign side, const GridFunction& g,
                         const ApproachOptions& opts = {}, const SolverOptions& solver = {});

/// One point of the curve mu -> (u(mu), t(mu)) solving F[u] + lambda u = t phi_1^+ + d with
/// <u, phi_1^+> = mu.
struct CurvePoint {
    double mu = 0.0;
    double t = 0.0;
    GridFunction u;
    double residual_sup = 0.0;
};

struct CurveOptions {
    /// Initial spacing in mu, relative to 1 + ||d||_sup.
    double step = 0.25;
    int uniform_steps = 8;
    double mu_max = 1e10;
    /// Stop a direction once t exceeds its running minimum by this much past the minimiser.
    double rise = 1.0;
    double mu_rtol = 1e-9;
    int max_newton_iters = 60;
};

struct CriticalCurve {
    double lambda = 0.0;
    std::vector<CurvePoint> points;  // sorted by mu
    /// Refined minimiser of t(mu).
    std::optional<CurvePoint> minimum;
    bool complete = true;
    std::string note;
};

/// Solve the bordered system at one mu, starting from (u0, t0).
std::optional<CurvePoint> solve_on_curve(const DiscreteOperator& dop, double lambda, const GridFunction& phi,
                                         const GridFunction& d, double mu, const GridFunction& u0, double t0,
                                         const CurveOptions& opts = {});

/// March mu from 0 in both directions with growing steps, then refine the smallest t by
/// golden-section search. The infimum of t over the curve is t*_lambda(d).
CriticalCurve trace_critical_curve(const DiscreteOperator& dop, double lambda, const GridFunction& phi,
                                   const GridFunction& d, const CurveOptions& opts = {});

}  // namespace hjb
