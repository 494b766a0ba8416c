#pragma once

#include "hjb/eigen.hpp"
#include "hjb/grid.hpp"
#include "hjb/operator.hpp"
#include "hjb/resonance.hpp"
#include "hjb/solver.hpp"

#include <string>
#include <utility>
#include <vector>

namespace hjb {

struct Decomposition {
    double coeff = 0.0;
    GridFunction perp;
};

/// d = coeff * phi_plus + perp with coeff = integrate(d * phi_plus).
Decomposition decompose(const GridFunction& d, const GridFunction& phi_plus);

enum class TStarMethod { resonant_limit, interior_bisection };

const char* to_string(TStarMethod m);

struct TStarResult {
    double lambda = 0.0;
    GridFunction d;
    double value = 0.0;
    std::pair<double, double> bracket{0.0, 0.0};
    TStarMethod method = TStarMethod::resonant_limit;
    int evaluations = 0;

    double width() const { return bracket.second - bracket.first; }
};

struct TStarOptions {
    /// Bracket width relative to 1 + ||d||_sup.
    double width = 1e-3;
    ApproachOptions approach;
    CurveOptions curve;
    SolverOptions solver;
    /// Relative L2 threshold below which d counts as a multiple of phi_1^+.
    double parallel_tol = 1e-8;
};

/// t*_+(d) or t*_-(d) by bisection on the approach-fit dichotomy: blowup means t < t*.
TStarResult tstar_resonant(const DiscreteOperator& dop, const Spectrum& spectrum, HalfSign sign, const GridFunction& d,
                           const TStarOptions& opts = {});

/// t*_lambda(d) for lambda strictly inside the gap, as the minimum of t over the critical
/// curve. The bracket is centred on the minimum with the configured width.
TStarResult tstar_interior(const DiscreteOperator& dop, const Spectrum& spectrum, double lambda, const GridFunction& d,
                           const TStarOptions& opts = {});

/// Dispatches to the resonant computation at either half-eigenvalue and to the interior one
/// in between.
TStarResult tstar_at(const DiscreteOperator& dop, const Spectrum& spectrum, double lambda, const GridFunction& d,
                     const TStarOptions& opts = {});

struct ContinuityEntry {
    double epsilon = 0.0;
    double w_norm = 0.0;
    double value = 0.0;
    double delta = 0.0;
    double width = 0.0;
};

struct ContinuityReport {
    double base = 0.0;
    double base_width = 0.0;
    std::vector<ContinuityEntry> entries;
    /// |delta t*| is nonincreasing as epsilon decreases, per perturbation direction, up to
    /// the bracket widths.
    bool shrinking = true;
};

/// t* at lambda for d and for each d + eps w, eps from `epsilons`.
ContinuityReport tstar_continuity_scan(const DiscreteOperator& dop, const Spectrum& spectrum, double lambda,
                                       const GridFunction& d, const std::vector<GridFunction>& perturbations,
                                       const std::vector<double>& epsilons, const TStarOptions& opts = {});

}  // namespace hjb
