#pragma once

#include "hjb/eigen.hpp"
#include "hjb/grid.hpp"
#include "hjb/operator.hpp"
#include "hjb/resonance.hpp"
#include "hjb/solver.hpp"

#include <optional>
#include <string>

namespace hjb {

enum class Solvability { solvable, unsolvable, inconclusive };

const char* to_string(Solvability s);

struct ProbeBudget {
    /// Multiplies the Newton iteration cap and widens the multistart amplitude ladder.
    double scale = 1.0;
    /// Solutions with ||u||_sup above max_norm_factor * (1 + ||g||_sup) are rejected.
    double max_norm_factor = 1e6;
};

struct ProbeResult {
    Solvability verdict = Solvability::inconclusive;
    std::optional<GridFunction> u;
    std::string evidence;
    /// t*_lambda(g) from the critical curve when it was traced.
    std::optional<double> critical_t;
};

/// Classify F[u] + lambda u = g as solvable, unsolvable or inconclusive. Below lambda_1^+ the
/// problem is uniquely solvable; at a half-eigenvalue nonexistence is read off the approach
/// fit; inside the gap it is read off the critical curve of g along phi_1^+.
ProbeResult solvability_probe(const DiscreteOperator& dop, const Spectrum& spectrum, double lambda,
                              const GridFunction& g, const ProbeBudget& budget = {},
                              const SolverOptions& opts = {});

}  // namespace hjb
