#pragma once

#include "hjb/grid.hpp"
#include "hjb/operator.hpp"
#include "hjb/solver.hpp"

namespace hjb {

enum class HalfSign { plus, minus };

const char* to_string(HalfSign s);

struct EigenPair {
    HalfSign sign = HalfSign::plus;
    double value = 0.0;
    /// L2-normalized, positive for plus and negative for minus.
    GridFunction efun;
    double residual_sup = 0.0;
    int iterations = 0;
};

struct EigenOptions {
    /// Relative spread of v_{k+1} / u_k over the interior.
    double spread_tol = 1e-9;
    int max_iters = 1000;
    SolverOptions solver;
};

/// Inverse power iteration on the positive cone with a proper shift; the minus pair
/// is obtained from the dual operator -F[-v].
EigenPair principal_eigenpair(const DiscreteOperator& dop, HalfSign sign, const EigenOptions& opts = {});

struct Spectrum {
    EigenPair plus;
    EigenPair minus;
};

Spectrum principal_spectrum(const DiscreteOperator& dop, const EigenOptions& opts = {});

struct EigenGap {
    double gap = 0.0;
    /// True when the gap is within tolerance of zero (linear-like operator).
    bool degenerate = false;
};

EigenGap eigen_gap(const Spectrum& spectrum, double tol = 1e-8);
EigenGap eigen_gap(const DiscreteOperator& dop, double tol = 1e-8);

}  // namespace hjb
