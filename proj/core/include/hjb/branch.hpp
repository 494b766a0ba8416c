#pragma once

#include "hjb/eigen.hpp"
#include "hjb/grid.hpp"
#include "hjb/nonlin.hpp"
#include "hjb/operator.hpp"
#include "hjb/solver.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hjb {

enum class SignClass { positive, negative, sign_changing, zero };

const char* to_string(SignClass s);

/// positive iff min > 0 and boundary_slope_margin(u) > hopf * ||u||_sup; negative mirrored;
/// zero iff ||u||_sup <= 1e-12.
SignClass classify_sign(const GridFunction& u, double hopf = 1e-6);

struct BranchPoint {
    double lambda = 0.0;
    GridFunction u;
    double sup_norm = 0.0;
    double min_val = 0.0;
    double max_val = 0.0;
    SignClass sign_class = SignClass::zero;
    double residual_sup = 0.0;
    double tolerance = 0.0;
    int arc_index = 0;

    /// Signed sup-norm used for diagrams: +norm for positive, -norm for negative, 0 otherwise.
    double signed_norm() const;
};

/// Evaluates the residual and sign data of (lambda, u).
BranchPoint make_point(const DiscreteOperator& dop, const Nonlinearity& f, double lambda, GridFunction u,
                       int arc_index = 0, const SolverOptions& opts = {});

enum class Provenance { bounded, from_plus_infinity, from_minus_infinity, from_zero };

const char* to_string(Provenance p);

enum class Termination { reached_target, left_window, norm_limit, stalled, max_points };

const char* to_string(Termination t);

struct Fold {
    double lambda = 0.0;
    /// +1 when lambda was increasing before the fold, -1 otherwise.
    int direction = 0;
    int arc_index = 0;
};

struct Branch {
    std::vector<BranchPoint> points;
    Provenance provenance = Provenance::bounded;
    std::vector<Fold> folds;
    Termination termination = Termination::reached_target;

    double lambda_min() const;
    double lambda_max() const;
};

struct StepControl {
    double initial_step = 0.05;
    double min_step = 1e-8;
    double max_step = 0.5;
    /// Switch to the arclength corrector when |d lambda / ds| drops below this.
    double arclength_switch = 0.1;
    int max_points = 2000;
    double lambda_min = -1e300;
    double lambda_max = 1e300;
    double max_norm = 1e6;
    SolverOptions solver;
};

/// Predictor-corrector continuation of F[u] + lambda u = f(x,u) from `start` toward
/// lambda_target: natural-parameter steps while lambda moves, a bordered arclength corrector
/// near folds. Every accepted point is re-verified by newton_solve.
Branch continue_branch(const DiscreteOperator& dop, const Nonlinearity& f, const BranchPoint& start,
                       double lambda_target, const StepControl& ctrl = {});

enum class SeedSide { left, right };

/// Large solution shaped like phi_1^sign at lambda_1^sign -/+ distance; throws NoSeed.
BranchPoint seed_from_infinity(const DiscreteOperator& dop, const Spectrum& spectrum, const Nonlinearity& f,
                               HalfSign sign, SeedSide side, double distance, const SolverOptions& opts = {});

struct MultistartSpec {
    std::vector<double> amplitudes{1.0, 5.0, 25.0, 125.0};
    /// Amplitude unit; 0 selects 1 + ||f(., 0)||_sup.
    double scale = 0.0;
    bool use_perron = true;
    std::vector<GridFunction> extra_starts;
    double dedupe_tol = 1e-6;
    double max_norm = 1e6;
};

/// Distinct solutions found from the deterministic start set, sorted by sup-norm.
std::vector<BranchPoint> census(const DiscreteOperator& dop, const Spectrum& spectrum, const Nonlinearity& f,
                                double lambda, const MultistartSpec& spec = {}, const SolverOptions& opts = {});

struct DiagramCount {
    double lambda = 0.0;
    int count = 0;
};

struct Polyline {
    int branch_id = 0;
    std::vector<std::pair<double, double>> points;  // (lambda, signed sup-norm)
};

struct Diagram {
    std::vector<Branch> branches;
    std::vector<DiagramCount> counts;
    std::vector<Fold> folds;
    std::vector<Polyline> polylines;
};

/// Counts, per lambda in the grid, the branch segments crossing lambda.
Diagram assemble_diagram(std::vector<Branch> branches, const std::vector<double>& lambda_grid);

/// Header "branch,arc,lambda,signed_sup_norm,sign_class,residual"; 17 significant digits.
void write_diagram_csv(std::ostream& os, const Diagram& diagram);

}  // namespace hjb
