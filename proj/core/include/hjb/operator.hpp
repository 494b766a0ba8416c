#pragma once

#include "hjb/grid.hpp"

#include <Eigen/SparseCore>

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace hjb {

using CoeffField = std::function<double(const Point&)>;

CoeffField constant_field(double value);

/// Coefficients of one linear operator tr(A D^2 u) + b.Du + c u with
/// axis-aligned diffusion A = diag(a[0], a[1]).
struct ControlCoeffs {
    std::array<CoeffField, 2> diffusion;
    std::array<CoeffField, 2> drift;
    CoeffField zeroth;
    std::string label;

    static ControlCoeffs constant(double a0, double a1 = 0.0, double b0 = 0.0, double b1 = 0.0,
                                  double c = 0.0, std::string label = {});
};

enum class ExtremalTag { laplacian, pucci_plus, pucci_minus, barenblatt, fucik };

const char* to_string(ExtremalTag tag);

/// Whether F is the node-wise supremum (convex HJB form) or infimum of its
/// linear pieces. The infimum form appears as the dual -F[-u] and as Pucci's
/// minimal operator.
enum class Sense { sup, inf };

/// A Hamilton-Jacobi-Bellman operator F[u] = sup_a {tr(A^a D^2u) + b^a.Du + c^a u},
/// given either by an explicit finite control family or by an extremal tag.
class HJBOperator {
public:
    static HJBOperator laplacian();
    static HJBOperator barenblatt(double a, double b);
    static HJBOperator pucci_plus(double lower, double upper);
    static HJBOperator pucci_minus(double lower, double upper);
    /// Delta u + b u^+ + a u^-, realised as max{Delta + b, Delta + a}; needs b >= a.
    static HJBOperator fucik(double a, double b);
    static HJBOperator from_controls(std::vector<ControlCoeffs> controls, double ellipticity_lower,
                                     double ellipticity_upper, double gamma);

    std::optional<ExtremalTag> tag() const { return tag_; }
    const std::vector<double>& params() const { return params_; }
    double ellipticity_lower() const { return lower_; }
    double ellipticity_upper() const { return upper_; }
    double gamma() const { return gamma_; }
    Sense sense() const { return sense_; }
    std::string description() const;

    /// Finite control family used for the discretization in the given dimension.
    /// For Pucci in 2D this is the axis-aligned family diag(a0, a1) with
    /// a_i in {lower, upper}, an approximation of the full sup over SPD matrices.
    std::vector<ControlCoeffs> controls(int dimension) const;

private:
    HJBOperator() = default;

    std::optional<ExtremalTag> tag_;
    std::vector<double> params_;
    std::vector<ControlCoeffs> explicit_controls_;
    double lower_ = 1.0;
    double upper_ = 1.0;
    double gamma_ = 0.0;
    Sense sense_ = Sense::sup;
};

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
/// Active control index per interior node.
using Policy = std::vector<int>;

/// Monotone finite-difference discretization: one sparse matrix per control,
/// all sharing the same sparsity pattern. Immutable after assembly.
class DiscreteOperator {
public:
    DiscreteOperator(Grid grid, Sense sense, std::vector<SparseMatrix> controls, double gamma,
                     double max_zeroth, double ellipticity_lower, double ellipticity_upper);

    const Grid& grid() const { return grid_; }
    Sense sense() const { return sense_; }
    std::size_t num_controls() const { return controls_.size(); }
    const SparseMatrix& control(std::size_t k) const { return controls_[k]; }
    double gamma() const { return gamma_; }
    /// Largest zeroth-order coefficient over nodes and controls.
    double max_zeroth() const { return max_zeroth_; }
    double ellipticity_lower() const { return ellipticity_lower_; }
    double ellipticity_upper() const { return ellipticity_upper_; }
    /// True iff every off-diagonal entry of every control matrix is >= 0.
    bool monotone() const { return monotone_; }
    /// Largest absolute row sum over all controls; scales round-off in residuals.
    double operator_norm() const { return operator_norm_; }

    GridFunction apply(const GridFunction& u) const;
    /// Node-wise argmax (sup) or argmin (inf) of the control applications;
    /// ties go to the lowest control index.
    Policy policy(const GridFunction& u) const;
    /// Matrix whose row i is row i of control policy[i].
    SparseMatrix assemble(const Policy& policy) const;
    /// G[v] = -F[-v]: same control matrices, opposite sense.
    DiscreteOperator dual() const;
    /// Copy with `shift` added to every control's zeroth-order coefficient.
    DiscreteOperator shifted(double shift) const;

private:
    Grid grid_;
    Sense sense_;
    std::vector<SparseMatrix> controls_;
    double gamma_;
    double max_zeroth_;
    double ellipticity_lower_;
    double ellipticity_upper_;
    bool monotone_ = true;
    double operator_norm_ = 0.0;
};

/// Central second differences, upwind first differences, diagonal zeroth order.
/// Throws MonotonicityViolation when h * gamma > 2 * lambda_ell on some axis and
/// InvalidCoefficients when a sampled coefficient leaves its declared bounds.
DiscreteOperator discretize(const HJBOperator& op, const Grid& grid);

struct StructureViolation {
    std::string property;
    double amount = 0.0;
    std::size_t node = 0;
    int trial = -1;
};

struct StructureReport {
    bool pass = true;
    bool monotone_stencil = true;
    double worst_homogeneity = 0.0;
    double worst_subadditivity = 0.0;
    double worst_sandwich = 0.0;
    double worst_ellipticity = 0.0;
    std::vector<StructureViolation> violations;
};

/// Randomised checks of positive homogeneity, subadditivity (superadditivity
/// for the inf sense), the two-sided sandwich -F[v-u] <= F[u]-F[v] <= F[u-v]
/// and discrete degenerate ellipticity (raising off-node values cannot lower
/// F at the node).
StructureReport check_structure(const DiscreteOperator& dop, int trials, std::uint64_t seed,
                                double slack = 1e-10);

}  // namespace hjb
