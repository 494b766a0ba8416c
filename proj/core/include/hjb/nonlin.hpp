#pragma once

#include "hjb/grid.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hjb {

/// One of the four asymptotic limits of f(x, s): a finite function of x or a
/// signed infinity flag.
struct AsymptoticLimit {
    enum class Kind { finite, plus_infinity, minus_infinity };

    Kind kind = Kind::finite;
    std::optional<GridFunction> value;

    static AsymptoticLimit finite(GridFunction v) { return {Kind::finite, std::move(v)}; }
    static AsymptoticLimit plus_infinity() { return {Kind::plus_infinity, std::nullopt}; }
    static AsymptoticLimit minus_infinity() { return {Kind::minus_infinity, std::nullopt}; }

    bool is_finite() const { return kind == Kind::finite; }
    std::string describe() const;
};

/// f_plus = liminf at +inf, f^plus = limsup at +inf, f_minus = liminf at -inf,
/// f^minus = limsup at -inf.
struct NonlinearityLimits {
    AsymptoticLimit lower_plus;
    AsymptoticLimit upper_plus;
    AsymptoticLimit lower_minus;
    AsymptoticLimit upper_minus;
};

using Params = std::map<std::string, double>;
using FunctionParams = std::map<std::string, GridFunction>;

/// f(x, s) evaluated at grid nodes.
class Nonlinearity {
public:
    using Eval = std::function<double(std::size_t node, double s)>;

    Nonlinearity(Grid grid, std::string name, Params params, Eval value, Eval derivative,
                 NonlinearityLimits limits);

    const Grid& grid() const { return grid_; }
    const std::string& name() const { return name_; }
    const Params& params() const { return params_; }
    const NonlinearityLimits& limits() const { return limits_; }

    double operator()(std::size_t node, double s) const { return value_(node, s); }
    /// A generalized derivative in s (one-sided choice at kinks); may be infinite.
    double derivative(std::size_t node, double s) const { return derivative_(node, s); }
    GridFunction evaluate(const GridFunction& u) const;
    GridFunction derivative(const GridFunction& u) const;

    /// Sampled Lipschitz constant of s -> f(x, s) on [-R, R], maximised over nodes.
    /// Non-finite quotients are reported as +inf.
    double lipschitz(double R) const;
    /// Sampled sup of (f(x,s1) - f(x,s2)) / (s1 - s2) over s1 > s2 in [-R, R]; the
    /// one-sided constant that makes s -> f(x,s) - L s nonincreasing.
    double upper_lipschitz(double R) const;

private:
    Grid grid_;
    std::string name_;
    Params params_;
    Eval value_;
    Eval derivative_;
    NonlinearityLimits limits_;
};

/// omega(s) = s / sqrt|s|, omega(0) = 0.
double omega(double s);

/// Named nonlinearities:
///   zero; forcing (f = g, needs function "g"); linear (f = k s); omega;
///   example2 (-omega); example3 (-s on |s| <= 1, -omega(s) beyond);
///   model (kappa * s * (eps + |s|)^(alpha - 1) + h, kappa = -1 and eps = 0 by default);
///   example1 (tau(u) phi + h with tau = t_bar for u >= -M, t_star - eps for u <= -2M,
///   linear in between; needs functions "phi_plus" and "h").
Nonlinearity builtin(const std::string& name, const Params& params, const Grid& grid,
                     const FunctionParams& functions = {});

std::vector<std::string> builtin_names();

/// Term c * s^p (odd: sign(s)|s|^p, otherwise |s|^p) on a piece of the s-axis.
struct PowerTerm {
    double coeff = 0.0;
    double power = 0.0;
    bool odd = true;
};

struct Piece {
    double lo;
    double hi;
    std::vector<PowerTerm> terms;
};

/// Piecewise power expression in s plus h(x). Pieces must cover the real line in
/// increasing order; the first starts at -inf and the last ends at +inf.
Nonlinearity piecewise_power(std::string name, std::vector<Piece> pieces, const GridFunction& h);

enum class Verdict { holds, fails, inconclusive };

const char* to_string(Verdict v);

struct HypothesisVerdict {
    std::string hypothesis;
    Verdict verdict = Verdict::inconclusive;
    std::string witness;
    std::optional<std::size_t> node;
    std::optional<double> s_value;
    double value = 0.0;
    std::optional<std::pair<double, double>> tstar_bracket;
};

std::vector<double> default_sublinear_grid();

/// max_x |f(x,s)/s| along a geometric s-grid in both directions.
HypothesisVerdict check_sublinear(const Nonlinearity& f, const std::vector<double>& s_grid = {});

struct F1F2Verdict {
    HypothesisVerdict f1;
    HypothesisVerdict f2;
};

F1F2Verdict check_F1_F2(const Nonlinearity& f);

struct HypothesisReport {
    std::vector<HypothesisVerdict> verdicts;
};

}  // namespace hjb
