#pragma once

#include "hjb/eigen.hpp"
#include "hjb/nonlin.hpp"
#include "hjb/operator.hpp"
#include "hjb/tstar.hpp"

#include <optional>
#include <string>

namespace hjb {

/// plus_lower: u >= R phi_1^+ implies f(x,u) >= d; plus_upper: u >= R phi_1^+ implies
/// f(x,u) <= d; minus_lower / minus_upper: the same for u <= R phi_1^- (phi_1^- < 0).
enum class BoundSide { plus_lower, plus_upper, minus_lower, minus_upper };

const char* to_string(BoundSide s);

struct DRPair {
    GridFunction d;
    double R = 0.0;
    double sigma = 0.0;
    /// Exponent of the discrete L^p distance ||d - c||_p.
    double p = 0.0;
    double distance = 0.0;
    /// Value used outside the bulk set.
    double outer_value = 0.0;
};

/// Discrete version of the truncated bound: d = c -/+ sigma where R |phi| is large enough for
/// the sampled asymptotics to hold, and the sampled extreme of f elsewhere. `phi` is
/// phi_1^+ for the plus sides and phi_1^- for the minus sides. Throws BoundViolated when c
/// is not an asymptotic bound of f on the sampled range.
DRPair construct_dR(const Nonlinearity& f, BoundSide side, const GridFunction& c, double epsilon,
                    const GridFunction& phi);

/// Checks u -> f(x, u) against d node-wise for the side's inequality.
bool dR_implication_holds(const Nonlinearity& f, BoundSide side, const GridFunction& d, const GridFunction& u);

enum class LandesmanSide { left_plus, left_minus, right_plus, right_minus };

const char* to_string(LandesmanSide s);

struct LandesmanVerdict {
    HypothesisVerdict verdict;
    std::optional<GridFunction> c;
    std::optional<TStarResult> tstar;
};

/// (Fl+): c_+ <= f_+ with t*_+(c_+) < 0; (Fr+): c^+ >= f^+ with t*_+(c^+) > 0;
/// (Fl-): c^- >= f^- with t*_-(c^-) > 0; (Fr-): c_- <= f_- with t*_-(c_-) < 0.
/// The candidate c is the declared limit when finite and a constant of the right sign when
/// the limit is an infinity in the favourable direction. The sign must clear zero by the
/// bracket width; a straddling bracket is inconclusive.
LandesmanVerdict check_landesman(const Nonlinearity& f, const DiscreteOperator& dop, const Spectrum& spectrum,
                                 LandesmanSide side, const std::optional<GridFunction>& candidate = std::nullopt,
                                 const TStarOptions& opts = {});

}  // namespace hjb
