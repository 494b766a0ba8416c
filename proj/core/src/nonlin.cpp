#include "hjb/nonlin.hpp"

#include "hjb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hjb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double param_or(const Params& p, const std::string& key, double fallback) {
    auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
}

double require_param(const Params& p, const std::string& key, const std::string& who) {
    auto it = p.find(key);
    if (it == p.end()) throw InvalidParams(who + " needs parameter '" + key + "'");
    if (!std::isfinite(it->second)) throw InvalidParams(who + ": parameter '" + key + "' is not finite");
    return it->second;
}

GridFunction require_function(const FunctionParams& fns, const std::string& key, const std::string& who,
                              const Grid& grid) {
    auto it = fns.find(key);
    if (it == fns.end()) throw InvalidParams(who + " needs function '" + key + "'");
    require_same_grid(grid, it->second.grid(), who.c_str());
    return it->second;
}

NonlinearityLimits all_finite(const GridFunction& g) {
    return {AsymptoticLimit::finite(g), AsymptoticLimit::finite(g), AsymptoticLimit::finite(g),
            AsymptoticLimit::finite(g)};
}

// Limits of something that behaves like sign * s^p, p > 0, plus bounded terms.
NonlinearityLimits growing(double sign_at_plus, double sign_at_minus) {
    auto flag = [](double s) {
        return s > 0 ? AsymptoticLimit::plus_infinity() : AsymptoticLimit::minus_infinity();
    };
    return {flag(sign_at_plus), flag(sign_at_plus), flag(sign_at_minus), flag(sign_at_minus)};
}

double sgn(double s) { return s > 0 ? 1.0 : (s < 0 ? -1.0 : 0.0); }

}  // namespace

std::string AsymptoticLimit::describe() const {
    switch (kind) {
        case Kind::plus_infinity: return "+inf";
        case Kind::minus_infinity: return "-inf";
        case Kind::finite: break;
    }
    std::ostringstream os;
    os << "finite[" << value->min() << ", " << value->max() << "]";
    return os.str();
}

Nonlinearity::Nonlinearity(Grid grid, std::string name, Params params, Eval value, Eval derivative,
                           NonlinearityLimits limits)
    : grid_(std::move(grid)),
      name_(std::move(name)),
      params_(std::move(params)),
      value_(std::move(value)),
      derivative_(std::move(derivative)),
      limits_(std::move(limits)) {}

GridFunction Nonlinearity::evaluate(const GridFunction& u) const {
    require_same_grid(grid_, u.grid(), "Nonlinearity::evaluate");
    GridFunction out(grid_);
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = value_(i, u[i]);
    return out;
}

GridFunction Nonlinearity::derivative(const GridFunction& u) const {
    require_same_grid(grid_, u.grid(), "Nonlinearity::derivative");
    GridFunction out(grid_);
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = derivative_(i, u[i]);
    return out;
}

namespace {

// Max (signed or absolute) difference quotient between consecutive samples.
double sampled_quotient(const Nonlinearity& f, double R, int samples, bool absolute, std::size_t stride,
                        double* where = nullptr) {
    double best = -kInf;
    const double ds = 2.0 * R / (samples - 1);
    for (std::size_t node = 0; node < f.grid().size(); node += stride) {
        double prev = f(node, -R);
        for (int k = 1; k < samples; ++k) {
            const double s = -R + ds * k;
            const double cur = f(node, s);
            double q = (cur - prev) / ds;
            if (absolute) q = std::abs(q);
            if (!std::isfinite(q)) q = kInf;
            if (q > best) {
                best = q;
                if (where) *where = s - 0.5 * ds;
            }
            prev = cur;
        }
    }
    return best;
}

}  // namespace

double Nonlinearity::lipschitz(double R) const { return sampled_quotient(*this, R, 801, true, 1); }

double Nonlinearity::upper_lipschitz(double R) const { return sampled_quotient(*this, R, 801, false, 1); }

double omega(double s) { return s == 0.0 ? 0.0 : s / std::sqrt(std::abs(s)); }

std::vector<std::string> builtin_names() {
    return {"zero", "forcing", "linear", "omega", "example1", "example2", "example3", "model"};
}

Nonlinearity builtin(const std::string& name, const Params& params, const Grid& grid,
                     const FunctionParams& functions) {
    const GridFunction zero(grid);
    if (name == "zero") {
        return Nonlinearity(grid, name, params, [](std::size_t, double) { return 0.0; },
                            [](std::size_t, double) { return 0.0; }, all_finite(zero));
    }
    if (name == "forcing") {
        const GridFunction g = require_function(functions, "g", name, grid);
        return Nonlinearity(grid, name, params, [g](std::size_t i, double) { return g[i]; },
                            [](std::size_t, double) { return 0.0; }, all_finite(g));
    }
    if (name == "linear") {
        const double k = require_param(params, "k", name);
        NonlinearityLimits lim = k == 0.0 ? all_finite(zero) : growing(sgn(k), -sgn(k));
        return Nonlinearity(grid, name, params, [k](std::size_t, double s) { return k * s; },
                            [k](std::size_t, double) { return k; }, std::move(lim));
    }
    if (name == "omega" || name == "example2") {
        const double sign = name == "omega" ? 1.0 : -1.0;
        return Nonlinearity(
            grid, name, params, [sign](std::size_t, double s) { return sign * omega(s); },
            [sign](std::size_t, double s) { return s == 0.0 ? sign * kInf : sign * 0.5 / std::sqrt(std::abs(s)); },
            growing(sign, -sign));
    }
    if (name == "example3") {
        return Nonlinearity(
            grid, name, params,
            [](std::size_t, double s) { return std::abs(s) <= 1.0 ? -s : -omega(s); },
            [](std::size_t, double s) { return std::abs(s) <= 1.0 ? -1.0 : -0.5 / std::sqrt(std::abs(s)); },
            growing(-1.0, 1.0));
    }
    if (name == "model") {
        const double alpha = require_param(params, "alpha", name);
        const double kappa = param_or(params, "kappa", -1.0);
        const double eps = param_or(params, "eps_reg", 0.0);
        if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidParams("model: alpha must lie in (0, 1)");
        if (!(eps >= 0.0) || !std::isfinite(eps)) throw InvalidParams("model: eps_reg must be >= 0");
        if (!std::isfinite(kappa)) throw InvalidParams("model: kappa must be finite");
        GridFunction h = GridFunction::constant(grid, param_or(params, "h", 0.0));
        if (auto it = functions.find("h"); it != functions.end()) {
            require_same_grid(grid, it->second.grid(), "model");
            h = it->second;
        }
        NonlinearityLimits lim = kappa == 0.0 ? all_finite(h) : growing(sgn(kappa), -sgn(kappa));
        auto value = [alpha, kappa, eps, h](std::size_t i, double s) {
            const double a = std::abs(s);
            const double base = eps + a;
            return (base == 0.0 ? 0.0 : kappa * s * std::pow(base, alpha - 1.0)) + h[i];
        };
        auto deriv = [alpha, kappa, eps](std::size_t, double s) {
            const double a = std::abs(s);
            const double base = eps + a;
            if (base == 0.0) return kappa == 0.0 ? 0.0 : sgn(kappa) * kInf;
            return kappa * std::pow(base, alpha - 2.0) * (eps + alpha * a);
        };
        return Nonlinearity(grid, name, params, value, deriv, std::move(lim));
    }
    if (name == "example1") {
        const double t_bar = require_param(params, "t_bar", name);
        const double t_star = require_param(params, "t_star", name);
        const double eps = require_param(params, "eps", name);
        const double M = require_param(params, "M", name);
        if (!(M > 0.0)) throw InvalidParams("example1: M must be positive");
        if (!(eps > 0.0)) throw InvalidParams("example1: eps must be positive");
        const GridFunction phi = require_function(functions, "phi_plus", name, grid);
        const GridFunction h = require_function(functions, "h", name, grid);
        const double low = t_star - eps;
        const double slope = (t_bar - low) / M;
        auto tau = [=](double u) {
            if (u >= -M) return t_bar;
            if (u <= -2.0 * M) return low;
            return slope * (u + M) + t_bar;
        };
        auto value = [tau, phi, h](std::size_t i, double s) { return tau(s) * phi[i] + h[i]; };
        auto deriv = [=](std::size_t i, double s) {
            return (s < -M && s > -2.0 * M) ? slope * phi[i] : 0.0;
        };
        const GridFunction top = t_bar * phi + h;
        const GridFunction bottom = low * phi + h;
        NonlinearityLimits lim{AsymptoticLimit::finite(top), AsymptoticLimit::finite(top),
                               AsymptoticLimit::finite(bottom), AsymptoticLimit::finite(bottom)};
        return Nonlinearity(grid, name, params, value, deriv, std::move(lim));
    }
    throw InvalidParams("unknown nonlinearity '" + name + "'");
}

namespace {

double term_value(const PowerTerm& t, double s) {
    const double a = std::abs(s);
    const double mag = t.power == 0.0 ? 1.0 : (a == 0.0 ? (t.power > 0 ? 0.0 : kInf) : std::pow(a, t.power));
    return t.coeff * (t.odd ? sgn(s) * mag : mag);
}

double term_derivative(const PowerTerm& t, double s) {
    if (t.power == 0.0) return 0.0;
    const double a = std::abs(s);
    const double mag = a == 0.0 ? (t.power > 1 ? 0.0 : (t.power == 1 ? 1.0 : kInf)) : std::pow(a, t.power - 1.0);
    return t.coeff * t.power * (t.odd ? mag : sgn(s) * mag);
}

// Limit of the piece's s-terms as s -> direction * inf.
std::pair<AsymptoticLimit::Kind, double> piece_limit(const Piece& p, double direction) {
    double top = -kInf;
    for (const auto& t : p.terms) {
        if (t.coeff != 0.0) top = std::max(top, t.power);
    }
    double lead = 0.0;
    double constant = 0.0;
    for (const auto& t : p.terms) {
        const double sign = t.odd ? direction : 1.0;
        if (t.coeff != 0.0 && t.power == top) lead += t.coeff * sign;
        if (t.power == 0.0) constant += t.coeff * sign;
    }
    if (top > 0.0 && lead != 0.0) {
        return {lead > 0 ? AsymptoticLimit::Kind::plus_infinity : AsymptoticLimit::Kind::minus_infinity, 0.0};
    }
    return {AsymptoticLimit::Kind::finite, constant};
}

}  // namespace

Nonlinearity piecewise_power(std::string name, std::vector<Piece> pieces, const GridFunction& h) {
    if (pieces.empty()) throw InvalidParams("piecewise nonlinearity needs at least one piece");
    if (pieces.front().lo != -kInf || pieces.back().hi != kInf) {
        throw InvalidParams("pieces must start at -inf and end at +inf");
    }
    for (std::size_t k = 0; k < pieces.size(); ++k) {
        if (!(pieces[k].lo < pieces[k].hi)) throw InvalidParams("piece bounds must increase");
        if (k > 0 && pieces[k].lo != pieces[k - 1].hi) throw InvalidParams("pieces must be contiguous");
    }
    auto find = [pieces](double s) -> const Piece& {
        for (const auto& p : pieces) {
            if (s < p.hi) return p;
        }
        return pieces.back();
    };
    auto value = [find, h](std::size_t i, double s) {
        double v = h[i];
        for (const auto& t : find(s).terms) v += term_value(t, s);
        return v;
    };
    auto deriv = [find](std::size_t, double s) {
        double d = 0.0;
        for (const auto& t : find(s).terms) d += term_derivative(t, s);
        return d;
    };
    auto make = [&h](std::pair<AsymptoticLimit::Kind, double> lim) {
        if (lim.first == AsymptoticLimit::Kind::finite) {
            return AsymptoticLimit::finite(h + GridFunction::constant(h.grid(), lim.second));
        }
        return AsymptoticLimit{lim.first, std::nullopt};
    };
    const auto up = make(piece_limit(pieces.back(), 1.0));
    const auto down = make(piece_limit(pieces.front(), -1.0));
    Params meta{{"pieces", static_cast<double>(pieces.size())}};
    return Nonlinearity(h.grid(), std::move(name), std::move(meta), value, deriv, {up, up, down, down});
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::holds: return "holds";
        case Verdict::fails: return "fails";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

std::vector<double> default_sublinear_grid() {
    std::vector<double> s;
    for (int k = 0; k <= 16; ++k) s.push_back(std::pow(10.0, 0.5 * k));
    return s;
}

HypothesisVerdict check_sublinear(const Nonlinearity& f, const std::vector<double>& s_grid_in) {
    const std::vector<double> s_grid = s_grid_in.empty() ? default_sublinear_grid() : s_grid_in;
    HypothesisVerdict out;
    out.hypothesis = "F0";
    std::vector<double> ratios;
    for (double s : s_grid) {
        double worst = 0.0;
        for (std::size_t i = 0; i < f.grid().size(); ++i) {
            worst = std::max({worst, std::abs(f(i, s) / s), std::abs(f(i, -s) / s)});
        }
        ratios.push_back(worst);
    }
    const double last = ratios.back();
    out.value = last;
    out.s_value = s_grid.back();
    bool monotone = true;
    for (std::size_t k = 1; k < s_grid.size(); ++k) {
        if (s_grid[k - 1] >= 1e4 && ratios[k] > ratios[k - 1] * (1.0 + 1e-12)) monotone = false;
    }
    std::ostringstream os;
    os << "max_x |f(x,s)/s| = " << last << " at |s| = " << s_grid.back();
    if (!(last < 1e-3)) {
        out.verdict = Verdict::fails;
    } else if (!monotone) {
        out.verdict = Verdict::inconclusive;
        os << "; ratio not monotone beyond 1e4";
    } else {
        out.verdict = Verdict::holds;
    }
    out.witness = os.str();
    return out;
}

F1F2Verdict check_F1_F2(const Nonlinearity& f) {
    F1F2Verdict out;
    out.f1.hypothesis = "F1";
    const GridFunction f0 = f.evaluate(GridFunction(f.grid()));
    Eigen::Index argmin = 0;
    const double lo = f0.values().minCoeff(&argmin);
    const double total = integrate(f0);
    out.f1.value = lo;
    std::ostringstream w1;
    if (lo < -1e-12) {
        out.f1.verdict = Verdict::fails;
        out.f1.node = static_cast<std::size_t>(argmin);
        w1 << "f(x,0) = " << lo << " < 0 at node " << argmin;
    } else if (!(total > 0.0)) {
        out.f1.verdict = Verdict::fails;
        w1 << "f(.,0) vanishes identically (integral " << total << ")";
    } else {
        out.f1.verdict = Verdict::holds;
        w1 << "min f(x,0) = " << lo << ", integral " << total;
    }
    out.f1.witness = w1.str();

    out.f2.hypothesis = "F2";
    out.f2.verdict = Verdict::holds;
    const std::size_t stride = std::max<std::size_t>(1, f.grid().size() / 50);
    std::ostringstream w2;
    for (double R : {1.0, 10.0, 100.0}) {
        double where = 0.0;
        const double coarse = sampled_quotient(f, R, 1001, true, stride);
        const double fine = sampled_quotient(f, R, 16001, true, stride, &where);
        out.f2.value = std::max(out.f2.value, fine);
        if (!std::isfinite(fine) || fine > 2.0 * coarse + 1e-12) {
            out.f2.verdict = Verdict::fails;
            out.f2.s_value = where;
            w2 << "difference quotient on [-" << R << ", " << R << "] grows from " << coarse << " to " << fine
               << " under 16x refinement near s = " << where;
            break;
        }
        w2 << "R=" << R << ": L=" << fine << "; ";
    }
    out.f2.witness = w2.str();
    return out;
}

}  // namespace hjb
