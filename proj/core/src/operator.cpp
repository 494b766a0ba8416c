#include "hjb/operator.hpp"

#include "hjb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hjb {

CoeffField constant_field(double value) {
    return [value](const Point&) { return value; };
}

ControlCoeffs ControlCoeffs::constant(double a0, double a1, double b0, double b1, double c,
                                      std::string label) {
    ControlCoeffs k;
    k.diffusion = {constant_field(a0), constant_field(a1)};
    k.drift = {constant_field(b0), constant_field(b1)};
    k.zeroth = constant_field(c);
    k.label = std::move(label);
    return k;
}

const char* to_string(ExtremalTag tag) {
    switch (tag) {
        case ExtremalTag::laplacian: return "laplacian";
        case ExtremalTag::pucci_plus: return "pucci_plus";
        case ExtremalTag::pucci_minus: return "pucci_minus";
        case ExtremalTag::barenblatt: return "barenblatt";
        case ExtremalTag::fucik: return "fucik";
    }
    return "?";
}

HJBOperator HJBOperator::laplacian() {
    HJBOperator op;
    op.tag_ = ExtremalTag::laplacian;
    return op;
}

HJBOperator HJBOperator::barenblatt(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
        throw InvalidCoefficients("barenblatt diffusion coefficients must be positive");
    }
    HJBOperator op;
    op.tag_ = ExtremalTag::barenblatt;
    op.params_ = {a, b};
    op.lower_ = std::min(a, b);
    op.upper_ = std::max(a, b);
    return op;
}

static void check_pucci(double lower, double upper) {
    if (!(lower > 0.0) || !(lower <= upper) || !std::isfinite(upper)) {
        throw InvalidCoefficients("pucci bounds need 0 < lower <= upper");
    }
}

HJBOperator HJBOperator::pucci_plus(double lower, double upper) {
    check_pucci(lower, upper);
    HJBOperator op;
    op.tag_ = ExtremalTag::pucci_plus;
    op.params_ = {lower, upper};
    op.lower_ = lower;
    op.upper_ = upper;
    return op;
}

HJBOperator HJBOperator::pucci_minus(double lower, double upper) {
    HJBOperator op = pucci_plus(lower, upper);
    op.tag_ = ExtremalTag::pucci_minus;
    op.sense_ = Sense::inf;
    return op;
}

HJBOperator HJBOperator::fucik(double a, double b) {
    if (!(b >= a) || !std::isfinite(a) || !std::isfinite(b)) {
        throw InvalidCoefficients("fucik operator needs b >= a (finite)");
    }
    HJBOperator op;
    op.tag_ = ExtremalTag::fucik;
    op.params_ = {a, b};
    op.gamma_ = std::max(std::abs(a), std::abs(b));
    return op;
}

HJBOperator HJBOperator::from_controls(std::vector<ControlCoeffs> controls, double ellipticity_lower,
                                       double ellipticity_upper, double gamma) {
    if (controls.empty()) throw InvalidCoefficients("control list is empty");
    if (!(ellipticity_lower > 0.0) || !(ellipticity_lower <= ellipticity_upper)) {
        throw InvalidCoefficients("ellipticity bounds need 0 < lower <= upper");
    }
    if (!(gamma >= 0.0)) throw InvalidCoefficients("gamma must be nonnegative");
    for (const auto& k : controls) {
        if (!k.diffusion[0] || !k.diffusion[1] || !k.drift[0] || !k.drift[1] || !k.zeroth) {
            throw InvalidCoefficients("control '" + k.label + "' has an unset coefficient field");
        }
    }
    HJBOperator op;
    op.explicit_controls_ = std::move(controls);
    op.lower_ = ellipticity_lower;
    op.upper_ = ellipticity_upper;
    op.gamma_ = gamma;
    return op;
}

std::string HJBOperator::description() const {
    std::ostringstream os;
    if (!tag_) {
        os << "controls(" << explicit_controls_.size() << ")";
        return os.str();
    }
    os << to_string(*tag_);
    if (!params_.empty()) {
        os << "(";
        for (std::size_t i = 0; i < params_.size(); ++i) os << (i ? ", " : "") << params_[i];
        os << ")";
    }
    return os.str();
}

std::vector<ControlCoeffs> HJBOperator::controls(int dimension) const {
    if (!tag_) return explicit_controls_;
    const bool two_d = dimension == 2;
    std::vector<ControlCoeffs> out;
    switch (*tag_) {
        case ExtremalTag::laplacian:
            out.push_back(ControlCoeffs::constant(1.0, two_d ? 1.0 : 0.0, 0, 0, 0, "laplacian"));
            break;
        case ExtremalTag::barenblatt:
            for (double a : params_) {
                out.push_back(ControlCoeffs::constant(a, two_d ? a : 0.0, 0, 0, 0, "diffusion"));
            }
            break;
        case ExtremalTag::pucci_plus:
        case ExtremalTag::pucci_minus:
            if (!two_d) {
                out.push_back(ControlCoeffs::constant(lower_, 0, 0, 0, 0, "lower"));
                out.push_back(ControlCoeffs::constant(upper_, 0, 0, 0, 0, "upper"));
            } else {
                for (double ay : {lower_, upper_}) {
                    for (double ax : {lower_, upper_}) {
                        out.push_back(ControlCoeffs::constant(ax, ay, 0, 0, 0, "diag"));
                    }
                }
            }
            break;
        case ExtremalTag::fucik:
            // b is listed first so that ties on u = 0 pick the u^+ branch.
            out.push_back(ControlCoeffs::constant(1.0, two_d ? 1.0 : 0.0, 0, 0, params_[1], "positive part"));
            out.push_back(ControlCoeffs::constant(1.0, two_d ? 1.0 : 0.0, 0, 0, params_[0], "negative part"));
            break;
    }
    return out;
}

namespace {

bool same_pattern(const SparseMatrix& a, const SparseMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols() || a.nonZeros() != b.nonZeros()) return false;
    return std::equal(a.outerIndexPtr(), a.outerIndexPtr() + a.outerSize() + 1, b.outerIndexPtr()) &&
           std::equal(a.innerIndexPtr(), a.innerIndexPtr() + a.nonZeros(), b.innerIndexPtr());
}

}  // namespace

DiscreteOperator::DiscreteOperator(Grid grid, Sense sense, std::vector<SparseMatrix> controls,
                                   double gamma, double max_zeroth, double ellipticity_lower,
                                   double ellipticity_upper)
    : grid_(std::move(grid)),
      sense_(sense),
      controls_(std::move(controls)),
      gamma_(gamma),
      max_zeroth_(max_zeroth),
      ellipticity_lower_(ellipticity_lower),
      ellipticity_upper_(ellipticity_upper) {
    if (controls_.empty()) throw InvalidCoefficients("discrete operator needs at least one control");
    const auto n = static_cast<Eigen::Index>(grid_.size());
    for (auto& m : controls_) {
        if (m.rows() != n || m.cols() != n) throw GridMismatch("control matrix size does not match grid");
        m.makeCompressed();
        if (!same_pattern(m, controls_.front())) {
            throw InvalidCoefficients("control matrices must share one sparsity pattern");
        }
        for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
            double row_sum = 0.0;
            for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
                row_sum += std::abs(it.value());
                if (it.col() != r && it.value() < 0.0) monotone_ = false;
            }
            operator_norm_ = std::max(operator_norm_, row_sum);
        }
    }
}

GridFunction DiscreteOperator::apply(const GridFunction& u) const {
    require_same_grid(grid_, u.grid(), "DiscreteOperator::apply");
    Vector best = controls_.front() * u.values();
    for (std::size_t k = 1; k < controls_.size(); ++k) {
        const Vector y = controls_[k] * u.values();
        if (sense_ == Sense::sup) {
            best = best.cwiseMax(y);
        } else {
            best = best.cwiseMin(y);
        }
    }
    return GridFunction(grid_, std::move(best));
}

Policy DiscreteOperator::policy(const GridFunction& u) const {
    require_same_grid(grid_, u.grid(), "DiscreteOperator::policy");
    Policy pol(grid_.size(), 0);
    Vector best = controls_.front() * u.values();
    for (std::size_t k = 1; k < controls_.size(); ++k) {
        const Vector y = controls_[k] * u.values();
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            const bool better = sense_ == Sense::sup ? y[i] > best[i] : y[i] < best[i];
            if (better) {
                best[i] = y[i];
                pol[static_cast<std::size_t>(i)] = static_cast<int>(k);
            }
        }
    }
    return pol;
}

SparseMatrix DiscreteOperator::assemble(const Policy& policy) const {
    if (policy.size() != grid_.size()) throw GridMismatch("policy length does not match grid");
    SparseMatrix out = controls_.front();
    const auto* outer = out.outerIndexPtr();
    double* dst = out.valuePtr();
    for (std::size_t r = 0; r < policy.size(); ++r) {
        const int k = policy[r];
        if (k == 0) continue;
        if (k < 0 || static_cast<std::size_t>(k) >= controls_.size()) {
            throw InvalidCoefficients("policy references unknown control " + std::to_string(k));
        }
        const double* src = controls_[static_cast<std::size_t>(k)].valuePtr();
        std::copy(src + outer[r], src + outer[r + 1], dst + outer[r]);
    }
    return out;
}

DiscreteOperator DiscreteOperator::dual() const {
    return DiscreteOperator(grid_, sense_ == Sense::sup ? Sense::inf : Sense::sup, controls_, gamma_,
                            max_zeroth_, ellipticity_lower_, ellipticity_upper_);
}

DiscreteOperator DiscreteOperator::shifted(double shift) const {
    std::vector<SparseMatrix> mats = controls_;
    for (auto& m : mats) {
        for (Eigen::Index r = 0; r < m.outerSize(); ++r) m.coeffRef(r, r) += shift;
    }
    return DiscreteOperator(grid_, sense_, std::move(mats), gamma_ + std::abs(shift), max_zeroth_ + shift,
                            ellipticity_lower_, ellipticity_upper_);
}

DiscreteOperator discretize(const HJBOperator& op, const Grid& grid) {
    const int dim = grid.dimension();
    for (int axis = 0; axis < dim; ++axis) {
        if (grid.spacing(axis) * op.gamma() > 2.0 * op.ellipticity_lower() * (1.0 + 1e-12)) {
            std::ostringstream os;
            os << "h*gamma = " << grid.spacing(axis) * op.gamma() << " exceeds 2*lambda_ell = "
               << 2.0 * op.ellipticity_lower() << " on axis " << axis;
            throw MonotonicityViolation(os.str());
        }
    }
    const auto families = op.controls(dim);
    const double lo = op.ellipticity_lower() * (1.0 - 1e-12);
    const double hi = op.ellipticity_upper() * (1.0 + 1e-12);
    const double gmax = op.gamma() * (1.0 + 1e-12) + 1e-300;
    const int n = grid.n();
    const std::size_t size = grid.size();
    double max_c = -std::numeric_limits<double>::infinity();

    std::vector<SparseMatrix> mats;
    for (const auto& k : families) {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(size * static_cast<std::size_t>(2 * dim + 1));
        for (std::size_t node = 0; node < size; ++node) {
            const Point x = grid.coordinates(node);
            const double c = k.zeroth(x);
            if (!std::isfinite(c) || std::abs(c) > gmax) {
                throw InvalidCoefficients("zeroth-order coefficient of '" + k.label + "' leaves [-gamma, gamma]");
            }
            max_c = std::max(max_c, c);
            double diag = c;
            const std::size_t i = dim == 1 ? node : node % static_cast<std::size_t>(n);
            const std::size_t j = dim == 1 ? 0 : node / static_cast<std::size_t>(n);
            for (int axis = 0; axis < dim; ++axis) {
                const double a = k.diffusion[static_cast<std::size_t>(axis)](x);
                const double b = k.drift[static_cast<std::size_t>(axis)](x);
                if (!std::isfinite(a) || a < lo || a > hi) {
                    std::ostringstream os;
                    os << "diffusion " << a << " of '" << k.label << "' outside [" << op.ellipticity_lower()
                       << ", " << op.ellipticity_upper() << "]";
                    throw InvalidCoefficients(os.str());
                }
                if (!std::isfinite(b) || std::abs(b) > gmax) {
                    throw InvalidCoefficients("drift of '" + k.label + "' exceeds gamma");
                }
                const double h = grid.spacing(axis);
                const double w = a / (h * h);
                const double back = w + std::max(-b, 0.0) / h;
                const double fwd = w + std::max(b, 0.0) / h;
                diag -= 2.0 * w + std::abs(b) / h;
                const std::size_t idx = axis == 0 ? i : j;
                const std::size_t stride = axis == 0 ? 1 : static_cast<std::size_t>(n);
                // Neighbours on the boundary carry zero Dirichlet data and drop out.
                if (idx > 0) trip.emplace_back(node, node - stride, back);
                if (idx + 1 < static_cast<std::size_t>(n)) trip.emplace_back(node, node + stride, fwd);
            }
            trip.emplace_back(node, node, diag);
        }
        SparseMatrix m(static_cast<Eigen::Index>(size), static_cast<Eigen::Index>(size));
        m.setFromTriplets(trip.begin(), trip.end());
        mats.push_back(std::move(m));
    }
    return DiscreteOperator(grid, op.sense(), std::move(mats), op.gamma(), max_c, op.ellipticity_lower(),
                            op.ellipticity_upper());
}

namespace {

GridFunction random_function(const Grid& grid, std::mt19937_64& rng, double scale) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    GridFunction u(grid);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = dist(rng);
    return u;
}

void record(StructureReport& rep, double& worst, const char* property, const Vector& excess,
            double scale, int trial, double slack) {
    Eigen::Index node = 0;
    const double amount = excess.maxCoeff(&node) / scale;
    worst = std::max(worst, amount);
    if (amount > slack) {
        rep.pass = false;
        rep.violations.push_back({property, amount, static_cast<std::size_t>(node), trial});
    }
}

}  // namespace

StructureReport check_structure(const DiscreteOperator& dop, int trials, std::uint64_t seed, double slack) {
    StructureReport rep;
    rep.monotone_stencil = dop.monotone();
    if (!rep.monotone_stencil) {
        rep.pass = false;
        for (std::size_t k = 0; k < dop.num_controls() && rep.violations.size() < 1; ++k) {
            const auto& m = dop.control(k);
            for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
                for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
                    if (it.col() != r && it.value() < 0.0) {
                        rep.violations.push_back({"monotone stencil", -it.value(), static_cast<std::size_t>(r), -1});
                        break;
                    }
                }
                if (!rep.violations.empty()) break;
            }
        }
    }
    const Grid& grid = dop.grid();
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, grid.size() - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double sgn = dop.sense() == Sense::sup ? 1.0 : -1.0;

    for (int trial = 0; trial < trials; ++trial) {
        const GridFunction u = random_function(grid, rng, 1.0);
        const GridFunction v = random_function(grid, rng, 1.0);
        const GridFunction Fu = dop.apply(u);
        const GridFunction Fv = dop.apply(v);
        const double scale = 1.0 + dop.operator_norm();

        for (double t : {0.0, 0.5, 1.0, 2.5, 7.0}) {
            const Vector diff = (dop.apply(t * u).values() - t * Fu.values()).cwiseAbs();
            record(rep, rep.worst_homogeneity, "homogeneity", diff, scale * std::max(1.0, t), trial, slack);
        }
        {
            const Vector excess = sgn * (dop.apply(u + v).values() - Fu.values() - Fv.values());
            record(rep, rep.worst_subadditivity, sgn > 0 ? "subadditivity" : "superadditivity", excess,
                   2.0 * scale, trial, slack);
        }
        {
            const Vector diffF = Fu.values() - Fv.values();
            const Vector upper = dop.apply(u - v).values();
            const Vector lower = -dop.apply(v - u).values();
            // sup sense: lower <= F[u]-F[v] <= upper; inf sense: upper <= F[u]-F[v] <= lower.
            const Vector e1 = sgn * (diffF - upper);
            const Vector e2 = sgn * (lower - diffF);
            record(rep, rep.worst_sandwich, "sandwich", e1.cwiseMax(e2), 2.0 * scale, trial, slack);
        }
        {
            // Raising u at one node must not decrease F at any other node.
            const std::size_t j = pick(rng);
            GridFunction bumped = u;
            bumped[j] += 0.5 + unit(rng);
            Vector drop = Fu.values() - dop.apply(bumped).values();
            drop[static_cast<Eigen::Index>(j)] = 0.0;
            record(rep, rep.worst_ellipticity, "ellipticity", drop, scale, trial, slack);
        }
    }
    return rep;
}

}  // namespace hjb
