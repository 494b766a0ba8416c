#include "hjb/grid.hpp"

#include "hjb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hjb {

Domain::Domain(Kind kind, std::array<double, 2> lengths, std::string description)
    : kind_(kind), lengths_(lengths), description_(std::move(description)) {}

Domain Domain::interval(double length) {
    if (!(length > 0.0) || !std::isfinite(length)) {
        throw InvalidDomain("interval length must be positive, got " + std::to_string(length));
    }
    std::ostringstream os;
    os << "interval(0, " << length << ")";
    return Domain(Kind::interval, {length, 0.0}, os.str());
}

Domain Domain::rectangle(double lx, double ly) {
    if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly)) {
        throw InvalidDomain("rectangle sides must be positive");
    }
    std::ostringstream os;
    os << "rectangle(0, " << lx << ") x (0, " << ly << ")";
    return Domain(Kind::rectangle, {lx, ly}, os.str());
}

double Domain::measure() const {
    return kind_ == Kind::interval ? lengths_[0] : lengths_[0] * lengths_[1];
}

Grid::Grid(Domain domain, int n) : domain_(std::move(domain)), n_(n), h_{0.0, 0.0} {
    if (n < 3) {
        throw InvalidDomain("grid needs at least 3 interior nodes per axis, got " + std::to_string(n));
    }
    h_[0] = domain_.length(0) / (n + 1);
    if (domain_.dimension() == 2) {
        h_[1] = domain_.length(1) / (n + 1);
        size_ = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
    } else {
        size_ = static_cast<std::size_t>(n);
    }
}

double Grid::cell_volume() const { return dimension() == 1 ? h_[0] : h_[0] * h_[1]; }

Point Grid::coordinates(std::size_t node) const {
    if (dimension() == 1) return {h_[0] * static_cast<double>(node + 1), 0.0};
    const std::size_t n = static_cast<std::size_t>(n_);
    const std::size_t i = node % n;
    const std::size_t j = node / n;
    return {h_[0] * static_cast<double>(i + 1), h_[1] * static_cast<double>(j + 1)};
}

double Grid::distance_to_boundary(std::size_t node) const {
    const Point p = coordinates(node);
    double d = std::min(p[0], domain_.length(0) - p[0]);
    if (dimension() == 2) d = std::min({d, p[1], domain_.length(1) - p[1]});
    return d;
}

bool Grid::is_boundary_adjacent(std::size_t node) const {
    const std::size_t n = static_cast<std::size_t>(n_);
    if (dimension() == 1) return node == 0 || node + 1 == n;
    const std::size_t i = node % n;
    const std::size_t j = node / n;
    return i == 0 || j == 0 || i + 1 == n || j + 1 == n;
}

GridFunction::GridFunction(const Grid& grid)
    : grid_(grid), values_(Vector::Zero(static_cast<Eigen::Index>(grid.size()))) {}

GridFunction::GridFunction(const Grid& grid, Vector values) : grid_(grid), values_(std::move(values)) {
    if (static_cast<std::size_t>(values_.size()) != grid_.size()) {
        throw GridMismatch("value array has " + std::to_string(values_.size()) + " entries, grid has " +
                           std::to_string(grid_.size()) + " interior nodes");
    }
}

GridFunction GridFunction::constant(const Grid& grid, double value) {
    return GridFunction(grid, Vector::Constant(static_cast<Eigen::Index>(grid.size()), value));
}

GridFunction GridFunction::sample(const Grid& grid, const std::function<double(const Point&)>& fn) {
    GridFunction u(grid);
    for (std::size_t k = 0; k < grid.size(); ++k) u[k] = fn(grid.coordinates(k));
    return u;
}

GridFunction& GridFunction::operator+=(const GridFunction& other) {
    require_same_grid(grid_, other.grid_, "GridFunction +=");
    values_ += other.values_;
    return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& other) {
    require_same_grid(grid_, other.grid_, "GridFunction -=");
    values_ -= other.values_;
    return *this;
}

GridFunction& GridFunction::operator*=(double s) {
    values_ *= s;
    return *this;
}

GridFunction GridFunction::cwise_product(const GridFunction& other) const {
    require_same_grid(grid_, other.grid_, "GridFunction::cwise_product");
    return GridFunction(grid_, values_.cwiseProduct(other.values_));
}

double integrate(const GridFunction& u) { return u.grid().cell_volume() * u.values().sum(); }

double norm(const GridFunction& u, NormKind kind) {
    if (u.size() == 0) return 0.0;
    if (kind == NormKind::sup) return u.values().cwiseAbs().maxCoeff();
    return std::sqrt(u.grid().cell_volume() * u.values().squaredNorm());
}

double inner(const GridFunction& u, const GridFunction& v) {
    require_same_grid(u.grid(), v.grid(), "inner");
    return u.grid().cell_volume() * u.values().dot(v.values());
}

double boundary_slope_margin(const GridFunction& u) {
    const Grid& g = u.grid();
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!g.is_boundary_adjacent(k)) continue;
        margin = std::min(margin, u[k] / g.distance_to_boundary(k));
    }
    return margin;
}

void require_same_grid(const Grid& a, const Grid& b, const char* context) {
    if (a != b) throw GridMismatch(std::string(context) + ": grid functions live on different grids");
}

}  // namespace hjb
