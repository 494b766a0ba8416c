#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <functional>
#include <string>

namespace hjb {

using Vector = Eigen::VectorXd;
using Point = std::array<double, 2>;

/// An interval (0, L) or a rectangle (0, Lx) x (0, Ly).
class Domain {
public:
    enum class Kind { interval, rectangle };

    static Domain interval(double length);
    static Domain rectangle(double lx, double ly);

    Kind kind() const { return kind_; }
    int dimension() const { return kind_ == Kind::interval ? 1 : 2; }
    /// Side length along `axis` (0 or 1).
    double length(int axis = 0) const { return lengths_[static_cast<std::size_t>(axis)]; }
    double measure() const;
    const std::string& description() const { return description_; }

    bool operator==(const Domain& other) const {
        return kind_ == other.kind_ && lengths_ == other.lengths_;
    }

private:
    Domain(Kind kind, std::array<double, 2> lengths, std::string description);

    Kind kind_;
    std::array<double, 2> lengths_;
    std::string description_;
};

/// Uniform grid with `n` interior nodes per axis and implicit zero Dirichlet
/// boundary. In 2D nodes are numbered row-major: index = j * n + i with i the
/// x-index.
class Grid {
public:
    Grid(Domain domain, int n);

    const Domain& domain() const { return domain_; }
    int dimension() const { return domain_.dimension(); }
    int n() const { return n_; }
    double spacing(int axis = 0) const { return h_[static_cast<std::size_t>(axis)]; }
    /// Number of interior nodes (n or n^2).
    std::size_t size() const { return size_; }
    /// Quadrature weight attached to each interior node (h or hx*hy).
    double cell_volume() const;

    Point coordinates(std::size_t node) const;
    double distance_to_boundary(std::size_t node) const;
    /// True when some stencil neighbour of `node` lies on the boundary.
    bool is_boundary_adjacent(std::size_t node) const;

    bool operator==(const Grid& other) const {
        return n_ == other.n_ && domain_ == other.domain_;
    }
    bool operator!=(const Grid& other) const { return !(*this == other); }

private:
    Domain domain_;
    int n_;
    std::array<double, 2> h_;
    std::size_t size_;
};

/// Nodal values on the interior of a grid; boundary values are identically 0.
class GridFunction {
public:
    explicit GridFunction(const Grid& grid);
    GridFunction(const Grid& grid, Vector values);

    static GridFunction constant(const Grid& grid, double value);
    static GridFunction sample(const Grid& grid, const std::function<double(const Point&)>& fn);

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
    const Vector& values() const { return values_; }
    Vector& values() { return values_; }
    double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }
    double& operator[](std::size_t i) { return values_[static_cast<Eigen::Index>(i)]; }

    double min() const { return values_.minCoeff(); }
    double max() const { return values_.maxCoeff(); }
    bool all_finite() const { return values_.allFinite(); }

    GridFunction& operator+=(const GridFunction& other);
    GridFunction& operator-=(const GridFunction& other);
    GridFunction& operator*=(double s);

    friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
    friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
    friend GridFunction operator*(double s, GridFunction a) { return a *= s; }
    friend GridFunction operator*(GridFunction a, double s) { return a *= s; }
    friend GridFunction operator-(GridFunction a) { return a *= -1.0; }

    /// Node-wise product.
    GridFunction cwise_product(const GridFunction& other) const;

private:
    Grid grid_;
    Vector values_;
};

enum class NormKind { sup, L2 };

/// Trapezoid-consistent quadrature over the domain (boundary terms vanish).
double integrate(const GridFunction& u);
double norm(const GridFunction& u, NormKind kind);
/// Discrete L2 inner product, consistent with integrate().
double inner(const GridFunction& u, const GridFunction& v);
/// Minimum over boundary-adjacent nodes of u / dist(node, boundary).
double boundary_slope_margin(const GridFunction& u);

void require_same_grid(const Grid& a, const Grid& b, const char* context);

}  // namespace hjb
