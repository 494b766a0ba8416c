#pragma once

#include "hjb/grid.hpp"
#include "hjb/nonlin.hpp"
#include "hjb/operator.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hjbcli {

/// Scenario file: one `key = value` per line, dotted keys, `#` starts a comment.
///
///   domain.kind = interval | rectangle      domain.length, domain.length_y
///   grid.n
///   operator.tag = laplacian | barenblatt | pucci_plus | pucci_minus | fucik | controls
///   operator.a, operator.b                  barenblatt diffusions / fucik coefficients
///   operator.lower, operator.upper          pucci ellipticity; also bounds for controls
///   operator.gamma                          bound on drift and zeroth order (controls)
///   operator.control.K = a0 a1 b0 b1 c      constant coefficients of control K
///   nonlinearity.name                       builtin name or `piecewise`
///   nonlinearity.param.KEY                  builtin parameter
///   nonlinearity.fn.NAME                    function argument (h, g)
///   nonlinearity.piece.K = lo hi | c p odd ; c p even
///   lambda.value, lambda.min, lambda.max, lambda.samples = l1 l2 ...
///   tstar.d, tstar.width
///   solve.start
///   solver.rtol, solver.max_newton_iters, solver.max_policy_iters
///   continuation.initial_step, .min_step, .max_step, .max_points, .max_norm, .seed_distance
///   seed, output.dir
///
/// Functions of x are sums of space-separated terms: `const:C`, `sin:K:A`, `cos:K:A`,
/// `exp:K:A` (A e^{K x}) and `poly:c0,c1,...`. In 2D sin and cos are tensor products.
struct Scenario {
    std::string name;
    std::string domain_kind = "interval";
    double length = 1.0;
    double length_y = 1.0;
    int n = 200;

    std::string op_tag;
    std::map<std::string, double> op_params;
    std::vector<std::vector<double>> controls;

    std::string nonlin = "zero";
    std::map<std::string, double> nonlin_params;
    std::map<std::string, std::string> nonlin_functions;
    std::vector<std::string> pieces;

    std::optional<double> lambda;
    std::optional<double> lambda_min;
    std::optional<double> lambda_max;
    std::vector<double> lambda_samples;

    std::string tstar_d;
    double tstar_width = 1e-3;
    std::string solve_start;

    double rtol = 1e-10;
    int max_newton_iters = 100;
    int max_policy_iters = 200;

    double initial_step = 0.05;
    double min_step = 1e-8;
    double max_step = 0.5;
    int max_points = 2000;
    double max_norm = 1e6;
    double seed_distance = 0.05;

    std::uint64_t seed = 0;
    std::string output_dir;

    bool operator==(const Scenario&) const = default;
};

/// Throws hjb::ConfigError naming the offending key.
Scenario parse_scenario(const std::string& text, const std::string& source = "<string>");
Scenario load_scenario(const std::string& path);
/// Canonical text; parse_scenario(serialize(s)) == s.
std::string serialize(const Scenario& s);
/// The resolved configuration as ordered key/value pairs.
std::map<std::string, std::string> flatten(const Scenario& s);

hjb::Domain make_domain(const Scenario& s);
hjb::Grid make_grid(const Scenario& s);
hjb::HJBOperator make_operator(const Scenario& s);
hjb::GridFunction eval_function(const std::string& expr, const hjb::Grid& grid, const std::string& key);
/// `phi_plus` is supplied to builtins that need it (example1).
hjb::Nonlinearity make_nonlinearity(const Scenario& s, const hjb::Grid& grid,
                                    const std::optional<hjb::GridFunction>& phi_plus = std::nullopt);

std::string format_double(double v);

}  // namespace hjbcli
