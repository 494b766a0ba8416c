#include "hjbcli/scenario.hpp"

#include "hjb/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace hjbcli {

using hjb::ConfigError;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(trim(cur));
    return out;
}

std::vector<std::string> words(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string w;
    while (is >> w) out.push_back(w);
    return out;
}

double to_double(const std::string& v, const std::string& key) {
    if (v == "inf" || v == "+inf") return std::numeric_limits<double>::infinity();
    if (v == "-inf") return -std::numeric_limits<double>::infinity();
    double out = 0.0;
    const char* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || p != end) throw ConfigError(key + ": '" + v + "' is not a number");
    return out;
}

long long to_int(const std::string& v, const std::string& key) {
    long long out = 0;
    const char* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || p != end) throw ConfigError(key + ": '" + v + "' is not an integer");
    return out;
}

std::vector<double> to_list(const std::string& v, const std::string& key) {
    std::vector<double> out;
    for (const auto& w : words(v)) out.push_back(to_double(w, key));
    return out;
}

std::string join(const std::vector<double>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? " " : "") + format_double(xs[i]);
    return out;
}

bool starts_with(const std::string& s, const std::string& p) { return s.rfind(p, 0) == 0; }

std::size_t indexed(const std::string& key, const std::string& prefix) {
    const long long k = to_int(key.substr(prefix.size()), key);
    if (k < 0 || k > 1000) throw ConfigError(key + ": index out of range");
    return static_cast<std::size_t>(k);
}

void positive(double v, const std::string& key) {
    if (!(v > 0.0)) throw ConfigError(key + ": must be positive");
}

hjb::Piece parse_piece(const std::string& text, const std::string& key) {
    const auto parts = split(text, '|');
    if (parts.size() != 2) throw ConfigError(key + ": expected 'lo hi | terms'");
    const auto range = words(parts[0]);
    if (range.size() != 2) throw ConfigError(key + ": expected two range bounds");
    hjb::Piece piece{to_double(range[0], key), to_double(range[1], key), {}};
    for (const auto& term : split(parts[1], ';')) {
        if (term.empty()) continue;
        const auto w = words(term);
        if (w.size() != 3 || (w[2] != "odd" && w[2] != "even")) {
            throw ConfigError(key + ": term '" + term + "' must be 'coeff power odd|even'");
        }
        piece.terms.push_back({to_double(w[0], key), to_double(w[1], key), w[2] == "odd"});
    }
    return piece;
}

void validate(const Scenario& s, const std::string& source) {
    if (s.op_tag.empty()) throw ConfigError(source + ": operator.tag: missing");
    if (s.domain_kind != "interval" && s.domain_kind != "rectangle") {
        throw ConfigError("domain.kind: unknown kind '" + s.domain_kind + "'");
    }
    positive(s.length, "domain.length");
    positive(s.length_y, "domain.length_y");
    if (s.n < 3) throw ConfigError("grid.n: needs at least 3 interior nodes");
    positive(s.rtol, "solver.rtol");
    positive(s.tstar_width, "tstar.width");
    positive(s.initial_step, "continuation.initial_step");
    positive(s.min_step, "continuation.min_step");
    positive(s.max_step, "continuation.max_step");
    positive(s.max_norm, "continuation.max_norm");
    positive(s.seed_distance, "continuation.seed_distance");
    if (s.max_newton_iters <= 0) throw ConfigError("solver.max_newton_iters: must be positive");
    if (s.max_policy_iters <= 0) throw ConfigError("solver.max_policy_iters: must be positive");
    if (s.max_points <= 0) throw ConfigError("continuation.max_points: must be positive");
    static const std::vector<std::string> tags{"laplacian", "barenblatt", "pucci_plus", "pucci_minus", "fucik",
                                               "controls"};
    if (std::find(tags.begin(), tags.end(), s.op_tag) == tags.end()) {
        throw ConfigError("operator.tag: unknown operator '" + s.op_tag + "'");
    }
    if (s.nonlin != "piecewise") {
        const auto names = hjb::builtin_names();
        if (std::find(names.begin(), names.end(), s.nonlin) == names.end()) {
            throw ConfigError("nonlinearity.name: unknown builtin '" + s.nonlin + "'");
        }
    } else if (s.pieces.empty()) {
        throw ConfigError("nonlinearity.piece.0: piecewise nonlinearity without pieces");
    }
    for (std::size_t k = 0; k < s.pieces.size(); ++k) parse_piece(s.pieces[k], "nonlinearity.piece." + std::to_string(k));
    for (std::size_t k = 0; k < s.controls.size(); ++k) {
        if (s.controls[k].size() != 5) {
            throw ConfigError("operator.control." + std::to_string(k) + ": expected 5 numbers a0 a1 b0 b1 c");
        }
    }
}

}  // namespace

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

Scenario parse_scenario(const std::string& text, const std::string& source) {
    Scenario s;
    std::map<std::size_t, std::vector<double>> controls;
    std::map<std::size_t, std::string> pieces;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string v = trim(line.substr(eq + 1));
        if (key == "name") s.name = v;
        else if (key == "domain.kind") s.domain_kind = v;
        else if (key == "domain.length") s.length = to_double(v, key);
        else if (key == "domain.length_y") s.length_y = to_double(v, key);
        else if (key == "grid.n") s.n = static_cast<int>(to_int(v, key));
        else if (key == "operator.tag") s.op_tag = v;
        else if (starts_with(key, "operator.control.")) controls[indexed(key, "operator.control.")] = to_list(v, key);
        else if (key == "operator.a" || key == "operator.b" || key == "operator.lower" || key == "operator.upper" ||
                 key == "operator.gamma") s.op_params[key.substr(9)] = to_double(v, key);
        else if (key == "nonlinearity.name") s.nonlin = v;
        else if (starts_with(key, "nonlinearity.param.")) s.nonlin_params[key.substr(19)] = to_double(v, key);
        else if (starts_with(key, "nonlinearity.fn.")) s.nonlin_functions[key.substr(16)] = v;
        else if (starts_with(key, "nonlinearity.piece.")) pieces[indexed(key, "nonlinearity.piece.")] = v;
        else if (key == "lambda.value") s.lambda = to_double(v, key);
        else if (key == "lambda.min") s.lambda_min = to_double(v, key);
        else if (key == "lambda.max") s.lambda_max = to_double(v, key);
        else if (key == "lambda.samples") s.lambda_samples = to_list(v, key);
        else if (key == "tstar.d") s.tstar_d = v;
        else if (key == "tstar.width") s.tstar_width = to_double(v, key);
        else if (key == "solve.start") s.solve_start = v;
        else if (key == "solver.rtol") s.rtol = to_double(v, key);
        else if (key == "solver.max_newton_iters") s.max_newton_iters = static_cast<int>(to_int(v, key));
        else if (key == "solver.max_policy_iters") s.max_policy_iters = static_cast<int>(to_int(v, key));
        else if (key == "continuation.initial_step") s.initial_step = to_double(v, key);
        else if (key == "continuation.min_step") s.min_step = to_double(v, key);
        else if (key == "continuation.max_step") s.max_step = to_double(v, key);
        else if (key == "continuation.max_points") s.max_points = static_cast<int>(to_int(v, key));
        else if (key == "continuation.max_norm") s.max_norm = to_double(v, key);
        else if (key == "continuation.seed_distance") s.seed_distance = to_double(v, key);
        else if (key == "seed") s.seed = static_cast<std::uint64_t>(to_int(v, key));
        else if (key == "output.dir") s.output_dir = v;
        else throw ConfigError(source + ":" + std::to_string(lineno) + ": " + key + ": unknown key");
    }
    for (const auto& [k, c] : controls) {
        if (k != s.controls.size()) throw ConfigError("operator.control." + std::to_string(s.controls.size()) + ": missing");
        s.controls.push_back(c);
    }
    for (const auto& [k, p] : pieces) {
        if (k != s.pieces.size()) throw ConfigError("nonlinearity.piece." + std::to_string(s.pieces.size()) + ": missing");
        s.pieces.push_back(p);
    }
    validate(s, source);
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot read scenario file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), path);
}

std::map<std::string, std::string> flatten(const Scenario& s) {
    std::map<std::string, std::string> m;
    if (!s.name.empty()) m["name"] = s.name;
    m["domain.kind"] = s.domain_kind;
    m["domain.length"] = format_double(s.length);
    m["domain.length_y"] = format_double(s.length_y);
    m["grid.n"] = std::to_string(s.n);
    m["operator.tag"] = s.op_tag;
    for (const auto& [k, v] : s.op_params) m["operator." + k] = format_double(v);
    for (std::size_t k = 0; k < s.controls.size(); ++k) m["operator.control." + std::to_string(k)] = join(s.controls[k]);
    m["nonlinearity.name"] = s.nonlin;
    for (const auto& [k, v] : s.nonlin_params) m["nonlinearity.param." + k] = format_double(v);
    for (const auto& [k, v] : s.nonlin_functions) m["nonlinearity.fn." + k] = v;
    for (std::size_t k = 0; k < s.pieces.size(); ++k) m["nonlinearity.piece." + std::to_string(k)] = s.pieces[k];
    if (s.lambda) m["lambda.value"] = format_double(*s.lambda);
    if (s.lambda_min) m["lambda.min"] = format_double(*s.lambda_min);
    if (s.lambda_max) m["lambda.max"] = format_double(*s.lambda_max);
    if (!s.lambda_samples.empty()) m["lambda.samples"] = join(s.lambda_samples);
    if (!s.tstar_d.empty()) m["tstar.d"] = s.tstar_d;
    m["tstar.width"] = format_double(s.tstar_width);
    if (!s.solve_start.empty()) m["solve.start"] = s.solve_start;
    m["solver.rtol"] = format_double(s.rtol);
    m["solver.max_newton_iters"] = std::to_string(s.max_newton_iters);
    m["solver.max_policy_iters"] = std::to_string(s.max_policy_iters);
    m["continuation.initial_step"] = format_double(s.initial_step);
    m["continuation.min_step"] = format_double(s.min_step);
    m["continuation.max_step"] = format_double(s.max_step);
    m["continuation.max_points"] = std::to_string(s.max_points);
    m["continuation.max_norm"] = format_double(s.max_norm);
    m["continuation.seed_distance"] = format_double(s.seed_distance);
    m["seed"] = std::to_string(s.seed);
    if (!s.output_dir.empty()) m["output.dir"] = s.output_dir;
    return m;
}

std::string serialize(const Scenario& s) {
    std::string out;
    for (const auto& [k, v] : flatten(s)) out += k + " = " + v + "\n";
    return out;
}

hjb::Domain make_domain(const Scenario& s) {
    return s.domain_kind == "interval" ? hjb::Domain::interval(s.length) : hjb::Domain::rectangle(s.length, s.length_y);
}

hjb::Grid make_grid(const Scenario& s) { return hjb::Grid(make_domain(s), s.n); }

namespace {

double param(const Scenario& s, const std::string& k, double fallback) {
    const auto it = s.op_params.find(k);
    return it == s.op_params.end() ? fallback : it->second;
}

}  // namespace

hjb::HJBOperator make_operator(const Scenario& s) {
    using hjb::HJBOperator;
    if (s.op_tag == "laplacian") return HJBOperator::laplacian();
    if (s.op_tag == "barenblatt") return HJBOperator::barenblatt(param(s, "a", 1.0), param(s, "b", 2.0));
    if (s.op_tag == "pucci_plus") return HJBOperator::pucci_plus(param(s, "lower", 1.0), param(s, "upper", 2.0));
    if (s.op_tag == "pucci_minus") return HJBOperator::pucci_minus(param(s, "lower", 1.0), param(s, "upper", 2.0));
    if (s.op_tag == "fucik") return HJBOperator::fucik(param(s, "a", 0.0), param(s, "b", 1.0));
    if (s.controls.empty()) throw ConfigError("operator.control.0: controls operator without controls");
    std::vector<hjb::ControlCoeffs> cs;
    for (std::size_t k = 0; k < s.controls.size(); ++k) {
        const auto& c = s.controls[k];
        cs.push_back(hjb::ControlCoeffs::constant(c[0], c[1], c[2], c[3], c[4], "control " + std::to_string(k)));
    }
    return HJBOperator::from_controls(std::move(cs), param(s, "lower", 1.0), param(s, "upper", 1.0),
                                      param(s, "gamma", 0.0));
}

hjb::GridFunction eval_function(const std::string& expr, const hjb::Grid& grid, const std::string& key) {
    struct Term {
        std::string kind;
        std::vector<double> args;
    };
    std::vector<Term> terms;
    for (const auto& w : words(expr)) {
        const auto colon = w.find(':');
        if (colon == std::string::npos) throw ConfigError(key + ": term '" + w + "' lacks 'kind:args'");
        Term t{w.substr(0, colon), {}};
        const std::string rest = w.substr(colon + 1);
        for (const auto& a : split(rest, t.kind == "poly" ? ',' : ':')) t.args.push_back(to_double(a, key));
        const std::size_t need = t.kind == "const" ? 1 : (t.kind == "poly" ? t.args.size() : 2);
        if ((t.kind != "const" && t.kind != "sin" && t.kind != "cos" && t.kind != "exp" && t.kind != "poly") ||
            t.args.size() != need || t.args.empty()) {
            throw ConfigError(key + ": malformed term '" + w + "'");
        }
        terms.push_back(std::move(t));
    }
    if (terms.empty()) throw ConfigError(key + ": empty function");
    const double lx = grid.domain().length(0);
    const double ly = grid.dimension() == 2 ? grid.domain().length(1) : 1.0;
    const bool two = grid.dimension() == 2;
    const double pi = std::numbers::pi;
    return hjb::GridFunction::sample(grid, [&](const hjb::Point& p) {
        double v = 0.0;
        for (const auto& t : terms) {
            if (t.kind == "const") {
                v += t.args[0];
            } else if (t.kind == "sin") {
                v += t.args[1] * std::sin(t.args[0] * pi * p[0] / lx) * (two ? std::sin(t.args[0] * pi * p[1] / ly) : 1.0);
            } else if (t.kind == "cos") {
                v += t.args[1] * std::cos(t.args[0] * pi * p[0] / lx) * (two ? std::cos(t.args[0] * pi * p[1] / ly) : 1.0);
            } else if (t.kind == "exp") {
                v += t.args[1] * std::exp(t.args[0] * p[0]);
            } else {
                double xp = 1.0;
                for (double c : t.args) {
                    v += c * xp;
                    xp *= p[0];
                }
            }
        }
        return v;
    });
}

hjb::Nonlinearity make_nonlinearity(const Scenario& s, const hjb::Grid& grid,
                                    const std::optional<hjb::GridFunction>& phi_plus) {
    hjb::FunctionParams fns;
    for (const auto& [k, v] : s.nonlin_functions) fns.emplace(k, eval_function(v, grid, "nonlinearity.fn." + k));
    if (s.nonlin == "piecewise") {
        std::vector<hjb::Piece> pieces;
        for (std::size_t k = 0; k < s.pieces.size(); ++k) {
            pieces.push_back(parse_piece(s.pieces[k], "nonlinearity.piece." + std::to_string(k)));
        }
        const auto h = fns.count("h") ? fns.at("h") : hjb::GridFunction(grid);
        return hjb::piecewise_power("piecewise", std::move(pieces), h);
    }
    if (phi_plus) fns.emplace("phi_plus", *phi_plus);
    try {
        return hjb::builtin(s.nonlin, s.nonlin_params, grid, fns);
    } catch (const hjb::InvalidParams& e) {
        throw ConfigError(std::string("nonlinearity: ") + e.what());
    }
}

}  // namespace hjbcli
