#include "hjbcli/app.hpp"

#include "hjb/branch.hpp"
#include "hjb/eigen.hpp"
#include "hjb/errors.hpp"
#include "hjb/oracle.hpp"
#include "hjb/probe.hpp"
#include "hjb/tstar.hpp"
#include "hjbcli/output.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <future>
#include <iostream>
#include <random>

namespace hjbcli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct Context {
    Scenario scenario;
    hjb::Grid grid;
    hjb::DiscreteOperator dop;
    hjb::HJBOperator op;
    hjb::Spectrum spectrum;
    hjb::SolverOptions solver;
    fs::path out;
    int threads = 1;
    double budget = 1.0;
};

hjb::SolverOptions solver_options(const Scenario& s) {
    hjb::SolverOptions o;
    o.rtol = s.rtol;
    o.max_newton_iters = s.max_newton_iters;
    o.max_policy_iters = s.max_policy_iters;
    return o;
}

Context make_context(Scenario s, const RunFlags& flags) {
    if (flags.seed) s.seed = *flags.seed;
    if (!(flags.tol_scale > 0.0)) throw hjb::ConfigError("--tol-scale: must be positive");
    if (!(flags.budget_scale > 0.0)) throw hjb::ConfigError("--budget-scale: must be positive");
    if (flags.threads < 1) throw hjb::ConfigError("--threads: must be at least 1");
    s.rtol *= flags.tol_scale;
    s.tstar_width *= flags.tol_scale;
    s.max_newton_iters = std::max(1, static_cast<int>(std::lround(s.max_newton_iters * flags.budget_scale)));
    s.max_policy_iters = std::max(1, static_cast<int>(std::lround(s.max_policy_iters * flags.budget_scale)));
    s.max_points = std::max(1, static_cast<int>(std::lround(s.max_points * flags.budget_scale)));
    hjb::Grid grid = make_grid(s);
    hjb::HJBOperator op = make_operator(s);
    hjb::DiscreteOperator dop = hjb::discretize(op, grid);
    const hjb::SolverOptions solver = solver_options(s);
    hjb::EigenOptions eo;
    eo.solver = solver;
    hjb::Spectrum spectrum = hjb::principal_spectrum(dop, eo);
    fs::path out = flags.out ? fs::path(*flags.out) : fs::path(s.output_dir.empty() ? "hjb_out" : s.output_dir);
    fs::create_directories(out);
    return Context{std::move(s), grid, std::move(dop), std::move(op), std::move(spectrum), solver, out,
                   flags.threads, flags.budget_scale};
}

double lp(const Context& c) { return c.spectrum.plus.value; }
double lm(const Context& c) { return c.spectrum.minus.value; }

hjb::StepControl step_control(const Context& c, double lo, double hi) {
    hjb::StepControl ctrl;
    ctrl.initial_step = c.scenario.initial_step;
    ctrl.min_step = c.scenario.min_step;
    ctrl.max_step = c.scenario.max_step;
    ctrl.max_points = c.scenario.max_points;
    ctrl.max_norm = c.scenario.max_norm;
    ctrl.lambda_min = lo;
    ctrl.lambda_max = hi;
    ctrl.solver = c.solver;
    return ctrl;
}

hjb::TStarOptions tstar_options(const Context& c) {
    hjb::TStarOptions o;
    o.width = c.scenario.tstar_width;
    o.solver = c.solver;
    return o;
}

// Fills in the example1 resonant value t*_+(h) when the scenario leaves it open.
void resolve_nonlinearity(Context& c) {
    Scenario& s = c.scenario;
    if (s.nonlin != "example1" || s.nonlin_params.count("t_star")) return;
    const auto it = s.nonlin_functions.find("h");
    if (it == s.nonlin_functions.end()) throw hjb::ConfigError("nonlinearity.fn.h: missing (required by example1)");
    const hjb::GridFunction h = eval_function(it->second, c.grid, "nonlinearity.fn.h");
    s.nonlin_params["t_star"] = hjb::tstar_resonant(c.dop, c.spectrum, hjb::HalfSign::plus, h, tstar_options(c)).value;
}

hjb::Nonlinearity nonlinearity(Context& c) {
    resolve_nonlinearity(c);
    return make_nonlinearity(c.scenario, c.grid, c.spectrum.plus.efun);
}

json pair_json(const hjb::EigenPair& p) {
    return {{"value", p.value}, {"residual_sup", p.residual_sup}, {"iterations", p.iterations}};
}

void write_report(const Context& c, const std::string& subcommand, int code, json results) {
    json report;
    report["subcommand"] = subcommand;
    report["exit_code"] = code;
    json cfg = json::object();
    for (const auto& [k, v] : flatten(c.scenario)) cfg[k] = v;
    report["config"] = std::move(cfg);
    report["results"] = std::move(results);
    write_atomic(c.out / "report.json", report.dump(2) + "\n");
}

// ---------------------------------------------------------------- eigen

int cmd_eigen(Context& c, json& res, std::ostream& out) {
    res["plus"] = pair_json(c.spectrum.plus);
    res["minus"] = pair_json(c.spectrum.minus);
    res["gap"] = lm(c) - lp(c);
    write_atomic(c.out / "eigenfunctions.csv",
                 nodal_csv(c.grid, {"phi_plus", "phi_minus"}, {&c.spectrum.plus.efun, &c.spectrum.minus.efun}));
    out << "lambda_1^+ = " << format_double(lp(c)) << "  residual " << c.spectrum.plus.residual_sup << "\n";
    out << "lambda_1^- = " << format_double(lm(c)) << "  residual " << c.spectrum.minus.residual_sup << "\n";
    return exit_ok;
}

// ---------------------------------------------------------------- solve

int cmd_solve(Context& c, json& res, std::ostream& out) {
    if (!c.scenario.lambda) throw hjb::ConfigError("lambda.value: missing (required by solve)");
    const double lambda = *c.scenario.lambda;
    const hjb::Nonlinearity f = nonlinearity(c);
    const hjb::GridFunction start = c.scenario.solve_start.empty()
                                        ? hjb::GridFunction(c.grid)
                                        : eval_function(c.scenario.solve_start, c.grid, "solve.start");
    const hjb::SolveReport rep = hjb::newton_solve(c.dop, lambda, f, start, c.solver);
    res["lambda"] = lambda;
    res["status"] = hjb::to_string(rep.status);
    res["residual_sup"] = rep.residual_sup;
    res["tolerance"] = rep.tolerance;
    res["iterations"] = rep.iters;
    res["residual_history"] = rep.residual_history;
    res["sup_norm"] = hjb::norm(rep.u, hjb::NormKind::sup);
    res["sign_class"] = hjb::to_string(hjb::classify_sign(rep.u));
    out << "solve at lambda = " << format_double(lambda) << ": " << hjb::to_string(rep.status) << ", residual "
        << rep.residual_sup << " after " << rep.iters << " iterations\n";
    if (!rep.converged()) return exit_nonconvergence;
    write_atomic(c.out / "solution.csv", nodal_csv(c.grid, {"u"}, {&rep.u}));
    return exit_ok;
}

// ---------------------------------------------------------------- tstar

int cmd_tstar(Context& c, json& res, std::ostream& out, std::ostream& err) {
    if (c.scenario.tstar_d.empty()) throw hjb::ConfigError("tstar.d: missing (required by tstar)");
    const hjb::GridFunction d = eval_function(c.scenario.tstar_d, c.grid, "tstar.d");
    const hjb::Decomposition dec = hjb::decompose(d, c.spectrum.plus.efun);
    res["projection"] = dec.coeff;
    res["perp_sup"] = hjb::norm(dec.perp, hjb::NormKind::sup);
    std::vector<double> lams;
    if (c.scenario.lambda) {
        lams.push_back(*c.scenario.lambda);
    } else {
        lams = {lp(c), 0.5 * (lp(c) + lm(c)), lm(c)};
    }
    int code = exit_ok;
    json entries = json::array();
    for (double lam : lams) {
        json e{{"lambda", lam}};
        try {
            const hjb::TStarResult r = hjb::tstar_at(c.dop, c.spectrum, lam, d, tstar_options(c));
            e["value"] = r.value;
            e["bracket"] = {r.bracket.first, r.bracket.second};
            e["method"] = hjb::to_string(r.method);
            e["evaluations"] = r.evaluations;
            out << "t*(" << format_double(lam) << ") = " << format_double(r.value) << " in ["
                << format_double(r.bracket.first) << ", " << format_double(r.bracket.second) << "] ("
                << hjb::to_string(r.method) << ")\n";
        } catch (const hjb::InvalidParams&) {
            throw;
        } catch (const hjb::Error& ex) {
            e["error"] = ex.what();
            err << "t* at lambda = " << format_double(lam) << ": " << ex.what() << "\n";
            code = exit_nonconvergence;
        }
        entries.push_back(std::move(e));
    }
    res["tstar"] = std::move(entries);
    return code;
}

// ---------------------------------------------------------------- branch

struct SeedJob {
    hjb::HalfSign sign;
    hjb::SeedSide side;
};

struct SeedOutcome {
    std::optional<hjb::Branch> branch;
    std::string note;
};

// Branch through a seed near lambda_1^sign: traced toward the eigenvalue and away from it,
// then joined into one polyline ordered from the eigenvalue outward.
SeedOutcome trace_seed(const Context& c, const hjb::Nonlinearity& f, SeedJob job, double lo, double hi) {
    const hjb::EigenPair& pair = job.sign == hjb::HalfSign::plus ? c.spectrum.plus : c.spectrum.minus;
    const std::string tag = std::string(hjb::to_string(job.sign)) + (job.side == hjb::SeedSide::left ? "/left" : "/right");
    const double lam = pair.value + (job.side == hjb::SeedSide::left ? -1.0 : 1.0) * c.scenario.seed_distance;
    if (lam < lo || lam > hi) return {std::nullopt, tag + ": seed outside the window"};
    try {
        const hjb::BranchPoint seed =
            hjb::seed_from_infinity(c.dop, c.spectrum, f, job.sign, job.side, c.scenario.seed_distance, c.solver);
        const hjb::StepControl ctrl = step_control(c, lo, hi);
        const hjb::Branch toward = hjb::continue_branch(c.dop, f, seed, pair.value, ctrl);
        const hjb::Branch away =
            hjb::continue_branch(c.dop, f, seed, job.side == hjb::SeedSide::left ? lo : hi, ctrl);
        hjb::Branch br;
        br.provenance = job.sign == hjb::HalfSign::plus ? hjb::Provenance::from_plus_infinity
                                                        : hjb::Provenance::from_minus_infinity;
        for (auto it = toward.points.rbegin(); it != toward.points.rend(); ++it) br.points.push_back(*it);
        for (std::size_t i = 1; i < away.points.size(); ++i) br.points.push_back(away.points[i]);
        for (std::size_t i = 0; i < br.points.size(); ++i) br.points[i].arc_index = static_cast<int>(i);
        br.folds = toward.folds;
        br.folds.insert(br.folds.end(), away.folds.begin(), away.folds.end());
        br.termination = away.termination;
        return {std::move(br), tag + ": toward eigenvalue " + hjb::to_string(toward.termination) + ", outward " +
                                   hjb::to_string(away.termination)};
    } catch (const hjb::Error& e) {
        return {std::nullopt, tag + ": " + e.what()};
    }
}

struct DiagramRun {
    hjb::Diagram diagram;
    std::vector<std::string> notes;
};

DiagramRun trace_diagram(const Context& c, const hjb::Nonlinearity& f, double lo, double hi,
                         std::vector<double> samples) {
    const std::vector<SeedJob> jobs{{hjb::HalfSign::plus, hjb::SeedSide::left},
                                    {hjb::HalfSign::plus, hjb::SeedSide::right},
                                    {hjb::HalfSign::minus, hjb::SeedSide::left},
                                    {hjb::HalfSign::minus, hjb::SeedSide::right}};
    std::vector<SeedOutcome> outcomes(jobs.size());
    if (c.threads > 1) {
        std::vector<std::future<SeedOutcome>> fut;
        for (const auto& j : jobs) fut.push_back(std::async(std::launch::async, trace_seed, std::cref(c), std::cref(f), j, lo, hi));
        for (std::size_t i = 0; i < jobs.size(); ++i) outcomes[i] = fut[i].get();
    } else {
        for (std::size_t i = 0; i < jobs.size(); ++i) outcomes[i] = trace_seed(c, f, jobs[i], lo, hi);
    }
    DiagramRun run;
    std::vector<hjb::Branch> branches;
    for (auto& o : outcomes) {
        run.notes.push_back(o.note);
        if (o.branch) branches.push_back(std::move(*o.branch));
    }
    // Bounded branches through the census at the left edge that no traced branch reaches.
    const auto sols = hjb::census(c.dop, c.spectrum, f, lo, {}, c.solver);
    for (const auto& s : sols) {
        bool known = false;
        for (const auto& br : branches) {
            for (const auto& p : br.points) {
                if (std::abs(p.lambda - lo) <= 1e-9 * (1.0 + std::abs(lo)) &&
                    hjb::norm(p.u - s.u, hjb::NormKind::sup) <= 1e-6 * (1.0 + s.sup_norm)) {
                    known = true;
                }
            }
        }
        if (known) continue;
        try {
            hjb::Branch br = hjb::continue_branch(c.dop, f, s, hi, step_control(c, lo, hi));
            br.provenance = s.sign_class == hjb::SignClass::zero ? hjb::Provenance::from_zero : hjb::Provenance::bounded;
            run.notes.push_back("census solution |u| = " + format_double(s.sup_norm) + " at lambda_min: " +
                                hjb::to_string(br.termination));
            branches.push_back(std::move(br));
        } catch (const hjb::Error& e) {
            run.notes.push_back(std::string("census branch: ") + e.what());
        }
    }
    if (samples.empty()) {
        for (int k = 0; k <= 40; ++k) samples.push_back(lo + (hi - lo) * k / 40.0);
    }
    run.diagram = hjb::assemble_diagram(std::move(branches), samples);
    return run;
}

json diagram_json(const DiagramRun& run) {
    json bs = json::array();
    for (std::size_t b = 0; b < run.diagram.branches.size(); ++b) {
        const auto& br = run.diagram.branches[b];
        double mx = 0.0;
        for (const auto& p : br.points) mx = std::max(mx, p.sup_norm);
        json folds = json::array();
        for (const auto& fd : br.folds) folds.push_back({{"lambda", fd.lambda}, {"direction", fd.direction}});
        bs.push_back({{"id", b}, {"provenance", hjb::to_string(br.provenance)},
                      {"termination", hjb::to_string(br.termination)}, {"points", br.points.size()},
                      {"lambda_min", br.lambda_min()}, {"lambda_max", br.lambda_max()}, {"max_sup_norm", mx},
                      {"folds", std::move(folds)}});
    }
    json counts = json::array();
    for (const auto& ct : run.diagram.counts) counts.push_back({{"lambda", ct.lambda}, {"count", ct.count}});
    return {{"branches", std::move(bs)}, {"counts", std::move(counts)}, {"notes", run.notes}};
}

void write_diagram(const Context& c, const DiagramRun& run) {
    write_atomic(c.out / "diagram.csv", diagram_csv(run.diagram));
    write_atomic(c.out / "polylines.csv", polylines_csv(run.diagram));
    write_atomic(c.out / "counts.csv", counts_csv(run.diagram));
    write_atomic(c.out / "diagram.svg", diagram_svg(run.diagram, {{"l1+", lp(c)}, {"l1-", lm(c)}}));
}

int cmd_branch(Context& c, json& res, std::ostream& out) {
    const hjb::Nonlinearity f = nonlinearity(c);
    const double lo = c.scenario.lambda_min.value_or(lp(c) - 2.0);
    const double hi = c.scenario.lambda_max.value_or(lm(c) + 1.0);
    if (!(lo < hi)) throw hjb::ConfigError("lambda.min: must be below lambda.max");
    const DiagramRun run = trace_diagram(c, f, lo, hi, c.scenario.lambda_samples);
    res = diagram_json(run);
    write_diagram(c, run);
    out << run.diagram.branches.size() << " branches on [" << format_double(lo) << ", " << format_double(hi) << "]\n";
    for (const auto& n : run.notes) out << "  " << n << "\n";
    return run.diagram.branches.empty() ? exit_nonconvergence : exit_ok;
}

// ---------------------------------------------------------------- checks

struct Checks {
    json list = json::array();
    bool all = true;

    void add(const std::string& name, bool pass, const std::string& detail, std::ostream& out) {
        all = all && pass;
        list.push_back({{"check", name}, {"pass", pass}, {"detail", detail}});
        out << (pass ? "PASS " : "FAIL ") << name << ": " << detail << "\n";
    }
};

std::string fmt(double v) { return format_double(v); }

int finish(Checks& checks, json& res) {
    res["checks"] = checks.list;
    res["pass"] = checks.all;
    return checks.all ? exit_ok : exit_acceptance_failed;
}

int example1(Context& c, json& res, std::ostream& out) {
    Scenario& s = c.scenario;
    Checks checks;
    const hjb::GridFunction h = eval_function(s.nonlin_functions.at("h"), c.grid, "nonlinearity.fn.h");
    const hjb::TStarOptions to = tstar_options(c);
    const hjb::TStarResult tp = hjb::tstar_resonant(c.dop, c.spectrum, hjb::HalfSign::plus, h, to);
    s.nonlin_params["t_star"] = tp.value;
    if (!s.lambda) s.lambda = lp(c) + 0.1;
    const double lam = *s.lambda;
    const double tl = hjb::tstar_interior(c.dop, c.spectrum, lam, h, to).value;
    if (!s.nonlin_params.count("t_bar")) s.nonlin_params["t_bar"] = 0.5 * (tl + tp.bracket.second);
    const double t_bar = s.nonlin_params.at("t_bar");
    const double eps = s.nonlin_params.at("eps");
    res["tstar_plus"] = tp.value;
    res["tstar_lambda"] = tl;
    res["lambda"] = lam;
    checks.add("window", tp.bracket.second < t_bar && t_bar < tl,
               "t*_+(h) = " + fmt(tp.value) + " < t_bar = " + fmt(t_bar) + " < t*_lambda(h) = " + fmt(tl), out);
    const hjb::Nonlinearity f = nonlinearity(c);
    const auto sols = hjb::census(c.dop, c.spectrum, f, lam, {}, c.solver);
    checks.add("census empty", sols.empty(), std::to_string(sols.size()) + " solutions at lambda = " + fmt(lam), out);
    const auto& phi = c.spectrum.plus.efun;
    for (double t : {t_bar, tp.value - eps}) {
        const hjb::ProbeResult pr = hjb::solvability_probe(c.dop, c.spectrum, lam, t * phi + h, {c.budget, 1e6}, c.solver);
        checks.add("probe t = " + fmt(t), pr.verdict == hjb::Solvability::unsolvable,
                   std::string(hjb::to_string(pr.verdict)) + " (" + pr.evidence + ")", out);
    }
    // Control: with t_bar above t*_lambda(h) the frozen problem is solvable.
    const double t_hi = tl + 0.5 * (tl - tp.value);
    Scenario cs = s;
    cs.nonlin_params["t_bar"] = t_hi;
    const hjb::Nonlinearity g = make_nonlinearity(cs, c.grid, phi);
    const auto found = hjb::census(c.dop, c.spectrum, g, lam, {}, c.solver);
    const hjb::ProbeResult pr = hjb::solvability_probe(c.dop, c.spectrum, lam, t_hi * phi + h, {c.budget, 1e6}, c.solver);
    checks.add("control t_bar = " + fmt(t_hi), !found.empty() && pr.verdict == hjb::Solvability::solvable,
               std::to_string(found.size()) + " solutions, probe " + hjb::to_string(pr.verdict), out);
    return finish(checks, res);
}

bool all_sign(const hjb::Branch& br, hjb::SignClass s) {
    return std::all_of(br.points.begin(), br.points.end(), [s](const auto& p) { return p.sign_class == s; });
}

const hjb::Branch* find_branch(const hjb::Diagram& d, hjb::Provenance p) {
    for (const auto& br : d.branches) {
        if (br.provenance == p) return &br;
    }
    return nullptr;
}

double max_norm(const hjb::Branch& br) {
    double m = 0.0;
    for (const auto& p : br.points) m = std::max(m, p.sup_norm);
    return m;
}

int example2(Context& c, json& res, std::ostream& out) {
    Checks checks;
    const hjb::Nonlinearity f = nonlinearity(c);
    const double lo = c.scenario.lambda_min.value_or(lp(c) - 1.0);
    const double hi = c.scenario.lambda_max.value_or(lm(c) + 1.0);
    const DiagramRun run = trace_diagram(c, f, lo, hi, c.scenario.lambda_samples);
    res["diagram"] = diagram_json(run);
    write_diagram(c, run);
    struct Side {
        const char* name;
        hjb::Provenance prov;
        hjb::SignClass sign;
        double eig;
    };
    for (const Side& sd : {Side{"positive", hjb::Provenance::from_plus_infinity, hjb::SignClass::positive, lp(c)},
                           Side{"negative", hjb::Provenance::from_minus_infinity, hjb::SignClass::negative, lm(c)}}) {
        const hjb::Branch* br = find_branch(run.diagram, sd.prov);
        if (!br) {
            checks.add(std::string(sd.name) + " branch", false, "no branch from infinity found", out);
            continue;
        }
        const double reach = std::min(lo, sd.eig - 1.0);
        checks.add(std::string(sd.name) + " branch left of the eigenvalue",
                   all_sign(*br, sd.sign) && br->lambda_max() < sd.eig && br->lambda_min() <= reach + 1e-9 &&
                       max_norm(*br) >= 1e3,
                   "lambda in [" + fmt(br->lambda_min()) + ", " + fmt(br->lambda_max()) + "], eigenvalue " +
                       fmt(sd.eig) + ", max |u| = " + fmt(max_norm(*br)),
                   out);
        checks.add(std::string(sd.name) + " branch never turns", br->folds.empty(),
                   std::to_string(br->folds.size()) + " folds", out);
    }
    for (hjb::HalfSign sign : {hjb::HalfSign::plus, hjb::HalfSign::minus}) {
        bool none = false;
        try {
            hjb::seed_from_infinity(c.dop, c.spectrum, f, sign, hjb::SeedSide::right, c.scenario.seed_distance, c.solver);
        } catch (const hjb::NoSeed&) {
            none = true;
        }
        checks.add(std::string("no large solution right of lambda_1^") + (sign == hjb::HalfSign::plus ? "+" : "-"),
                   none, none ? "seed search found nothing" : "a large solution was found", out);
    }
    return finish(checks, res);
}

int example3(Context& c, json& res, std::ostream& out) {
    Checks checks;
    const hjb::Nonlinearity f = nonlinearity(c);
    for (const hjb::EigenPair* pair : {&c.spectrum.plus, &c.spectrum.minus}) {
        const std::string sgn = pair->sign == hjb::HalfSign::plus ? "+" : "-";
        const double lam = pair->value - 1.0;
        const double unit = 1.0 / hjb::norm(pair->efun, hjb::NormKind::sup);
        double worst = 0.0;
        bool ok = true;
        for (double k : {0.25, 0.5, 1.0}) {
            const hjb::GridFunction u = (k * unit) * pair->efun;
            const double r = hjb::norm(hjb::nonlinear_residual(c.dop, lam, f, u), hjb::NormKind::sup);
            worst = std::max(worst, r);
            ok = ok && r <= hjb::nonlinear_tolerance(c.dop, lam, f, u, c.solver);
        }
        checks.add("segment k phi_1^" + sgn + " at lambda_1^" + sgn + " - 1", ok, "worst residual " + fmt(worst), out);
        // Branch from infinity down to the segment.
        try {
            const hjb::BranchPoint seed = hjb::seed_from_infinity(c.dop, c.spectrum, f, pair->sign, hjb::SeedSide::left,
                                                                  c.scenario.seed_distance, c.solver);
            // At lambda itself the solution set is the whole segment; stop just above it.
            const double stop = lam + 1e-3;
            const hjb::Branch br = hjb::continue_branch(c.dop, f, seed, stop, step_control(c, lam - 1.0, pair->value));
            const hjb::SignClass want = pair->sign == hjb::HalfSign::plus ? hjb::SignClass::positive : hjb::SignClass::negative;
            const auto& last = br.points.back();
            checks.add("branch from infinity reaches the segment",
                       all_sign(br, want) && br.termination == hjb::Termination::reached_target &&
                           std::abs(last.sup_norm - 1.0) <= 5e-2,
                       "ends at lambda = " + fmt(last.lambda) + " with |u| = " + fmt(last.sup_norm) + " (" +
                           hjb::to_string(br.termination) + ")",
                       out);
        } catch (const hjb::Error& e) {
            checks.add("branch from infinity reaches the segment", false, e.what(), out);
        }
    }
    const auto below = hjb::census(c.dop, c.spectrum, f, lp(c) - 1.5, {}, c.solver);
    checks.add("only the zero solution below lambda_1^+ - 1",
               below.size() == 1 && below[0].sign_class == hjb::SignClass::zero,
               std::to_string(below.size()) + " solutions at lambda = " + fmt(lp(c) - 1.5), out);
    const auto mid = hjb::census(c.dop, c.spectrum, f, lp(c) - 0.5, {}, c.solver);
    const auto positives = std::count_if(mid.begin(), mid.end(),
                                         [](const auto& p) { return p.sign_class == hjb::SignClass::positive; });
    checks.add("unique positive solution at lambda_1^+ - 0.5", positives == 1,
               std::to_string(positives) + " positive of " + std::to_string(mid.size()), out);
    return finish(checks, res);
}

// ---------------------------------------------------------------- verify

int cmd_verify(Context& c, json& res, std::ostream& out) {
    Checks checks;
    const hjb::Domain dom = make_domain(c.scenario);
    if (c.grid.dimension() == 1 && c.op.tag()) {
        for (const hjb::EigenPair* pair : {&c.spectrum.plus, &c.spectrum.minus}) {
            try {
                const double shoot = hjb::shooting_eigen_1d(c.op, dom, pair->sign).values.at(0);
                const double h = c.grid.spacing();
                // Second-order scheme: the discrete eigenvalue sits O(lambda^2 h^2) from the continuum one.
                const double tol = 1e-6 + 0.2 * shoot * shoot * h * h;
                checks.add(std::string("eigenvalue ") + hjb::to_string(pair->sign) + " vs shooting",
                           std::abs(pair->value - shoot) <= tol,
                           "discrete " + fmt(pair->value) + ", shooting " + fmt(shoot) + ", tolerance " + fmt(tol), out);
            } catch (const hjb::UnsupportedOperator& e) {
                out << "skip shooting: " << e.what() << "\n";
            }
        }
    }
    if (c.grid.size() <= 2000) {
        std::mt19937_64 rng(c.scenario.seed);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        hjb::GridFunction g(c.grid);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = dist(rng);
        const double shift = -c.dop.gamma() - 1.0;
        const hjb::SolveReport rep = hjb::solve_proper(c.dop, shift, g, c.solver);
        const hjb::OracleResult dense = hjb::dense_proper_solve(c.op, c.grid, shift, g);
        const double diff = hjb::norm(rep.u - *dense.u, hjb::NormKind::sup);
        checks.add("policy iteration vs dense oracle", rep.converged() && diff <= 1e-8, "difference " + fmt(diff), out);
    }
    const hjb::StructureReport sr = hjb::check_structure(c.dop, 100, c.scenario.seed);
    checks.add("structure", sr.pass,
               "homogeneity " + fmt(sr.worst_homogeneity) + ", subadditivity " + fmt(sr.worst_subadditivity) +
                   ", sandwich " + fmt(sr.worst_sandwich),
               out);
    const hjb::GridFunction d = eval_function(c.scenario.tstar_d.empty() ? "const:1" : c.scenario.tstar_d, c.grid, "tstar.d");
    try {
        const hjb::TStarResult r = hjb::tstar_resonant(c.dop, c.spectrum, hjb::HalfSign::plus, d, tstar_options(c));
        const double step = 0.05 * (1.0 + hjb::norm(d, hjb::NormKind::sup));
        std::vector<double> grid;
        for (int k = -6; k <= 6; ++k) grid.push_back(std::round(r.value / step) * step + k * step);
        const hjb::ScanResult scan = hjb::exhaustive_tstar_scan(c.dop, c.spectrum, lp(c), d, grid);
        const bool ok = scan.bracket && std::abs(0.5 * (scan.bracket->first + scan.bracket->second) - r.value) <= 2 * step;
        checks.add("resonant t* vs exhaustive scan", ok,
                   "bisection " + fmt(r.value) +
                       (scan.bracket ? ", scan [" + fmt(scan.bracket->first) + ", " + fmt(scan.bracket->second) + "]"
                                     : std::string(", scan found no bracket")),
                   out);
    } catch (const hjb::Error& e) {
        checks.add("resonant t* vs exhaustive scan", false, e.what(), out);
    }
    return finish(checks, res);
}

bool config_error(const std::exception& e) {
    return dynamic_cast<const hjb::ConfigError*>(&e) || dynamic_cast<const hjb::InvalidParams*>(&e) ||
           dynamic_cast<const hjb::InvalidDomain*>(&e) || dynamic_cast<const hjb::InvalidCoefficients*>(&e) ||
           dynamic_cast<const hjb::MonotonicityViolation*>(&e) || dynamic_cast<const hjb::UnsupportedOperator*>(&e);
}

}  // namespace

Scenario example_scenario(int which) {
    Scenario s;
    s.op_tag = "barenblatt";
    s.op_params = {{"a", 1.0}, {"b", 2.0}};
    s.n = 200;
    switch (which) {
        case 1:
            s.name = "example1";
            s.nonlin = "example1";
            s.nonlin_params = {{"eps", 0.2}, {"M", 5.0}};
            s.nonlin_functions = {{"h", "cos:1:1"}};
            break;
        case 2:
            s.name = "example2";
            s.nonlin = "example2";
            break;
        case 3:
            s.name = "example3";
            s.nonlin = "example3";
            break;
        default: throw hjb::ConfigError("reproduce-example: expected 1, 2 or 3");
    }
    return s;
}

int run(const std::string& subcommand, const std::vector<std::string>& args, const RunFlags& flags,
        std::ostream& out, std::ostream& err) {
    static const std::vector<std::string> known{"eigen", "solve", "tstar", "branch", "reproduce-example", "verify"};
    if (std::find(known.begin(), known.end(), subcommand) == known.end()) {
        err << "unknown subcommand '" << subcommand << "'\n";
        return exit_invalid_config;
    }
    try {
        Scenario s;
        int which = 0;
        if (subcommand == "reproduce-example") {
            if (args.size() != 1 || (args[0] != "1" && args[0] != "2" && args[0] != "3")) {
                throw hjb::ConfigError("reproduce-example: expected 1, 2 or 3");
            }
            which = std::stoi(args[0]);
            s = flags.config ? load_scenario(*flags.config) : example_scenario(which);
        } else {
            if (!flags.config) throw hjb::ConfigError("--config: required by " + subcommand);
            s = load_scenario(*flags.config);
        }
        Context c = make_context(std::move(s), flags);
        json res = json::object();
        int code = exit_ok;
        try {
            if (subcommand == "eigen") code = cmd_eigen(c, res, out);
            else if (subcommand == "solve") code = cmd_solve(c, res, out);
            else if (subcommand == "tstar") code = cmd_tstar(c, res, out, err);
            else if (subcommand == "branch") code = cmd_branch(c, res, out);
            else if (subcommand == "verify") code = cmd_verify(c, res, out);
            else if (which == 1) code = example1(c, res, out);
            else if (which == 2) code = example2(c, res, out);
            else code = example3(c, res, out);
        } catch (const std::exception& e) {
            code = config_error(e) ? exit_invalid_config : exit_nonconvergence;
            res["error"] = e.what();
            err << e.what() << "\n";
        }
        write_report(c, subcommand, code, std::move(res));
        return code;
    } catch (const std::exception& e) {
        err << e.what() << "\n";
        return config_error(e) ? exit_invalid_config : exit_nonconvergence;
    }
}

}  // namespace hjbcli
