#include "hjbcli/app.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"HJB half-eigenvalue, resonance and branch toolkit"};
    app.require_subcommand(1);
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    hjbcli::RunFlags flags;
    app.add_option("--config", config, "Scenario file");
    app.add_option("--out", out, "Output directory");
    app.add_option("--seed", seed, "Seed for randomized checks");
    app.add_option("--threads", flags.threads, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--tol-scale", flags.tol_scale, "Multiplier for tolerances and t* bracket widths");
    app.add_option("--budget-scale", flags.budget_scale, "Multiplier for iteration and point budgets");
    std::string example;
    const std::vector<std::pair<const char*, const char*>> subs{
        {"eigen", "Both half-eigenpairs with residuals"},
        {"solve", "One Newton solve of F[u] + lambda u = f(x,u)"},
        {"tstar", "Critical values t* with brackets"},
        {"branch", "Bifurcation diagram: tabular, plot data and report"},
        {"reproduce-example", "Canned example scenario with pass/fail summary"},
        {"verify", "Oracle cross-check suite"}};
    for (const auto& [name, desc] : subs) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->fallthrough();
        if (std::string(name) == "reproduce-example") sub->add_option("example", example, "1, 2 or 3")->required();
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return hjbcli::exit_invalid_config;
    }
    if (app.count("--config")) flags.config = config;
    if (app.count("--out")) flags.out = out;
    if (app.count("--seed")) flags.seed = seed;
    const CLI::App* chosen = app.get_subcommands().front();
    std::vector<std::string> args;
    if (!example.empty()) args.push_back(example);
    return hjbcli::run(chosen->get_name(), args, flags, std::cout, std::cerr);
}
