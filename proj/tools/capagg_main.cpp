#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "capagg/io.hpp"

namespace {

void add_run_flags(CLI::App* cmd, std::string& design, std::string& method, int& sweeps,
                   double& tol, bool& parallel, std::uint64_t& seed, std::size_t& cap) {
    cmd->add_option("--design", design, "Subset design: singleton|neighborhood|global")
        ->default_val("neighborhood");
    cmd->add_option("--method", method, "Sweep method: cyclic|dykstra")->default_val("cyclic");
    cmd->add_option("--sweeps", sweeps, "Maximum projection sweeps")->default_val(50);
    cmd->add_option("--tol", tol, "Convergence tolerance")->default_val(1e-7);
    cmd->add_flag("--parallel", parallel, "Run disjoint subsets concurrently");
    cmd->add_option("--seed", seed, "Random seed")->default_val(0);
    cmd->add_option("--cap", cap, "Support cap for exhaustive enumeration")->default_val(20);
}

capagg::RunConfig make_config(const std::string& design, const std::string& method, int sweeps,
                              double tol, bool parallel, std::uint64_t seed, std::size_t cap) {
    capagg::RunConfig c;
    c.design = capagg::design_strategy_from_name(design);
    c.method = capagg::method_from_name(method);
    c.max_sweeps = sweeps;
    c.tol = tol;
    c.parallel = parallel;
    c.seed = seed;
    c.cap = cap;
    return c;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coherence-projected forecast aggregation"};
    app.require_subcommand(1);

    std::string design, method;
    int sweeps = 50;
    double tol = 1e-7;
    bool parallel = false;
    std::uint64_t seed = 0;
    std::size_t cap = 20;
    std::string input, out_path;

    auto* agg = app.add_subcommand("aggregate", "Pool a forecast file and project it coherent");
    agg->add_option("input", input, "Forecast CSV/JSONL file")->required();
    agg->add_option("--out", out_path, "Output CSV path (also writes <out>.report.json)");
    add_run_flags(agg, design, method, sweeps, tol, parallel, seed, cap);

    auto* check = app.add_subcommand("check", "Report per-judge and pooled coherence residuals");
    check->add_option("input", input, "Forecast CSV/JSONL file")->required();
    check->add_option("--out", out_path, "Output JSON path");
    add_run_flags(check, design, method, sweeps, tol, parallel, seed, cap);

    auto* score = app.add_subcommand("score", "Four-case accuracy evaluation (needs truths)");
    score->add_option("input", input, "Forecast CSV/JSONL file with truth column")->required();
    score->add_option("--out", out_path, "Output CSV path (also writes <out>.json)");
    add_run_flags(score, design, method, sweeps, tol, parallel, seed, cap);

    capagg::GenParams gp;
    auto* gen = app.add_subcommand("gen", "Generate a synthetic forecast panel");
    gen->add_option("--vars", gp.n_vars, "Number of basic variables")->default_val(10);
    gen->add_option("--judges", gp.n_judges, "Number of judges")->default_val(30);
    gen->add_option("--events", gp.events_per_judge, "Events per judge")->default_val(34);
    gen->add_option("--noise", gp.noise, "Additive noise half-width")->default_val(0.15);
    gen->add_option("--seed", gp.seed, "Random seed")->default_val(0);
    gen->add_option("--basic-fraction", gp.basic_fraction, "Share of basic events")
        ->default_val(10.0 / 34.0);
    gen->add_flag("--correlated", gp.correlated, "Correlated ground truth (two-component mix)");
    gen->add_flag("--panel-distinct", gp.distinct_across_judges,
                  "Draw events distinct across the whole panel");
    gen->add_option("--out", out_path, "Output CSV/JSONL path");

    std::size_t bench_seeds = 1;
    double bench_noise = 0.15;
    auto* bench = app.add_subcommand("bench", "Convergence/timing sweep over the dataset scales");
    bench->add_option("--seeds", bench_seeds, "Seeds per scale")->default_val(1);
    bench->add_option("--noise", bench_noise, "Panel noise half-width")->default_val(0.15);
    bench->add_option("--out", out_path, "Output CSV path");
    add_run_flags(bench, design, method, sweeps, tol, parallel, seed, cap);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*agg)
            return capagg::cmd_aggregate(input,
                                         make_config(design, method, sweeps, tol, parallel, seed, cap),
                                         out_path, std::cout);
        if (*check)
            return capagg::cmd_check(input,
                                     make_config(design, method, sweeps, tol, parallel, seed, cap),
                                     out_path, std::cout);
        if (*score)
            return capagg::cmd_score(input,
                                     make_config(design, method, sweeps, tol, parallel, seed, cap),
                                     out_path, std::cout);
        if (*gen) return capagg::cmd_gen(gp, out_path, std::cout);
        if (*bench)
            return capagg::cmd_bench(make_config(design, method, sweeps, tol, parallel, seed, cap),
                                     bench_seeds, bench_noise, out_path, std::cout);
    } catch (const capagg::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const capagg::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
