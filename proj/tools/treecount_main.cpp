// treecount: simulate tree-based counting under churn and evaluate the
// steady-state model.
//
//   treecount solve    --nodes 1000 --degree 8 --ratio 100 [--out model.csv]
//   treecount simulate --nodes 1000 --degree 8 --ratio 100 --samples 1000 [--out sim.csv] [--raw samples.csv]
//   treecount compare  --nodes 1000 --degree 4 6 8 --ratio 1 10 [--results dir] [--simulate-missing] [--out cmp.csv]
//   treecount sweep    --nodes 1000 --degree 4 8 --ratio 1 10 1000 --out results --parallel 4
//
// Exit codes: 0 success, 1 runtime or convergence failure, 2 usage error.

#include <chrono>
#include <fstream>
#include <iostream>
#include <limits>

#include <CLI11.hpp>

#include "treecount/analytic_model.hpp"
#include "treecount/harness.hpp"
#include "treecount/sim_engine.hpp"

using namespace treecount;

namespace {

constexpr int kRuntimeError = 1;
constexpr int kUsageError = 2;

void add_sampling_options(CLI::App* cmd, sim::SimConfig& cfg) {
    cmd->add_option("--seed", cfg.seed, "RNG seed")->capture_default_str();
    cmd->add_option("--samples", cfg.num_samples, "number of steady-state samples")
        ->check(CLI::Range(std::uint64_t{1}, std::numeric_limits<std::uint64_t>::max()))
        ->capture_default_str();
    cmd->add_option("--warmup", cfg.warmup_time, "simulated time discarded before sampling")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->add_option("--sample-interval", cfg.sample_interval, "simulated time between samples")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--max-level", cfg.max_level, "highest level tracked per level (0 = automatic)")
        ->capture_default_str();
}

std::ostream& open_out(const std::string& path, std::ofstream& file) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path, std::ios::binary | std::ios::trunc);
    if (!file) throw std::runtime_error("cannot write " + path);
    return file;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tree-based network size counting under churn: simulator and steady-state model"};
    app.set_config("--config", "", "read options from a TOML/INI file (flags take precedence)");
    app.require_subcommand(1);

    // solve
    model::ModelParams mp;
    std::string solve_out;
    auto* solve = app.add_subcommand("solve", "evaluate the steady-state model");
    solve->add_option("--nodes", mp.nodes, "expected network size N")->check(CLI::Range(2.0, 1e12))->capture_default_str();
    solve->add_option("--degree", mp.mean_degree, "mean joinee degree")->check(CLI::PositiveNumber)->capture_default_str();
    solve->add_option("--ratio", mp.ratio, "protocol cycles per node lifetime")->check(CLI::PositiveNumber)->capture_default_str();
    solve->add_option("--truncation", mp.truncation, "drop levels with mass below this")->capture_default_str();
    solve->add_option("--max-iter", mp.max_iter, "fixed-point iteration cap")->capture_default_str();
    solve->add_option("--tol", mp.fp_tol, "fixed-point tolerance")->capture_default_str();
    solve->add_option("--out", solve_out, "CSV output file (default stdout)");

    // simulate
    sim::SimConfig sc;
    std::string sim_out, raw_out;
    auto* simulate = app.add_subcommand("simulate", "run one steady-state simulation");
    simulate->add_option("--nodes", sc.nodes, "target network size N")
        ->check(CLI::Range(std::uint64_t{2}, std::numeric_limits<std::uint64_t>::max()))
        ->capture_default_str();
    simulate->add_option("--degree", sc.mean_degree, "mean joinee degree")->check(CLI::PositiveNumber)->capture_default_str();
    simulate->add_option("--ratio", sc.ratio, "protocol cycles per node lifetime")->check(CLI::PositiveNumber)->capture_default_str();
    add_sampling_options(simulate, sc);
    simulate->add_option("--out", sim_out, "CSV output file (default stdout)");
    simulate->add_option("--raw", raw_out, "also write every raw sample to this CSV");

    // compare and sweep share a grid
    harness::SweepSpec spec;
    spec.nodes = {1000};
    spec.degrees = {4, 6, 8};
    spec.ratios = {1, 10, 100, 1000};
    auto add_grid = [&](CLI::App* cmd) {
        cmd->add_option("--nodes", spec.nodes, "network sizes")->capture_default_str();
        cmd->add_option("--degree", spec.degrees, "mean degrees")->check(CLI::PositiveNumber)->capture_default_str();
        cmd->add_option("--ratio", spec.ratios, "rate ratios")->check(CLI::PositiveNumber)->capture_default_str();
        add_sampling_options(cmd, spec.base);
        cmd->add_option("--parallel", spec.parallel, "concurrent simulations")
            ->check(CLI::Range(1u, 1024u))
            ->capture_default_str();
    };

    std::string results_dir, compare_out;
    bool simulate_missing = false;
    auto* compare = app.add_subcommand("compare", "model vs simulation counting accuracy table");
    add_grid(compare);
    compare->add_option("--results", results_dir, "sweep output directory to read simulations from");
    compare->add_flag("--simulate-missing", simulate_missing, "simulate grid points absent from --results");
    compare->add_option("--out", compare_out, "comparison CSV file (text table always goes to stdout)");

    std::string sweep_out = "results";
    auto* sweep = app.add_subcommand("sweep", "simulate and solve a parameter grid, resumable");
    add_grid(sweep);
    sweep->add_option("--out", sweep_out, "output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsageError;
    }

    try {
        if (*solve) {
            mp.validate();
            const auto sol = model::predict(mp);
            std::ofstream file;
            harness::write_model_csv(open_out(solve_out, file), mp, sol);
            if (!sol.converged) {
                std::cerr << "solver did not converge after " << sol.iterations
                          << " iterations (last change " << sol.last_delta << ")\n";
                return kRuntimeError;
            }
        } else if (*simulate) {
            try {
                sc.validate();
            } catch (const std::invalid_argument& e) {
                std::cerr << "invalid configuration: " << e.what() << "\n";
                return kUsageError;
            }
            std::vector<sim::LevelSample> raw;
            const auto t0 = std::chrono::steady_clock::now();
            const auto res = sim::run(sc, raw_out.empty() ? nullptr : &raw);
            const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            std::ofstream file;
            harness::write_sim_csv(open_out(sim_out, file), res, wall);
            if (!raw_out.empty()) {
                std::ofstream rf(raw_out, std::ios::binary | std::ios::trunc);
                if (!rf) throw std::runtime_error("cannot write " + raw_out);
                harness::write_raw_samples_csv(rf, raw);
            }
        } else if (*compare) {
            try {
                spec.validate();
            } catch (const std::invalid_argument& e) {
                std::cerr << "invalid grid: " << e.what() << "\n";
                return kUsageError;
            }
            std::optional<std::filesystem::path> dir;
            if (!results_dir.empty()) dir = results_dir;
            const auto outcome = harness::compare(spec, dir, simulate_missing || !dir);
            harness::write_comparison_text(std::cout, outcome.rows);
            if (!compare_out.empty()) {
                std::ofstream file;
                harness::write_comparison_csv(open_out(compare_out, file), outcome.rows);
            }
            for (const auto& p : outcome.missing)
                std::cerr << "missing: N=" << p.nodes << " degree=" << p.degree << " ratio=" << p.ratio << "\n";
            if (!outcome.missing.empty()) return kRuntimeError;
        } else if (*sweep) {
            spec.out_dir = sweep_out;
            try {
                spec.validate();
            } catch (const std::invalid_argument& e) {
                std::cerr << "invalid grid: " << e.what() << "\n";
                return kUsageError;
            }
            const auto report = harness::run_sweep(spec);
            std::cout << "executed " << report.executed << ", skipped " << report.skipped << ", failed "
                      << report.failed << "\n";
            if (report.failed > 0) return kRuntimeError;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntimeError;
    }
    return 0;
}
