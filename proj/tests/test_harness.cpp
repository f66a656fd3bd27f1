#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "treecount/harness.hpp"

using namespace treecount;
using namespace treecount::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("treecount_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(TREECOUNT_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::string without_wall_time(const std::string& s) {
    std::istringstream in(s);
    std::string line, out;
    while (std::getline(in, line))
        if (line.rfind("# wall_time_s=", 0) != 0) out += line + "\n";
    return out;
}

SweepSpec tiny_sweep(const fs::path& dir) {
    SweepSpec spec;
    spec.nodes = {60};
    spec.degrees = {4};
    spec.ratios = {2, 3};
    spec.base.warmup_time = 2;
    spec.base.num_samples = 20;
    spec.base.sample_interval = 0.5;
    spec.base.seed = 9;
    spec.out_dir = dir;
    return spec;
}

}  // namespace

TEST_CASE("model CSV parses back to the solution") {
    model::ModelParams p;
    p.nodes = 1000;
    p.mean_degree = 6;
    p.ratio = 10;
    auto sol = model::predict(p);
    std::stringstream ss;
    write_model_csv(ss, p, sol);
    auto t = read_csv(ss);
    CHECK(t.meta.at("kind") == "model");
    CHECK(t.meta_number("a0") == doctest::Approx(sol.a0).epsilon(1e-9));
    CHECK(t.meta_number("converged") == 1);
    REQUIRE(t.rows.size() == sol.profile.x_max + 1);
    std::ostringstream header;
    for (std::size_t i = 0; i < t.header.size(); ++i) header << (i ? "," : "") << t.header[i];
    CHECK(header.str() == kModelHeader);
    for (std::size_t x = 0; x < t.rows.size(); ++x) {
        CHECK(t.number(x, "x") == x);
        CHECK(t.number(x, "nxus") == doctest::Approx(sol.profile.nxus[x]).epsilon(1e-9));
        CHECK(t.number(x, "ax") == doctest::Approx(sol.ax[x]).epsilon(1e-9));
    }
}

TEST_CASE("simulation CSV is reproducible apart from wall time") {
    sim::SimConfig c;
    c.nodes = 80;
    c.mean_degree = 6;
    c.ratio = 4;
    c.warmup_time = 2;
    c.num_samples = 25;
    std::ostringstream a, b;
    write_sim_csv(a, sim::run(c), 1.0);
    write_sim_csv(b, sim::run(c), 2.0);
    CHECK(a.str() != b.str());
    CHECK(without_wall_time(a.str()) == without_wall_time(b.str()));

    std::istringstream in(a.str());
    auto t = read_csv(in);
    std::ostringstream header;
    for (std::size_t i = 0; i < t.header.size(); ++i) header << (i ? "," : "") << t.header[i];
    CHECK(header.str() == kSimHeader);
    CHECK(t.meta_number("seed") == c.seed);
}

TEST_CASE("ragged CSV rows are rejected") {
    std::istringstream in("a,b\n1,2\n3\n");
    CHECK_THROWS(read_csv(in));
}

TEST_CASE("comparison rows") {
    GridPoint p{1000, 8, 10};
    auto self = make_row(p, 0.5, stats::Estimate{0.5, 0.01});
    CHECK(self.rel_error == 0.0);
    auto off = make_row(p, 0.55, stats::Estimate{0.5, 0.01});
    CHECK(off.rel_error == doctest::Approx(0.1));

    std::vector<ComparisonRow> rows{self, off};
    std::stringstream ss;
    write_comparison_csv(ss, rows);
    auto t = read_csv(ss);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.number(1, "rel_error") == doctest::Approx(0.1));
    CHECK(t.number(1, "degree") == 8);
    CHECK(t.number(1, "ratio") == 10);
}

TEST_CASE("point keys are stable and sensitive to the config") {
    sim::SimConfig c;
    const auto k = point_key(c);
    CHECK(k.size() == 16);
    CHECK(point_key(c) == k);
    c.seed += 1;
    CHECK(point_key(c) != k);
}

TEST_CASE("sweep writes results and resumes idempotently") {
    const auto dir = scratch_dir("sweep");
    auto spec = tiny_sweep(dir);

    auto first = run_sweep(spec);
    CHECK(first.executed == 2);
    CHECK(first.skipped == 0);
    CHECK(read_manifest(dir / "manifest.jsonl").size() == 2);
    for (const auto& p : spec.points()) {
        CHECK(fs::exists(dir / sim_file_name(p)));
        CHECK(fs::exists(dir / model_file_name(p)));
    }

    std::size_t started = 0;
    auto second = run_sweep(spec, [&](const GridPoint&) { ++started; });
    CHECK(second.executed == 0);
    CHECK(second.skipped == 2);
    CHECK(started == 0);
}

TEST_CASE("interrupted sweep only redoes missing points") {
    const auto dir = scratch_dir("resume");
    auto spec = tiny_sweep(dir);
    spec.ratios = {2, 3, 4};

    std::size_t started = 0;
    CHECK_THROWS(run_sweep(spec, [&](const GridPoint&) {
        if (++started == 2) throw std::runtime_error("killed");
    }));
    CHECK(read_manifest(dir / "manifest.jsonl").size() == 1);
    // a torn manifest line from the crash must not break the resume
    std::ofstream(dir / "manifest.jsonl", std::ios::app) << "{\"key\":\"trunc";

    std::vector<GridPoint> ran;
    auto report = run_sweep(spec, [&](const GridPoint& p) { ran.push_back(p); });
    CHECK(report.executed == 2);
    CHECK(report.skipped == 1);
    CHECK(ran.size() == 2);
}

TEST_CASE("parallel sweep matches the serial one") {
    const auto serial_dir = scratch_dir("serial");
    const auto parallel_dir = scratch_dir("parallel");
    auto serial = tiny_sweep(serial_dir);
    auto parallel = tiny_sweep(parallel_dir);
    parallel.parallel = 2;
    run_sweep(serial);
    run_sweep(parallel);
    for (const auto& p : serial.points())
        CHECK(without_wall_time(slurp(serial_dir / sim_file_name(p))) ==
              without_wall_time(slurp(parallel_dir / sim_file_name(p))));
}

TEST_CASE("compare reads sweep results and lists missing points") {
    const auto dir = scratch_dir("compare");
    auto spec = tiny_sweep(dir);
    run_sweep(spec);

    auto grid = spec;
    grid.ratios = {2, 3, 5};
    auto outcome = compare(grid, dir, false);
    CHECK(outcome.rows.size() == 2);
    REQUIRE(outcome.missing.size() == 1);
    CHECK(outcome.missing[0].ratio == 5);
    for (const auto& row : outcome.rows) CHECK(row.rel_error >= 0);

    auto filled = compare(grid, dir, true);
    CHECK(filled.rows.size() == 3);
    CHECK(filled.missing.empty());
}

TEST_CASE("cli: solve") {
    const auto dir = scratch_dir("cli_solve");

    CHECK(run_cli("solve --nodes 1000 --degree 4 --ratio -1") == 2);
    CHECK(run_cli("solve --nodes 1 --degree 4 --ratio 1") == 2);
    CHECK(run_cli("bogus") == 2);

    SUBCASE("rare cycles: aggregates are the join masses") {
        REQUIRE(run_cli("solve --nodes 1000 --degree 4 --ratio 0.001 --out " + (dir / "m.csv").string()) == 0);
        auto t = read_csv_file(dir / "m.csv");
        for (std::size_t x = 1; x < t.rows.size(); ++x)
            CHECK(t.number(x, "ax") == doctest::Approx(t.number(x, "pmin")).epsilon(0.01));
    }
    SUBCASE("fast cycles: the root approaches the attached mass") {
        REQUIRE(run_cli("solve --nodes 1000 --degree 8 --ratio 1000000 --out " + (dir / "m.csv").string()) == 0);
        auto t = read_csv_file(dir / "m.csv");
        CHECK(std::abs(t.number(0, "ax") - (1 - t.meta_number("residual"))) < 1e-3);
    }
    SUBCASE("non-convergence exits 1") {
        CHECK(run_cli("solve --nodes 1000 --degree 4 --ratio 1 --max-iter 2 --out " + (dir / "m.csv").string()) == 1);
    }
}

TEST_CASE("cli: simulate is byte-reproducible and conserves nodes") {
    const auto dir = scratch_dir("cli_sim");
    const std::string flags = "simulate --nodes 100 --degree 6 --ratio 5 --samples 30 --warmup 2 --seed 3";
    REQUIRE(run_cli(flags + " --out " + (dir / "a.csv").string() + " --raw " + (dir / "raw.csv").string()) == 0);
    REQUIRE(run_cli(flags + " --out " + (dir / "b.csv").string()) == 0);
    CHECK(without_wall_time(slurp(dir / "a.csv")) == without_wall_time(slurp(dir / "b.csv")));

    auto raw = read_csv_file(dir / "raw.csv");
    REQUIRE(raw.rows.size() == 30);
    for (std::size_t i = 0; i < raw.rows.size(); ++i) {
        double total = raw.number(i, "overflow");
        for (std::size_t c = raw.column("n_0"); c < raw.header.size(); ++c) total += std::stod(raw.rows[i][c]);
        CHECK(total == raw.number(i, "size"));
    }

    CHECK(run_cli("simulate --nodes 100 --ratio 0") == 2);
    CHECK(run_cli("simulate --nodes 100 --samples 0") == 2);
}

TEST_CASE("cli: flags override the config file") {
    const auto dir = scratch_dir("cli_config");
    std::ofstream(dir / "run.ini") << "[solve]\nnodes=500\ndegree=6\nratio=10\n";
    REQUIRE(run_cli("--config " + (dir / "run.ini").string() + " solve --out " + (dir / "a.csv").string()) == 0);
    auto a = read_csv_file(dir / "a.csv");
    CHECK(a.meta_number("nodes") == 500);
    CHECK(a.meta_number("ratio") == 10);

    REQUIRE(run_cli("--config " + (dir / "run.ini").string() + " solve --ratio 20 --out " + (dir / "b.csv").string()) == 0);
    auto b = read_csv_file(dir / "b.csv");
    CHECK(b.meta_number("nodes") == 500);
    CHECK(b.meta_number("ratio") == 20);
}

TEST_CASE("cli: sweep then compare") {
    const auto dir = scratch_dir("cli_sweep");
    const std::string grid = " --nodes 60 --degree 4 --ratio 2 3 --samples 20 --warmup 2 --sample-interval 0.5";
    REQUIRE(run_cli("sweep" + grid + " --out " + dir.string()) == 0);
    CHECK(read_manifest(dir / "manifest.jsonl").size() == 2);
    REQUIRE(run_cli("compare" + grid + " --results " + dir.string() + " --out " + (dir / "cmp.csv").string()) == 0);
    auto t = read_csv_file(dir / "cmp.csv");
    CHECK(t.rows.size() == 2);
    CHECK(run_cli("compare --nodes 60 --degree 4 --ratio 7 --samples 20 --warmup 2 --results " + dir.string()) == 1);
}
