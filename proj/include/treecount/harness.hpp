#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "treecount/analytic_model.hpp"
#include "treecount/sim_engine.hpp"

namespace treecount::harness {

std::string version();

struct GridPoint {
    std::uint64_t nodes = 1000;
    double degree = 4;
    double ratio = 1;

    friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

/// Cross product of sizes, degrees and ratios, all sharing the sampling
/// plan in `base`.
struct SweepSpec {
    std::vector<std::uint64_t> nodes;
    std::vector<double> degrees;
    std::vector<double> ratios;
    sim::SimConfig base;
    std::filesystem::path out_dir = "results";
    unsigned parallel = 1;

    std::vector<GridPoint> points() const;
    sim::SimConfig config_for(const GridPoint& p) const;
    void validate() const;
};

struct ComparisonRow {
    GridPoint point;
    double model_a0 = 0;
    double sim_a0 = 0;
    double sim_a0_se = 0;
    double rel_error = 0;  // |model - sim| / sim
};

ComparisonRow make_row(const GridPoint& p, double model_a0, stats::Estimate sim_a0);

model::ModelParams model_params_for(const GridPoint& p);

// CSV files carry leading "# key=value" metadata lines followed by a header
// row and data rows.

inline constexpr const char* kModelHeader = "x,pmin,nx,nxus,ax";
inline constexpr const char* kSimHeader = "x,nx_mean,nx_se,axn_mean,axn_se,nxus_frac_mean,nxus_frac_se";
inline constexpr const char* kComparisonHeader = "nodes,degree,ratio,model_a0,sim_a0,sim_a0_se,rel_error";

void write_model_csv(std::ostream& os, const model::ModelParams& p, const model::ModelSolution& sol);
/// Everything but the wall_time_s line is a pure function of the config.
void write_sim_csv(std::ostream& os, const sim::SimResult& res, double wall_seconds);
/// One row per snapshot: t,size,overflow,root_aggregate,n_0..n_M.
void write_raw_samples_csv(std::ostream& os, std::span<const sim::LevelSample> samples);
void write_comparison_csv(std::ostream& os, std::span<const ComparisonRow> rows);
void write_comparison_text(std::ostream& os, std::span<const ComparisonRow> rows);

struct CsvTable {
    std::map<std::string, std::string> meta;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const;
    double number(std::size_t row, const std::string& name) const;
    double meta_number(const std::string& key) const;
};

CsvTable read_csv(std::istream& is);
CsvTable read_csv_file(const std::filesystem::path& path);

/// Stable 64-bit FNV-1a over a canonical rendering of the run config and
/// code version, hex encoded.
std::string point_key(const sim::SimConfig& cfg);

std::string sim_file_name(const GridPoint& p);
std::string model_file_name(const GridPoint& p);

struct ManifestEntry {
    std::string key;
    GridPoint point;
    std::uint64_t seed = 0;
    std::string status;  // "ok" or "failed"
    std::string error;
    std::string sim_file;
    std::string model_file;
    double sim_a0 = 0;
    double sim_a0_se = 0;
    double model_a0 = 0;
};

/// Line-delimited JSON records; malformed lines (e.g. from a crash) are
/// skipped.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

struct SweepReport {
    std::size_t executed = 0;
    std::size_t skipped = 0;
    std::size_t failed = 0;
};

/// Runs every grid point not already recorded as done in
/// out_dir/manifest.jsonl, up to `parallel` at a time. Each finished point
/// writes its model and simulation CSVs and appends one manifest record.
/// `on_start` is invoked (under the manifest lock) before a point executes.
SweepReport run_sweep(const SweepSpec& spec, const std::function<void(const GridPoint&)>& on_start = {});

struct CompareOutcome {
    std::vector<ComparisonRow> rows;
    std::vector<GridPoint> missing;
};

/// Builds comparison rows for the grid. Simulation values come from
/// `results_dir` when present there; otherwise they are simulated on demand
/// if `simulate_missing`, or listed as missing.
CompareOutcome compare(const SweepSpec& spec, const std::optional<std::filesystem::path>& results_dir,
                       bool simulate_missing);

}  // namespace treecount::harness
