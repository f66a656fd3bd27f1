#pragma once

#include <cstdint>
#include <queue>
#include <span>
#include <vector>

#include "treecount/churn_graph.hpp"
#include "treecount/stats.hpp"

namespace treecount::sim {

struct SimConfig {
    std::uint64_t nodes = 1000;     // target size N
    double mean_degree = 4;
    double ratio = 10;              // cycle rate / failure rate
    double fail_rate = 1.0;         // sets the time unit
    std::uint64_t seed = 1;
    double warmup_time = 50;
    double sample_interval = 1;
    std::uint64_t num_samples = 1000;
    std::uint64_t max_level = 0;    // 0: three times the model's truncation level
    std::uint64_t batches = 20;

    double cycle_rate() const { return ratio * fail_rate; }
    double join_rate() const { return static_cast<double>(nodes) * fail_rate; }

    /// Throws std::invalid_argument.
    void validate() const;
    /// max_level with the default resolved.
    std::uint64_t resolved_max_level() const;
};

/// One snapshot of the level populations.
struct LevelSample {
    double t = 0;
    std::uint64_t size = 0;
    std::vector<std::uint64_t> n;        // nodes per level 0..max_level
    std::vector<double> a_total;         // summed aggregates per level
    std::vector<std::uint64_t> n_us;     // unstable (incl. isolated) per level
    std::uint64_t overflow = 0;          // level infinity or above max_level
    std::uint64_t root_aggregate = 0;
    std::uint64_t root_level = 0;
};

struct EventCounts {
    std::uint64_t joins = 0;
    std::uint64_t failures = 0;
    std::uint64_t cycles = 0;
};

struct SimResult {
    SimConfig config;
    std::vector<stats::Estimate> nx;         // N_x / size
    std::vector<stats::Estimate> ax;         // A_x / size
    std::vector<stats::Estimate> nxus_frac;  // N_x^us / N_x
    stats::Estimate size;
    stats::Estimate a0;                      // root aggregate / size
    stats::Estimate overflow;                // overflow / size
    std::uint64_t sample_count = 0;
    EventCounts events;
    std::vector<std::uint64_t> degree_counts;  // pooled over all samples
    double size_autocorrelation = 0;           // lag-1, between samples
    double a0_autocorrelation = 0;
};

/// Grows a graph from the lone root by joins (each joinee initialized
/// through the join rule) until it holds `nodes` nodes.
DynamicGraph build_initial_config(std::uint64_t nodes, double mean_degree, Rng& rng);

/// Single pass over live nodes bucketing level, aggregate and stability.
LevelSample sample_metrics(const DynamicGraph& g, std::uint64_t max_level);

/// Per-level means with batch-means errors. Throws on empty input.
SimResult reduce(std::span<const LevelSample> samples, std::uint64_t batches = 20);

/// Continuous-time event loop: a global Poisson join stream at rate
/// N*fail_rate plus, per node, independent exponential clocks for failure
/// (non-root only) and protocol cycles, all held in one time-ordered queue.
class Simulator {
public:
    explicit Simulator(const SimConfig& cfg);

    /// Processes every event with timestamp <= t.
    void advance_to(double t);

    double now() const { return now_; }
    const DynamicGraph& graph() const { return graph_; }
    const EventCounts& counts() const { return counts_; }

private:
    enum class Kind : std::uint8_t { kJoin, kFail, kCycle };
    struct Event {
        double t;
        Kind kind;
        Slot slot;
        NodeId id;
        bool operator>(const Event& o) const { return t > o.t; }
    };

    void schedule_node(Slot s);
    void push(double t, Kind kind, Slot slot, NodeId id);
    double exp_delay(double rate);

    SimConfig cfg_;
    Rng rng_;
    DynamicGraph graph_;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
    double now_ = 0;
    EventCounts counts_;
};

/// Full run: warm up, take num_samples snapshots sample_interval apart and
/// reduce them. Deterministic in (cfg, seed). If `raw` is non-null the
/// snapshots are handed back as well.
SimResult run(const SimConfig& cfg, std::vector<LevelSample>* raw = nullptr);

}  // namespace treecount::sim
