#include "treecount/sim_engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "treecount/analytic_model.hpp"
#include "treecount/gap_protocol.hpp"

namespace treecount::sim {

void SimConfig::validate() const {
    auto fail = [](const char* what) { throw std::invalid_argument(what); };
    if (nodes < 2) fail("nodes must be >= 2");
    if (!(mean_degree > 0)) fail("mean degree must be positive");
    if (!(ratio > 0)) fail("ratio must be positive");
    if (!(fail_rate > 0)) fail("fail rate must be positive");
    if (!(warmup_time >= 0)) fail("warmup must be non-negative");
    if (!(sample_interval > 0)) fail("sample interval must be positive");
    if (num_samples < 1) fail("at least one sample is required");
    if (batches < 1) fail("batch count must be positive");
}

std::uint64_t SimConfig::resolved_max_level() const {
    if (max_level != 0) return max_level;
    model::ModelParams p;
    p.nodes = static_cast<double>(nodes);
    p.mean_degree = mean_degree;
    p.ratio = ratio;
    return 3 * model::pmin_profile(p).x_max;
}

DynamicGraph build_initial_config(std::uint64_t nodes, double mean_degree, Rng& rng) {
    if (nodes < 1) throw std::invalid_argument("nodes must be >= 1");
    DynamicGraph g;
    while (g.size() < nodes) {
        const auto k = sample_join_degree(mean_degree, rng);
        const NodeId id = join_node(g, k, rng);
        apply_join_init(g, g.require_slot(id));
    }
    return g;
}

LevelSample sample_metrics(const DynamicGraph& g, std::uint64_t max_level) {
    LevelSample out;
    out.size = g.size();
    out.n.assign(max_level + 1, 0);
    out.a_total.assign(max_level + 1, 0.0);
    out.n_us.assign(max_level + 1, 0);
    for (Slot s : g.live_slots()) {
        const NodeState& st = g.state(s);
        if (!st.level.is_finite() || st.level.hops() > max_level) {
            ++out.overflow;
            continue;
        }
        const auto x = st.level.hops();
        ++out.n[x];
        out.a_total[x] += static_cast<double>(st.aggregate);
        if (!classify(g, s).is_stable()) ++out.n_us[x];
    }
    const NodeState& root = g.state(DynamicGraph::root_slot());
    out.root_aggregate = root.aggregate;
    out.root_level = root.level.hops();
    return out;
}

SimResult reduce(std::span<const LevelSample> samples, std::uint64_t batches) {
    if (samples.empty()) throw std::invalid_argument("no samples to reduce");
    const std::size_t n = samples.size();
    const std::size_t levels = samples.front().n.size();

    std::vector<double> size(n), root(n), overflow(n), num(n), den(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (samples[i].n.size() != levels) throw std::invalid_argument("samples disagree on max_level");
        size[i] = static_cast<double>(samples[i].size);
        root[i] = static_cast<double>(samples[i].root_aggregate);
        overflow[i] = static_cast<double>(samples[i].overflow);
    }

    SimResult res;
    res.sample_count = n;
    res.size = stats::batch_means(size, batches);
    res.a0 = stats::batch_ratio(root, size, batches);
    res.overflow = stats::batch_ratio(overflow, size, batches);
    for (std::size_t x = 0; x < levels; ++x) {
        for (std::size_t i = 0; i < n; ++i) num[i] = static_cast<double>(samples[i].n[x]);
        res.nx.push_back(stats::batch_ratio(num, size, batches));

        for (std::size_t i = 0; i < n; ++i) den[i] = static_cast<double>(samples[i].n_us[x]);
        res.nxus_frac.push_back(stats::batch_ratio(den, num, batches));

        for (std::size_t i = 0; i < n; ++i) num[i] = samples[i].a_total[x];
        res.ax.push_back(stats::batch_ratio(num, size, batches));
    }
    res.size_autocorrelation = stats::lag1_autocorrelation(size);
    res.a0_autocorrelation = stats::lag1_autocorrelation(root);
    return res;
}

Simulator::Simulator(const SimConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {
    cfg_.validate();
    graph_ = build_initial_config(cfg_.nodes, cfg_.mean_degree, rng_);
    push(exp_delay(cfg_.join_rate()), Kind::kJoin, 0, NodeId{});
    for (Slot s : graph_.live_slots()) schedule_node(s);
}

double Simulator::exp_delay(double rate) {
    std::exponential_distribution<double> dist(rate);
    return dist(rng_);
}

void Simulator::push(double t, Kind kind, Slot slot, NodeId id) { queue_.push(Event{t, kind, slot, id}); }

void Simulator::schedule_node(Slot s) {
    const NodeId id = graph_.id_at(s);
    if (s != DynamicGraph::root_slot()) push(now_ + exp_delay(cfg_.fail_rate), Kind::kFail, s, id);
    push(now_ + exp_delay(cfg_.cycle_rate()), Kind::kCycle, s, id);
}

void Simulator::advance_to(double t) {
    while (!queue_.empty() && queue_.top().t <= t) {
        const Event ev = queue_.top();
        queue_.pop();
        if (ev.kind != Kind::kJoin && !(graph_.is_live(ev.slot) && graph_.id_at(ev.slot) == ev.id))
            continue;  // clock of a node that already failed
        now_ = ev.t;
        switch (ev.kind) {
            case Kind::kJoin: {
                const auto k = sample_join_degree(cfg_.mean_degree, rng_);
                const Slot s = graph_.require_slot(join_node(graph_, k, rng_));
                apply_join_init(graph_, s);
                schedule_node(s);
                ++counts_.joins;
                push(now_ + exp_delay(cfg_.join_rate()), Kind::kJoin, 0, NodeId{});
                break;
            }
            case Kind::kFail:
                graph_.remove_node(ev.slot);
                ++counts_.failures;
                break;
            case Kind::kCycle:
                apply_update(graph_, ev.slot);
                ++counts_.cycles;
                push(now_ + exp_delay(cfg_.cycle_rate()), Kind::kCycle, ev.slot, ev.id);
                break;
        }
    }
    now_ = std::max(now_, t);
}

SimResult run(const SimConfig& cfg, std::vector<LevelSample>* raw) {
    cfg.validate();
    const std::uint64_t max_level = cfg.resolved_max_level();
    Simulator sim(cfg);

    std::vector<LevelSample> samples;
    samples.reserve(cfg.num_samples);
    std::vector<std::uint64_t> degrees;
    for (std::uint64_t i = 0; i < cfg.num_samples; ++i) {
        const double t = cfg.warmup_time + static_cast<double>(i) * cfg.sample_interval;
        sim.advance_to(t);
        LevelSample s = sample_metrics(sim.graph(), max_level);
        s.t = t;
        samples.push_back(std::move(s));

        auto h = degree_histogram(sim.graph());
        if (h.size() > degrees.size()) degrees.resize(h.size(), 0);
        for (std::size_t d = 0; d < h.size(); ++d) degrees[d] += h[d];
    }

    SimResult res = reduce(samples, cfg.batches);
    res.config = cfg;
    res.config.max_level = max_level;
    res.events = sim.counts();
    res.degree_counts = std::move(degrees);
    if (raw) *raw = std::move(samples);
    return res;
}

}  // namespace treecount::sim
