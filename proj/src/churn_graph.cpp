#include "treecount/churn_graph.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace treecount {

DynamicGraph::DynamicGraph() {
    Slot root = allocate(NodeId{next_id_++});
    slots_[root].state = NodeState{Level(0), 1, root_id()};
}

Slot DynamicGraph::allocate(NodeId id) {
    Slot s;
    if (!free_.empty()) {
        s = free_.back();
        free_.pop_back();
    } else {
        s = static_cast<Slot>(slots_.size());
        slots_.emplace_back();
    }
    SlotData& d = slots_[s];
    d.id = id;
    d.live = true;
    d.state = NodeState{Level::infinity(), 1, id};
    d.adj.clear();
    d.live_pos = static_cast<std::uint32_t>(live_.size());
    live_.push_back(s);
    index_.emplace(id.value, s);
    return s;
}

std::optional<Slot> DynamicGraph::slot_of(NodeId id) const {
    auto it = index_.find(id.value);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

Slot DynamicGraph::require_slot(NodeId id) const {
    auto s = slot_of(id);
    if (!s) {
        std::ostringstream msg;
        msg << "node " << id << " is not live";
        throw std::invalid_argument(msg.str());
    }
    return *s;
}

Slot DynamicGraph::add_node(std::span<const Slot> targets) {
    for (Slot t : targets)
        if (!is_live(t)) throw std::invalid_argument("attachment target is not live");
    Slot s = allocate(NodeId{next_id_++});
    for (Slot t : targets) add_edge(s, t);
    return s;
}

void DynamicGraph::add_edge(Slot a, Slot b) {
    if (a == b) throw std::invalid_argument("self-loops are not allowed");
    if (!is_live(a) || !is_live(b)) throw std::invalid_argument("edge endpoint is not live");
    auto& aa = slots_[a].adj;
    if (std::find(aa.begin(), aa.end(), b) != aa.end()) return;
    aa.push_back(b);
    slots_[b].adj.push_back(a);
}

void DynamicGraph::remove_node(Slot s) {
    if (s == root_slot()) throw std::invalid_argument("the root never fails");
    if (!is_live(s)) throw std::invalid_argument("node is not live");
    SlotData& d = slots_[s];
    for (Slot n : d.adj) {
        auto& na = slots_[n].adj;
        auto it = std::find(na.begin(), na.end(), s);
        *it = na.back();
        na.pop_back();
    }
    d.adj.clear();
    d.live = false;

    Slot moved = live_.back();
    live_[d.live_pos] = moved;
    slots_[moved].live_pos = d.live_pos;
    live_.pop_back();

    index_.erase(d.id.value);
    free_.push_back(s);
}

void DynamicGraph::check_invariants() const {
    if (!is_live(root_slot()) || slots_[root_slot()].id != root_id())
        throw std::logic_error("root is missing");
    if (live_.size() != index_.size()) throw std::logic_error("index out of sync");
    for (Slot s : live_) {
        const auto& adj = slots_[s].adj;
        for (Slot n : adj) {
            if (n == s) throw std::logic_error("self-loop");
            if (!is_live(n)) throw std::logic_error("edge to removed node");
            const auto& back = slots_[n].adj;
            if (std::count(back.begin(), back.end(), s) != 1)
                throw std::logic_error("adjacency is not symmetric");
        }
        std::vector<Slot> sorted(adj.begin(), adj.end());
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw std::logic_error("multi-edge");
    }
}

std::uint64_t sample_join_degree(double mean_degree, Rng& rng) {
    if (!(mean_degree > 0)) throw std::invalid_argument("mean degree must be positive");
    std::poisson_distribution<std::uint64_t> dist(mean_degree);
    return dist(rng);
}

NodeId join_node(DynamicGraph& g, std::uint64_t k, Rng& rng) {
    auto live = g.live_slots();
    const std::size_t m = live.size();
    const std::size_t want = std::min<std::uint64_t>(k, m);

    std::vector<Slot> targets;
    targets.reserve(want);
    if (want * 4 <= m) {
        // Sparse draw: rejection against the handful already picked.
        std::uniform_int_distribution<std::size_t> pick(0, m - 1);
        while (targets.size() < want) {
            Slot t = live[pick(rng)];
            if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
        }
    } else {
        std::vector<Slot> pool(live.begin(), live.end());
        for (std::size_t i = 0; i < want; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, m - 1);
            std::swap(pool[i], pool[pick(rng)]);
            targets.push_back(pool[i]);
        }
    }
    return g.id_at(g.add_node(targets));
}

void fail_node(DynamicGraph& g, NodeId v) {
    if (v == g.root_id()) throw std::invalid_argument("the root never fails");
    g.remove_node(g.require_slot(v));
}

std::vector<std::uint64_t> degree_histogram(const DynamicGraph& g) {
    std::vector<std::uint64_t> counts;
    for (Slot s : g.live_slots()) {
        std::size_t d = g.degree(s);
        if (d >= counts.size()) counts.resize(d + 1, 0);
        ++counts[d];
    }
    return counts;
}

}  // namespace treecount
