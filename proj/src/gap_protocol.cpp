#include "treecount/gap_protocol.hpp"

#include <limits>
#include <stdexcept>

namespace treecount {
namespace {

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
    constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
    return a > kMax - b ? kMax : a + b;
}

std::uint64_t children_sum(const DynamicGraph& g, Slot v) {
    const NodeId self = g.id_at(v);
    std::uint64_t sum = 0;
    for (Slot n : g.neighbors(v))
        if (g.state(n).parent == self) sum = saturating_add(sum, g.state(n).aggregate);
    return sum;
}

NodeState recompute(const DynamicGraph& g, Slot v, std::uint64_t aggregate) {
    if (!g.is_live(v)) throw std::invalid_argument("update of a dead node");
    const NodeId self = g.id_at(v);
    const NodeId current_parent = g.state(v).parent;

    auto nbrs = g.neighbors(v);
    if (nbrs.empty()) return NodeState{Level::infinity(), aggregate, self};

    Level best = Level::infinity();
    NodeId best_id{std::numeric_limits<std::uint64_t>::max()};
    bool keep_parent = false;
    for (Slot n : nbrs) {
        const Level l = g.state(n).level;
        const NodeId id = g.id_at(n);
        if (l < best) {
            best = l;
            best_id = id;
            keep_parent = (id == current_parent);
        } else if (l == best) {
            if (id == current_parent) keep_parent = true;
            if (id < best_id) best_id = id;
        }
    }
    return NodeState{best.successor(), aggregate, keep_parent ? current_parent : best_id};
}

}  // namespace

NodeState update_node(const DynamicGraph& g, Slot v) {
    if (v == DynamicGraph::root_slot()) throw std::invalid_argument("root runs root_update");
    return recompute(g, v, saturating_add(1, children_sum(g, v)));
}

NodeState root_update(const DynamicGraph& g) {
    const Slot r = DynamicGraph::root_slot();
    return NodeState{Level(0), saturating_add(1, children_sum(g, r)), g.root_id()};
}

NodeState init_joined_node(const DynamicGraph& g, Slot v) { return recompute(g, v, 1); }

StabilityClass classify(const DynamicGraph& g, Slot v) {
    if (v == DynamicGraph::root_slot()) return {};
    auto nbrs = g.neighbors(v);
    if (nbrs.empty()) return {StabilityClass::Kind::kIsolated, Level::infinity()};

    Level lowest = Level::infinity();
    for (Slot n : nbrs) lowest = std::min(lowest, g.state(n).level);

    // Stable iff the next update would leave the level unchanged, i.e. the
    // lowest neighbour sits exactly one hop closer to the root.
    if (lowest.successor() == g.state(v).level) return {};
    return {StabilityClass::Kind::kUnstable, lowest};
}

void apply_update(DynamicGraph& g, Slot v) {
    g.set_state(v, v == DynamicGraph::root_slot() ? root_update(g) : update_node(g, v));
}

void apply_join_init(DynamicGraph& g, Slot v) { g.set_state(v, init_joined_node(g, v)); }

}  // namespace treecount
