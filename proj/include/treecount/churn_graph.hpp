#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <unordered_map>
#include <vector>

#include "treecount/node_state.hpp"

namespace treecount {

using Rng = std::mt19937_64;

/// Dense storage index of a live node. Slots are recycled after failures,
/// node ids are not; anything that outlives a single event should hold a
/// NodeId.
using Slot = std::uint32_t;

/// Undirected simple graph under churn together with each node's registers.
///
/// Slot 0 always holds the root, which carries NodeId 0, starts in state
/// (level 0, aggregate 1, parent self) and can never be removed.
class DynamicGraph {
public:
    DynamicGraph();

    std::size_t size() const { return live_.size(); }
    NodeId root_id() const { return NodeId{0}; }
    static constexpr Slot root_slot() { return 0; }

    bool contains(NodeId id) const { return index_.contains(id.value); }
    std::optional<Slot> slot_of(NodeId id) const;
    /// Slot of a live node; throws std::invalid_argument for dead or unknown ids.
    Slot require_slot(NodeId id) const;

    NodeId id_at(Slot s) const { return slots_[s].id; }
    bool is_live(Slot s) const { return s < slots_.size() && slots_[s].live; }
    std::span<const Slot> neighbors(Slot s) const { return slots_[s].adj; }
    std::size_t degree(Slot s) const { return slots_[s].adj.size(); }

    const NodeState& state(Slot s) const { return slots_[s].state; }
    void set_state(Slot s, const NodeState& st) { slots_[s].state = st; }

    /// Live slots in unspecified (but deterministic) order.
    std::span<const Slot> live_slots() const { return live_; }

    /// Adds a node wired to `targets` (distinct live slots). Its registers
    /// start as (infinity, 1, self) until the protocol initializes them.
    Slot add_node(std::span<const Slot> targets);
    /// Removes a non-root node and all incident edges.
    void remove_node(Slot s);
    /// Adds an undirected edge; no-op if present. Used to build fixtures.
    void add_edge(Slot a, Slot b);

    std::uint64_t next_id() const { return next_id_; }

    /// Throws std::logic_error if symmetry, irreflexivity or endpoint
    /// liveness is violated.
    void check_invariants() const;

private:
    struct SlotData {
        NodeId id;
        bool live = false;
        NodeState state;
        std::vector<Slot> adj;
        std::uint32_t live_pos = 0;
    };

    Slot allocate(NodeId id);

    std::vector<SlotData> slots_;
    std::vector<Slot> free_;
    std::vector<Slot> live_;
    std::unordered_map<std::uint64_t, Slot> index_;
    std::uint64_t next_id_ = 0;
};

/// Draws a joinee's a-priori degree k ~ Poisson(mean_degree).
std::uint64_t sample_join_degree(double mean_degree, Rng& rng);

/// Adds a node with min(k, |V|) edges to distinct, uniformly chosen live
/// nodes (the root included). Registers are left for the protocol to set.
NodeId join_node(DynamicGraph& g, std::uint64_t k, Rng& rng);

/// Removes `v` and its edges. Failing the root or a dead node throws
/// std::invalid_argument.
void fail_node(DynamicGraph& g, NodeId v);

/// counts[d] = number of live nodes of degree d.
std::vector<std::uint64_t> degree_histogram(const DynamicGraph& g);

/// Churn rates in equilibrium form: join_rate = target_size * fail_rate.
struct ChurnParams {
    double target_size = 1000;
    double mean_degree = 4;
    double fail_rate = 1.0;

    double join_rate() const { return target_size * fail_rate; }
};

}  // namespace treecount
