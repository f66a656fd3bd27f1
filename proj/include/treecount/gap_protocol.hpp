#pragma once

#include "treecount/churn_graph.hpp"

namespace treecount {

/// Outcome of comparing a node's level against its neighbourhood.
struct StabilityClass {
    enum class Kind { kStable, kUnstable, kIsolated };

    Kind kind = Kind::kStable;
    /// Minimum neighbour level; meaningful for kUnstable (the node moves to
    /// min_neighbor_level + 1 on its next update).
    Level min_neighbor_level = Level::infinity();

    bool is_stable() const { return kind == Kind::kStable; }
};

/// One protocol cycle of a non-root node, computed from the current
/// registers of its neighbours. Pure: the caller writes the result back.
///
/// level := min neighbour level + 1; aggregate := 1 + sum of aggregates of
/// neighbours whose parent register names this node; the parent is kept
/// while it is still adjacent and of minimal level, otherwise the
/// minimal-level neighbour with the lowest id is chosen. With no
/// neighbours the node becomes (infinity, *, self).
NodeState update_node(const DynamicGraph& g, Slot v);

/// The root's cycle: level 0 and parent self are fixed; only the aggregate
/// is recomputed from neighbours that name the root as parent.
NodeState root_update(const DynamicGraph& g);

/// Join-time initialization: aggregate 1, level and parent as in a cycle.
NodeState init_joined_node(const DynamicGraph& g, Slot v);

StabilityClass classify(const DynamicGraph& g, Slot v);

/// Convenience wrappers that apply the computed state to the graph.
void apply_update(DynamicGraph& g, Slot v);
void apply_join_init(DynamicGraph& g, Slot v);

}  // namespace treecount
