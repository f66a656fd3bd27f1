#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <vector>

#include "treecount/churn_graph.hpp"

namespace treecount::testing {

/// Adds a node wired to `targets` and gives it the stated registers.
inline Slot add_with_state(DynamicGraph& g, std::vector<Slot> targets, std::optional<std::uint64_t> level,
                           std::uint64_t aggregate, std::optional<Slot> parent) {
    Slot s = g.add_node(targets);
    NodeState st;
    st.level = level ? Level(*level) : Level::infinity();
    st.aggregate = aggregate;
    st.parent = parent ? g.id_at(*parent) : g.id_at(s);
    g.set_state(s, st);
    return s;
}

/// Hop distance from the root by plain BFS over slots; unreachable = -1.
inline std::vector<long> bfs_distances(const DynamicGraph& g) {
    std::size_t cap = 0;
    for (Slot s : g.live_slots()) cap = std::max<std::size_t>(cap, s + 1);
    std::vector<long> dist(cap, -1);
    std::queue<Slot> q;
    dist[DynamicGraph::root_slot()] = 0;
    q.push(DynamicGraph::root_slot());
    while (!q.empty()) {
        Slot u = q.front();
        q.pop();
        for (Slot v : g.neighbors(u))
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                q.push(v);
            }
    }
    return dist;
}

}  // namespace treecount::testing
