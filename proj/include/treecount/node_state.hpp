#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <ostream>

namespace treecount {

/// Opaque node identity. Ids grow monotonically and are never reused, so a
/// stale parent register can never alias a node that joined later.
struct NodeId {
    std::uint64_t value = 0;

    friend constexpr auto operator<=>(NodeId, NodeId) = default;
};

inline std::ostream& operator<<(std::ostream& os, NodeId id) { return os << 'n' << id.value; }

/// Hop-count belief of a node. Either a finite natural or infinity, with
/// min(empty) = infinity and infinity + 1 = infinity.
class Level {
public:
    constexpr Level() = default;
    constexpr explicit Level(std::uint64_t hops) : hops_(hops < kInf ? hops : kInf) {}

    static constexpr Level infinity() { return Level(kInf); }

    constexpr bool is_finite() const { return hops_ != kInf; }
    constexpr std::uint64_t hops() const { return hops_; }

    constexpr Level successor() const { return is_finite() ? Level(hops_ + 1) : infinity(); }

    friend constexpr auto operator<=>(Level, Level) = default;

private:
    static constexpr std::uint64_t kInf = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t hops_ = 0;
};

inline std::ostream& operator<<(std::ostream& os, Level l) {
    if (!l.is_finite()) return os << "inf";
    return os << l.hops();
}

/// The three registers a node keeps.
struct NodeState {
    Level level = Level::infinity();
    std::uint64_t aggregate = 1;
    NodeId parent;

    friend bool operator==(const NodeState&, const NodeState&) = default;
};

}  // namespace treecount
