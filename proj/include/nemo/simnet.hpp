// Deterministic discrete-event engine plus the topology graph: nodes, links,
// MR attachment state, and next-hop routing toward address anchors.
//
// Routing model: fixed-infrastructure nodes forward by longest-prefix match
// over (a) fixed nodes' own /128 addresses, (b) access-router prefixes and
// (c) mobile network prefixes anchored at the home agent that serves them.
// Mobile nodes never appear in that table: traffic for an MNN lands at the
// HA, traffic for a care-of address lands at the AR (or, nested, at the
// outer HA). Mobile routers forward into their own mobile network by exact
// neighbor match and everything else out of their current attachment.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nemo/netmodel.hpp"

namespace nemo {

enum class NodeKind { Cn, Router, HomeAgent, AccessRouter, MobileRouter, Mnn };

std::string_view to_string(NodeKind k);

/// Strong node handle; value is the small integer id (1-based, assignment
/// order), which is also the deterministic tie-breaker everywhere.
struct NodeId {
    std::int32_t value = 0;

    friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

struct NodeInfo {
    NodeId id;
    NodeKind kind = NodeKind::Router;
    std::string name;
    std::optional<Address> addr;
    std::optional<Prefix> prefix;   // AR: advertised access prefix; MR: its MNP
    std::optional<NodeId> ha;       // MR only: serving home agent
    std::optional<NodeId> mr;       // MNN only: the router it sits behind
    std::optional<NodeId> parent;   // nested MR only: outer MR
};

struct Link {
    NodeId a;
    NodeId b;
    int delay_ms = 1;
    bool up = true;
};

class Topology {
  public:
    NodeId add_node(NodeInfo info);  // info.id is assigned; name must be unique
    void add_link(NodeId a, NodeId b, int delay_ms);

    const NodeInfo& node(NodeId id) const;
    NodeInfo& node(NodeId id);
    const NodeInfo* find(const std::string& name) const;
    const std::vector<NodeInfo>& nodes() const { return nodes_; }
    const std::vector<Link>& links() const { return links_; }

    void set_link_up(NodeId a, NodeId b, bool up);
    std::optional<int> link_delay(NodeId a, NodeId b) const;

    /// Records the attachment, derives the care-of address (target prefix
    /// base + MR id value; the MR's home address when returning to its HA)
    /// and returns it. Any previous attachment is dropped.
    Address apply_attach(NodeId mr, NodeId target);
    void detach(NodeId mr);

    std::optional<NodeId> attachment(NodeId mr) const;
    std::optional<Address> current_coa(NodeId mr) const;

    /// True while the link exists, is administratively up, and — for an MR
    /// egress link (to an AR, HA or parent MR) — matches the current
    /// attachment. MR-to-MNN links are ingress and always count.
    bool link_active(NodeId a, NodeId b) const;

    /// Next node on a minimum-hop path from `at` toward the owner/anchor of
    /// dst. Ties break on the smallest neighbor id. nullopt = unroutable.
    std::optional<NodeId> next_hop(NodeId at, const Address& dst) const;

    /// Raw shortest-path length over currently active links, mobile hops
    /// included (metrics baseline, not a forwarding decision). nullopt when
    /// disconnected.
    std::optional<int> shortest_path_len(NodeId from, NodeId to) const;

    std::vector<NodeId> active_neighbors(NodeId n) const;

  private:
    bool is_fixed(NodeId n) const;
    bool owns_exactly(NodeId n, const Address& dst) const;
    std::optional<NodeId> resolve_anchor(const Address& dst) const;

    std::vector<NodeInfo> nodes_;
    std::vector<Link> links_;
    std::map<NodeId, NodeId> attachments_;
    std::map<NodeId, Address> coas_;
};

// --- engine ------------------------------------------------------------------

inline constexpr std::int64_t kDefaultEventCap = 10'000'000;

/// Single-threaded event queue. Events run in (time, insertion seq) order;
/// the clock never goes backwards.
class Engine {
  public:
    using Action = std::function<void()>;
    using EventId = std::uint64_t;

    explicit Engine(std::int64_t event_cap = kDefaultEventCap) : event_cap_(event_cap) {}

    /// Queues `action` at now + delay_ms (delay >= 0) behind all events
    /// already queued for that instant.
    EventId schedule(std::int64_t delay_ms, Action action);

    /// Runs every event with time <= t_end_ms in order, then sets the clock
    /// to t_end_ms. Throws EventStorm past the processed-event cap.
    void run_until(std::int64_t t_end_ms);

    std::int64_t now() const { return now_; }
    std::int64_t processed() const { return processed_; }

  private:
    struct Pending {
        std::int64_t time;
        EventId seq;
        Action action;
    };

    std::vector<Pending> heap_;  // min-heap on (time, seq)
    std::int64_t now_ = 0;
    EventId next_seq_ = 0;
    std::int64_t processed_ = 0;
    std::int64_t event_cap_;
};

}  // namespace nemo
