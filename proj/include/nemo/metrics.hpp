// Per-hop trace records and the aggregation that turns them into path
// stretch, encapsulation overhead, HA load share and signaling cost.
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nemo/netmodel.hpp"
#include "nemo/simnet.hpp"

namespace nemo {

/// One observation: a hop (from != to), a drop (drop_reason set) or an
/// endpoint consumption (from == to, no drop reason). The kind is always
/// the message kind of the datagram the record is about.
struct TraceRecord {
    std::int64_t time_ms = 0;
    std::uint64_t pkt_id = 0;
    TraceKind kind = TraceKind::Data;
    NodeId from;
    NodeId to;
    int layers = 1;
    std::optional<DropReason> drop_reason;
};

struct FlowMetrics {
    int flow_id = 0;
    double traversals = 0.0;       // hops per delivered packet
    int shortest_possible = 0;     // oracle path length at delivery time
    double stretch = 0.0;          // traversals / shortest_possible
    std::int64_t bytes_on_wire = 0;
    std::int64_t overhead_bytes = 0;  // 40 * (layers - 1) summed over hops
    int delivered = 0;
    int dropped = 0;
};

struct MetricsReport {
    std::vector<FlowMetrics> flows;  // sorted by flow id
    double ha_traversal_share = 0.0;
    double signaling_msgs_per_handoff = 0.0;
    std::map<std::string, int> drops_by_reason;
};

struct TimeWindow {
    std::int64_t start_ms = 0;
    std::int64_t end_ms = 0;  // exclusive
};

/// Single-writer append store. Records must arrive in non-decreasing time
/// order; summaries are computed after the run.
class MetricsStore {
  public:
    /// Announces a packet before its records arrive. flow_id < 0 marks
    /// control traffic.
    void register_packet(std::uint64_t pkt_id, int flow_id, std::int64_t payload_bytes,
                         TraceKind kind, std::int64_t injected_at_ms);

    /// Appends one record. Throws OutOfOrder if time regresses.
    void record_traversal(const TraceRecord& rec);

    /// The oracle shortest path between the flow endpoints, sampled when the
    /// packet was delivered.
    void note_delivery_distance(std::uint64_t pkt_id, int shortest_hops);

    void note_attach(std::int64_t time_ms);
    void set_ha_nodes(std::set<NodeId> ha_nodes);

    const std::vector<TraceRecord>& records() const { return records_; }

    /// Per-flow metrics. Throws UnknownFlow.
    FlowMetrics flow_summary(int flow_id) const;

    /// Control messages (BU/BA/RoAuth, both audiences) originated inside the
    /// window. Callers pass a window covering exactly one attach event.
    int signaling_cost(const TimeWindow& window) const;

    /// Injected packets per flow (conservation checks).
    int injected(int flow_id) const;

    MetricsReport report() const;

    struct PacketInfo {
        int flow_id = -1;
        std::int64_t payload_bytes = 0;
        TraceKind kind = TraceKind::Data;
        std::int64_t injected_at = 0;
        std::int64_t first_hop_at = -1;
        int hops = 0;
        std::int64_t bytes = 0;
        std::int64_t overhead = 0;
        bool delivered = false;
        bool dropped = false;
        bool touched_ha = false;
        int shortest_at_delivery = 0;
    };

    /// Per-packet bookkeeping, keyed by packet id (post-run introspection).
    const std::map<std::uint64_t, PacketInfo>& packets() const { return packets_; }

  private:
    std::vector<TraceRecord> records_;
    std::map<std::uint64_t, PacketInfo> packets_;
    std::set<int> flows_;
    std::vector<std::int64_t> attach_times_;
    std::set<NodeId> ha_nodes_;
    std::int64_t last_time_ = 0;
};

/// Tab-separated, one line per record: time_ms, pkt_id, kind, from, to,
/// layers, drop_reason. Node names come from `names` (indexed by id value).
std::string render_trace(const std::vector<TraceRecord>& records,
                         const std::vector<std::string>& names);

}  // namespace nemo
