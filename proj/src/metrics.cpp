#include "nemo/metrics.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "nemo/errors.hpp"

namespace nemo {

namespace {

bool is_control(TraceKind k) {
    switch (k) {
        case TraceKind::Bu:
        case TraceKind::Ba:
        case TraceKind::BuCn:
        case TraceKind::BaCn:
        case TraceKind::RoAuthReq:
        case TraceKind::RoAuthAck:
            return true;
        default:
            return false;
    }
}

}  // namespace

void MetricsStore::register_packet(std::uint64_t pkt_id, int flow_id, std::int64_t payload_bytes,
                                   TraceKind kind, std::int64_t injected_at_ms) {
    PacketInfo info;
    info.flow_id = flow_id;
    info.payload_bytes = payload_bytes;
    info.kind = kind;
    info.injected_at = injected_at_ms;
    packets_[pkt_id] = info;
    if (flow_id >= 0) flows_.insert(flow_id);
}

void MetricsStore::record_traversal(const TraceRecord& rec) {
    if (rec.time_ms < last_time_)
        throw OutOfOrder("trace time regressed: " + std::to_string(rec.time_ms) + " after " +
                         std::to_string(last_time_));
    last_time_ = rec.time_ms;
    records_.push_back(rec);

    auto it = packets_.find(rec.pkt_id);
    if (it == packets_.end()) return;  // untracked (direct store tests)
    PacketInfo& p = it->second;

    if (rec.drop_reason) {
        p.dropped = true;
        return;
    }
    if (rec.from == rec.to) {  // endpoint consumption
        p.delivered = true;
        return;
    }
    // Hop record.
    if (p.first_hop_at < 0) p.first_hop_at = rec.time_ms;
    ++p.hops;
    std::int64_t body = is_control(p.kind) ? kControlBodyBytes : p.payload_bytes;
    p.bytes += body + kIpHeaderBytes * rec.layers;
    p.overhead += kIpHeaderBytes * (rec.layers - 1);
    if (ha_nodes_.count(rec.from) || ha_nodes_.count(rec.to)) p.touched_ha = true;
}

void MetricsStore::note_delivery_distance(std::uint64_t pkt_id, int shortest_hops) {
    auto it = packets_.find(pkt_id);
    if (it != packets_.end()) it->second.shortest_at_delivery = shortest_hops;
}

void MetricsStore::note_attach(std::int64_t time_ms) { attach_times_.push_back(time_ms); }

void MetricsStore::set_ha_nodes(std::set<NodeId> ha_nodes) { ha_nodes_ = std::move(ha_nodes); }

FlowMetrics MetricsStore::flow_summary(int flow_id) const {
    if (!flows_.count(flow_id)) throw UnknownFlow("flow " + std::to_string(flow_id));

    FlowMetrics m;
    m.flow_id = flow_id;
    int pkts_with_hops = 0;
    std::int64_t delivered_hops = 0;
    std::int64_t all_hops = 0;
    std::int64_t shortest_sum = 0;
    for (const auto& [id, p] : packets_) {
        if (p.flow_id != flow_id) continue;
        m.bytes_on_wire += p.bytes;
        m.overhead_bytes += p.overhead;
        all_hops += p.hops;
        if (p.hops > 0) ++pkts_with_hops;
        if (p.delivered) {
            ++m.delivered;
            delivered_hops += p.hops;
            shortest_sum += p.shortest_at_delivery;
        }
        if (p.dropped) ++m.dropped;
    }
    if (m.delivered > 0) {
        m.traversals = static_cast<double>(delivered_hops) / m.delivered;
        m.shortest_possible = static_cast<int>(shortest_sum / m.delivered);
        if (m.shortest_possible > 0) m.stretch = m.traversals / m.shortest_possible;
    } else if (pkts_with_hops > 0) {
        m.traversals = static_cast<double>(all_hops) / pkts_with_hops;
    }
    return m;
}

int MetricsStore::signaling_cost(const TimeWindow& window) const {
    int count = 0;
    for (const auto& [id, p] : packets_) {
        if (!is_control(p.kind)) continue;
        if (p.first_hop_at < 0) continue;
        if (p.first_hop_at >= window.start_ms && p.first_hop_at < window.end_ms) ++count;
    }
    return count;
}

int MetricsStore::injected(int flow_id) const {
    int n = 0;
    for (const auto& [id, p] : packets_)
        if (p.flow_id == flow_id) ++n;
    return n;
}

MetricsReport MetricsStore::report() const {
    MetricsReport rep;
    for (int flow : flows_) rep.flows.push_back(flow_summary(flow));

    int delivered_data = 0;
    int delivered_via_ha = 0;
    for (const auto& [id, p] : packets_) {
        if (p.flow_id < 0 || !p.delivered) continue;
        ++delivered_data;
        if (p.touched_ha) ++delivered_via_ha;
    }
    if (delivered_data > 0)
        rep.ha_traversal_share = static_cast<double>(delivered_via_ha) / delivered_data;

    if (!attach_times_.empty()) {
        std::int64_t total = 0;
        for (std::size_t i = 0; i < attach_times_.size(); ++i) {
            std::int64_t end = i + 1 < attach_times_.size()
                                   ? attach_times_[i + 1]
                                   : std::numeric_limits<std::int64_t>::max();
            total += signaling_cost(TimeWindow{attach_times_[i], end});
        }
        rep.signaling_msgs_per_handoff =
            static_cast<double>(total) / static_cast<double>(attach_times_.size());
    }

    for (const auto& rec : records_)
        if (rec.drop_reason) ++rep.drops_by_reason[std::string(to_string(*rec.drop_reason))];
    return rep;
}

std::string render_trace(const std::vector<TraceRecord>& records,
                         const std::vector<std::string>& names) {
    auto name_of = [&](NodeId n) -> std::string {
        if (n.value >= 1 && n.value <= static_cast<std::int32_t>(names.size()))
            return names[static_cast<std::size_t>(n.value) - 1];
        return "#" + std::to_string(n.value);
    };
    std::ostringstream out;
    out << "# time_ms\tpkt_id\tkind\tfrom\tto\tlayers\tdrop_reason\n";
    for (const auto& r : records) {
        out << r.time_ms << '\t' << r.pkt_id << '\t' << to_string(r.kind) << '\t'
            << name_of(r.from) << '\t' << name_of(r.to) << '\t' << r.layers << '\t'
            << (r.drop_reason ? to_string(*r.drop_reason) : "-") << '\n';
    }
    return out.str();
}

}  // namespace nemo
