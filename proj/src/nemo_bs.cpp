#include "nemo/nemo_bs.hpp"

#include "nemo/errors.hpp"

namespace nemo {

Datagram mr_on_attach(MrState& mr, const Address& coa) {
    mr.current_coa = coa;
    mr.bound = false;
    mr.at_home = false;
    mr.tunnel.reset();
    ++mr.bu_seq;
    mr.pending_bu = MrState::PendingBu{mr.bu_seq, false};

    Datagram bu;
    bu.headers = {HopHeader{coa, mr.ha_address}};
    bu.body = BindingUpdateBody{HomeSubject{mr.mnp, mr.home_address}, coa, mr.bu_seq,
                                kDefaultBindingLifetimeMs, BuAudience::ToHomeAgent};
    bu.label = TraceKind::Bu;
    return bu;
}

void mr_on_attach_home(MrState& mr) {
    mr.current_coa = mr.home_address;
    mr.bound = true;
    mr.at_home = true;
    mr.tunnel = TunnelEndpoints{mr.home_address, mr.ha_address};
    mr.pending_bu.reset();
}

void mr_on_binding_ack(MrState& mr, const BindingAckBody& ba) {
    if (ba.status != BaStatus::Accepted) return;
    if (!mr.pending_bu || ba.seq < mr.pending_bu->seq) return;  // stale ack
    mr.bound = true;
    mr.tunnel = TunnelEndpoints{*mr.current_coa, mr.ha_address};
    mr.pending_bu.reset();
}

ForwardAction mr_on_tunnel_packet(const MrState& mr, const Datagram& d) {
    if (d.outer().src != mr.ha_address) return DropPacket{DropReason::BadTunnelSource};
    Datagram inner = decapsulate(d);
    const Address& dst = inner.outer().dst;
    if (dst == mr.home_address || (mr.current_coa && dst == *mr.current_coa))
        return DeliverLocal{std::move(inner)};
    if (!prefix_contains(mr.mnp, dst)) return DropPacket{DropReason::NotMnp};
    return SendOut{std::move(inner)};
}

ForwardAction mr_on_egress_from_mnn(const MrState& mr, const Datagram& d, int max_depth) {
    if (mr.at_home) return SendOut{d};  // zero-length tunnel
    if (!mr.bound || !mr.current_coa) return DropPacket{DropReason::NotBound};
    return SendOut{encapsulate(d, *mr.current_coa, mr.ha_address, max_depth)};
}

Datagram ha_on_binding_update(HaState& ha, const BindingUpdateBody& bu, std::int64_t now_ms) {
    const auto* subject = std::get_if<HomeSubject>(&bu.subject);
    if (!subject) throw UnknownPrefix("home-agent BU without a prefix subject");

    bool served = false;
    for (const auto& p : ha.served_prefixes)
        if (p == subject->mnp) served = true;
    if (!served) throw UnknownPrefix("BU for unserved prefix " + format_prefix(subject->mnp));

    BaStatus status = BaStatus::Rejected;
    auto it = ha.cache.find(subject->mr_home);
    if (it == ha.cache.end() || bu.seq > it->second.seq) {
        ha.cache[subject->mr_home] = BindingCacheEntry{
            subject->mnp, subject->mr_home, bu.coa, bu.seq, now_ms + bu.lifetime_ms, false};
        status = BaStatus::Accepted;
    }

    Datagram back;
    back.headers = {HopHeader{ha.address, bu.coa}};
    back.body = BindingAckBody{bu.seq, status};
    back.label = TraceKind::Ba;
    return back;
}

void ha_register_at_home(HaState& ha, const Prefix& mnp, const Address& mr_home,
                         std::int64_t now_ms) {
    std::int64_t seq = 0;
    auto it = ha.cache.find(mr_home);
    if (it != ha.cache.end()) seq = it->second.seq;
    ha.cache[mr_home] = BindingCacheEntry{mnp,    mr_home, mr_home, seq + 1,
                                          now_ms + kDefaultBindingLifetimeMs, true};
}

const BindingCacheEntry* ha_find_binding(const HaState& ha, const Address& dst,
                                         std::int64_t now_ms) {
    for (const auto& [home, entry] : ha.cache) {
        if (entry.expires_at_ms <= now_ms) continue;
        if (prefix_contains(entry.mnp, dst)) return &entry;
    }
    return nullptr;
}

HaAction ha_intercept(const HaState& ha, const Datagram& d, std::int64_t now_ms, int max_depth) {
    const Address& dst = d.outer().dst;

    if (dst == ha.address) {
        if (d.layers() < 2) return DeliverLocal{d};  // plain control (BU)

        // Reverse tunnel endpoint: only bound care-of addresses may inject.
        const BindingCacheEntry* from = nullptr;
        for (const auto& [home, entry] : ha.cache)
            if (entry.expires_at_ms > now_ms && entry.coa == d.outer().src) from = &entry;
        if (!from) return DropPacket{DropReason::NoBinding};

        Datagram inner = decapsulate(d);
        if (inner.outer().dst == ha.address) return DeliverLocal{std::move(inner)};
        if (ha.visiting_traffic_policy == VisitingTrafficPolicy::Deny &&
            !prefix_contains(from->mnp, inner.outer().src))
            return DropPacket{DropReason::PolicyVisitor};
        return SendOut{std::move(inner)};
    }

    // Forward direction: traffic for a served mobile network.
    const BindingCacheEntry* entry = ha_find_binding(ha, dst, now_ms);
    if (!entry) return DropPacket{DropReason::NoBinding};
    if (entry->at_home) return ForwardAtHome{d, entry->mr_home};
    return SendOut{encapsulate(d, ha.address, entry->coa, max_depth)};
}

}  // namespace nemo
