#include "nemo/route_opt.hpp"

#include "nemo/errors.hpp"

namespace nemo {

namespace {

Datagram make_bu_to_cn(const Address& coa, const Address& cn, const Address& mnn,
                       std::int64_t seq) {
    Datagram bu;
    bu.headers = {HopHeader{coa, cn}};
    bu.body = BindingUpdateBody{mnn, coa, seq, kDefaultBindingLifetimeMs,
                                BuAudience::ToCorrespondent};
    bu.label = TraceKind::BuCn;
    return bu;
}

}  // namespace

CnClass mr_classify_cn(const CnRegistry& reg, const Address& cn) {
    auto it = reg.entries.find(cn);
    if (it == reg.entries.end()) return CnClass::New;
    return it->second.state == CnRegistryEntry::State::Active ? CnClass::Registered
                                                              : CnClass::Pending;
}

InboundResult mr_on_inbound_data(const MrState& mr, CnRegistry& reg, const Datagram& inner,
                                 std::int64_t now_ms, int max_depth) {
    InboundResult result{inner, std::nullopt};
    const Address cn = inner.outer().src;
    const Address mnn = inner.outer().dst;

    if (reg.denied.count(cn)) return result;  // permanent basic-support fallback

    switch (mr_classify_cn(reg, cn)) {
        case CnClass::New: {
            CnRegistryEntry entry;
            entry.mnns.insert(mnn);
            entry.registered_at_ms = now_ms;
            reg.entries.emplace(cn, std::move(entry));

            Datagram req;
            req.headers = {HopHeader{mr.home_address, mr.ha_address}};
            req.body = RoAuthRequestBody{cn, mnn, ++reg.next_auth_seq};
            req.label = TraceKind::RoAuthReq;
            // Control rides the established tunnel.
            result.auth_request = encapsulate(req, *mr.current_coa, mr.ha_address, max_depth);
            break;
        }
        case CnClass::Pending:
        case CnClass::Registered:
            reg.entries[cn].mnns.insert(mnn);  // same CN, possibly another MNN
            break;
    }
    return result;
}

std::vector<Datagram> mr_on_ro_auth_ack(const MrState& mr, CnRegistry& reg,
                                        const RoAuthAckBody& ack, std::int64_t now_ms) {
    auto it = reg.entries.find(ack.cn);
    if (it == reg.entries.end())
        throw UnknownCn("RO auth ack for unknown correspondent " + format_address(ack.cn));

    if (!ack.granted) {
        reg.entries.erase(it);
        reg.denied.insert(ack.cn);
        return {};
    }

    CnRegistryEntry& entry = it->second;
    if (entry.state != CnRegistryEntry::State::AuthPending) return {};

    entry.registered_at_ms = now_ms;
    std::vector<Datagram> out;
    for (const Address& mnn : entry.mnns)
        out.push_back(make_bu_to_cn(*mr.current_coa, ack.cn, mnn, ++entry.last_bu_seq));
    entry.awaiting_ba = true;
    entry.bu_retried = false;
    return out;
}

void mr_on_cn_binding_ack(CnRegistry& reg, const Address& cn, const BindingAckBody& ba) {
    auto it = reg.entries.find(cn);
    if (it == reg.entries.end()) return;
    CnRegistryEntry& entry = it->second;
    if (ba.status != BaStatus::Accepted || ba.seq < entry.last_bu_seq) return;
    entry.state = CnRegistryEntry::State::Active;
    entry.awaiting_ba = false;
    entry.bu_retried = false;
}

Datagram cn_on_binding_update(CnState& cn, const BindingUpdateBody& bu) {
    const auto* mnn = std::get_if<Address>(&bu.subject);
    BaStatus status = BaStatus::Rejected;
    if (mnn) {
        auto it = cn.table.entries.find(*mnn);
        if (it == cn.table.entries.end() || bu.seq > it->second.seq) {
            cn.table.entries[*mnn] = CnAddressTable::Entry{bu.coa, bu.seq};
            status = BaStatus::Accepted;
        }
    }
    Datagram back;
    back.headers = {HopHeader{cn.address, bu.coa}};
    back.body = BindingAckBody{bu.seq, status};
    back.label = TraceKind::BaCn;
    return back;
}

Datagram cn_send(const CnState& cn, const Address& mnn, const DataBody& body, int max_depth) {
    Datagram d;
    d.headers = {HopHeader{cn.address, mnn}};
    d.body = body;
    d.label = TraceKind::Data;

    auto it = cn.table.entries.find(mnn);
    if (it == cn.table.entries.end()) return d;  // basic support path via the HA

    Datagram direct = encapsulate(d, cn.address, it->second.mr_coa, max_depth);
    direct.label = TraceKind::DirectData;
    return direct;
}

ForwardAction mr_on_mnn_packet_ro(const MrState& mr, const CnRegistry& reg, const Datagram& d,
                                  int max_depth) {
    const Address& dst = d.outer().dst;
    auto it = reg.entries.find(dst);
    if (it != reg.entries.end() && it->second.state == CnRegistryEntry::State::Active &&
        mr.current_coa) {
        Datagram direct = encapsulate(d, *mr.current_coa, dst, max_depth);
        direct.label = TraceKind::DirectData;
        return SendOut{std::move(direct)};
    }
    return mr_on_egress_from_mnn(mr, d, max_depth);
}

std::vector<Datagram> mr_on_handoff_broadcast(const MrState& /*mr*/, CnRegistry& reg,
                                              const Address& new_coa) {
    std::vector<Datagram> out;
    for (auto& [cn, entry] : reg.entries) {  // map order: deterministic by CN address
        if (entry.state != CnRegistryEntry::State::Active) continue;
        for (const Address& mnn : entry.mnns)
            out.push_back(make_bu_to_cn(new_coa, cn, mnn, ++entry.last_bu_seq));
        entry.awaiting_ba = true;
        entry.bu_retried = false;
    }
    return out;
}

RoAuthAckBody ha_on_ro_auth_request(const HaState& ha, const RoAuthRequestBody& req) {
    return RoAuthAckBody{req.cn, ha.ro_denied_cns.count(req.cn) == 0, req.seq};
}

}  // namespace nemo
