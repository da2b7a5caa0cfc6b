#include "nemo/simulation.hpp"

#include <algorithm>

#include "nemo/errors.hpp"

namespace nemo {

Simulation::Simulation(ScenarioSpec spec, RunConfig cfg)
    : spec_(std::move(spec)), cfg_(cfg), engine_(cfg.event_cap) {
    validate_scenario(spec_);

    for (const auto& decl : spec_.nodes) {
        NodeInfo info;
        info.kind = decl.kind;
        info.name = decl.name;
        info.addr = decl.addr;
        info.prefix = decl.prefix;
        topo_.add_node(info);
        names_.push_back(decl.name);
    }
    auto id_of = [&](const std::string& name) { return topo_.find(name)->id; };

    // Second pass: wire up references now that every id exists.
    for (const auto& decl : spec_.nodes) {
        NodeInfo& info = topo_.node(id_of(decl.name));
        if (decl.ha) info.ha = id_of(*decl.ha);
        if (decl.mr) info.mr = id_of(*decl.mr);
        if (decl.parent) info.parent = id_of(*decl.parent);
    }
    for (const auto& l : spec_.links) topo_.add_link(id_of(l.a), id_of(l.b), l.delay_ms);

    std::set<NodeId> ha_nodes;
    std::set<Address> denied_cns;
    for (const auto& decl : spec_.nodes)
        if (decl.kind == NodeKind::Cn && decl.roauth_deny) denied_cns.insert(*decl.addr);

    for (const auto& decl : spec_.nodes) {
        NodeId id = id_of(decl.name);
        switch (decl.kind) {
            case NodeKind::HomeAgent: {
                HaRuntime ha;
                ha.node = id;
                ha.st.address = *decl.addr;
                if (decl.policy) ha.st.visiting_traffic_policy = *decl.policy;
                ha.st.ro_denied_cns = denied_cns;
                has_.emplace(id, std::move(ha));
                ha_nodes.insert(id);
                break;
            }
            case NodeKind::MobileRouter: {
                MrRuntime mr;
                mr.node = id;
                mr.st.home_address = *decl.addr;
                mr.st.mnp = *decl.prefix;
                mrs_.emplace(id, std::move(mr));
                break;
            }
            case NodeKind::Cn: {
                CnRuntime cn;
                cn.node = id;
                cn.st.address = *decl.addr;
                cns_.emplace(id, std::move(cn));
                break;
            }
            default:
                break;
        }
    }
    // Served prefixes and the MR's HA address come from the MR declarations.
    for (const auto& decl : spec_.nodes) {
        if (decl.kind != NodeKind::MobileRouter) continue;
        NodeId ha_id = id_of(*decl.ha);
        has_.at(ha_id).st.served_prefixes.push_back(*decl.prefix);
        mrs_.at(id_of(decl.name)).st.ha_address = has_.at(ha_id).st.address;
    }
    store_.set_ha_nodes(ha_nodes);

    int next_flow = 0;
    for (const auto& directive : spec_.schedule) {
        if (const auto* a = std::get_if<AttachDirective>(&directive)) {
            NodeId mr = id_of(a->mr), target = id_of(a->target);
            engine_.schedule(a->at_ms, [this, mr, target] { do_attach(mr, target); });
        } else if (const auto* s = std::get_if<SendDirective>(&directive)) {
            int flow = ++next_flow;
            NodeId src = id_of(s->src), dst = id_of(s->dst);
            flows_[flow] = FlowInfo{src, dst};
            for (int i = 0; i < s->count; ++i) {
                std::int64_t bytes = s->bytes;
                std::int64_t seq = i;
                engine_.schedule(s->at_ms + i * s->interval_ms, [this, flow, src, dst, bytes,
                                                                 seq] {
                    do_inject(flow, src, dst, bytes, seq);
                });
            }
        } else if (const auto* ls = std::get_if<LinkStateDirective>(&directive)) {
            NodeId a = id_of(ls->a), b = id_of(ls->b);
            bool up = ls->up;
            engine_.schedule(ls->at_ms, [this, a, b, up] { topo_.set_link_up(a, b, up); });
        }
    }
}

void Simulation::run() { engine_.run_until(spec_.t_end_ms); }

void Simulation::run_until(std::int64_t t_ms) { engine_.run_until(t_ms); }

std::string Simulation::trace_text() const { return render_trace(store_.records(), names_); }

NodeId Simulation::node_id(const std::string& name) const {
    const NodeInfo* info = topo_.find(name);
    if (!info) throw UnknownNode("no node named '" + name + "'");
    return info->id;
}

const Simulation::MrRuntime& Simulation::mr(const std::string& name) const {
    return mrs_.at(node_id(name));
}

const HaState& Simulation::ha(const std::string& name) const {
    return has_.at(node_id(name)).st;
}

const CnState& Simulation::cn(const std::string& name) const {
    return cns_.at(node_id(name)).st;
}

// --- plumbing -----------------------------------------------------------------

Datagram Simulation::stamp(Datagram d) {
    d.id = ++next_pkt_id_;
    int flow = -1;
    std::int64_t payload = 0;
    if (const auto* data = std::get_if<DataBody>(&d.body)) {
        flow = data->flow_id;
        payload = data->payload_bytes;
    }
    store_.register_packet(d.id, flow, payload, d.label, engine_.now());
    return d;
}

void Simulation::trace_drop(NodeId at, const Datagram& d, DropReason reason) {
    store_.record_traversal(
        TraceRecord{engine_.now(), d.id, d.label, at, at, d.layers(), reason});
}

void Simulation::trace_consume(NodeId at, const Datagram& d) {
    store_.record_traversal(
        TraceRecord{engine_.now(), d.id, d.label, at, at, d.layers(), std::nullopt});
}

void Simulation::send_to_neighbor(NodeId at, NodeId to, const Datagram& d) {
    auto delay = topo_.link_delay(at, to);
    if (!delay || !topo_.link_active(at, to)) {
        trace_drop(at, d, DropReason::Unroutable);
        return;
    }
    store_.record_traversal(
        TraceRecord{engine_.now(), d.id, d.label, at, to, d.layers(), std::nullopt});
    Datagram copy = d;
    NodeId from = at;
    engine_.schedule(*delay, [this, to, from, copy = std::move(copy)]() mutable {
        receive(to, from, std::move(copy));
    });
}

void Simulation::send_from(NodeId at, Datagram d) {
    // A home agent may itself anchor the fresh outer destination (nested
    // mobile networks behind one HA): intercept again instead of routing.
    if (auto it = has_.find(at); it != has_.end()) {
        const Address& dst = d.outer().dst;
        if (dst != it->second.st.address) {
            for (const auto& p : it->second.st.served_prefixes) {
                if (prefix_contains(p, dst)) {
                    handle_at_ha(at, std::move(d));
                    return;
                }
            }
        }
    }
    auto next = topo_.next_hop(at, d.outer().dst);
    if (!next) {
        trace_drop(at, d, DropReason::Unroutable);
        return;
    }
    send_to_neighbor(at, *next, d);
}

// --- dispatch -------------------------------------------------------------------

void Simulation::receive(NodeId at, NodeId from, Datagram d) {
    switch (topo_.node(at).kind) {
        case NodeKind::Cn:
            on_cn(at, std::move(d));
            break;
        case NodeKind::HomeAgent:
            handle_at_ha(at, std::move(d));
            break;
        case NodeKind::MobileRouter:
            on_mr(at, from, std::move(d));
            break;
        case NodeKind::Mnn:
            on_mnn(at, std::move(d));
            break;
        case NodeKind::Router:
        case NodeKind::AccessRouter:
            transit(at, std::move(d));
            break;
    }
}

void Simulation::transit(NodeId at, Datagram d) {
    const NodeInfo& info = topo_.node(at);
    if (info.addr && *info.addr == d.outer().dst) {
        trace_consume(at, d);  // addressed to the router itself
        return;
    }
    send_from(at, std::move(d));
}

void Simulation::handle_at_ha(NodeId at, Datagram d) {
    HaRuntime& ha = has_.at(at);
    const Address& dst = d.outer().dst;

    bool served = false;
    for (const auto& p : ha.st.served_prefixes)
        if (prefix_contains(p, dst)) served = true;
    if (dst != ha.st.address && !served) {
        transit(at, std::move(d));  // ordinary forwarding through the HA
        return;
    }

    HaAction action = ha_intercept(ha.st, d, engine_.now(), cfg_.max_encap_depth);
    if (auto* send = std::get_if<SendOut>(&action)) {
        send_from(at, std::move(send->d));
    } else if (auto* home = std::get_if<ForwardAtHome>(&action)) {
        for (auto& [id, mr] : mrs_) {
            if (mr.st.home_address == home->mr_home) {
                send_to_neighbor(at, id, home->d);
                return;
            }
        }
        trace_drop(at, d, DropReason::Unroutable);
    } else if (auto* local = std::get_if<DeliverLocal>(&action)) {
        ha_consume(at, ha, local->d);
    } else if (auto* dropped = std::get_if<DropPacket>(&action)) {
        trace_drop(at, d, dropped->reason);
    }
}

void Simulation::ha_consume(NodeId at, HaRuntime& ha, const Datagram& d) {
    if (const auto* bu = std::get_if<BindingUpdateBody>(&d.body)) {
        trace_consume(at, d);
        Datagram back = ha_on_binding_update(ha.st, *bu, engine_.now());
        send_from(at, stamp(std::move(back)));
        return;
    }
    if (const auto* req = std::get_if<RoAuthRequestBody>(&d.body)) {
        trace_consume(at, d);
        const Address mr_home = d.outer().src;
        auto entry = ha.st.cache.find(mr_home);
        if (entry == ha.st.cache.end() || entry->second.expires_at_ms <= engine_.now()) {
            trace_drop(at, d, DropReason::NoBinding);
            return;
        }
        Datagram ack;
        ack.headers = {HopHeader{ha.st.address, mr_home}};
        ack.body = ha_on_ro_auth_request(ha.st, *req);
        ack.label = TraceKind::RoAuthAck;
        if (entry->second.at_home) {
            send_from(at, stamp(std::move(ack)));
        } else {
            send_from(at, stamp(encapsulate(ack, ha.st.address, entry->second.coa,
                                            cfg_.max_encap_depth)));
        }
        return;
    }
    trace_consume(at, d);  // stray: nothing to do with it, but it was addressed here
}

void Simulation::on_mr(NodeId at, NodeId from, Datagram d) {
    MrRuntime& mr = mrs_.at(at);

    if (is_mobile_network_member(at, from)) {
        on_mr_ingress(at, mr, std::move(d));
        return;
    }

    const Address& dst = d.outer().dst;
    bool for_me = (mr.st.current_coa && dst == *mr.st.current_coa) || dst == mr.st.home_address;

    if (for_me && d.layers() >= 2) {
        // Direct traffic from an Active correspondent bypasses the home tunnel.
        if (ro_enabled() && d.outer().src != mr.st.ha_address) {
            auto entry = mr.reg.entries.find(d.outer().src);
            if (entry != mr.reg.entries.end() &&
                entry->second.state == CnRegistryEntry::State::Active) {
                Datagram inner = decapsulate(d);
                if (!prefix_contains(mr.st.mnp, inner.outer().dst)) {
                    trace_drop(at, d, DropReason::NotMnp);
                    return;
                }
                mr_forward_inbound(at, mr, std::move(inner));
                return;
            }
        }
        ForwardAction action = mr_on_tunnel_packet(mr.st, d);
        if (auto* send = std::get_if<SendOut>(&action)) {
            mr_forward_inbound(at, mr, std::move(send->d));
        } else if (auto* local = std::get_if<DeliverLocal>(&action)) {
            mr_consume_control(at, mr, local->d);
        } else if (auto* dropped = std::get_if<DropPacket>(&action)) {
            trace_drop(at, d, dropped->reason);
        }
        return;
    }
    if (for_me) {
        mr_consume_control(at, mr, d);  // plain BA / BA_CN addressed to the CoA
        return;
    }
    if (mr.st.at_home && prefix_contains(mr.st.mnp, dst)) {
        send_from(at, std::move(d));  // zero-length tunnel: plain delivery inward
        return;
    }
    // Not ours: typically a packet to a care-of address this MR no longer holds.
    trace_drop(at, d, DropReason::Unroutable);
}

/// Decapsulated (or direct) traffic heading into the mobile network.
void Simulation::mr_forward_inbound(NodeId at, MrRuntime& mr, Datagram inner) {
    if (ro_enabled() && std::holds_alternative<DataBody>(inner.body)) {
        InboundResult result =
            mr_on_inbound_data(mr.st, mr.reg, inner, engine_.now(), cfg_.max_encap_depth);
        send_from(at, std::move(result.to_mnn));
        if (result.auth_request) send_from(at, stamp(std::move(*result.auth_request)));
        return;
    }
    send_from(at, std::move(inner));
}

void Simulation::mr_consume_control(NodeId at, MrRuntime& mr, const Datagram& d) {
    if (const auto* ba = std::get_if<BindingAckBody>(&d.body)) {
        trace_consume(at, d);
        if (d.outer().src == mr.st.ha_address)
            mr_on_binding_ack(mr.st, *ba);
        else
            mr_on_cn_binding_ack(mr.reg, d.outer().src, *ba);
        return;
    }
    if (const auto* ack = std::get_if<RoAuthAckBody>(&d.body)) {
        trace_consume(at, d);
        for (auto& bu : mr_on_ro_auth_ack(mr.st, mr.reg, *ack, engine_.now())) {
            std::int64_t seq = std::get<BindingUpdateBody>(bu.body).seq;
            send_from(at, stamp(std::move(bu)));
            schedule_cn_bu_timeout(at, ack->cn, seq);
        }
        return;
    }
    trace_consume(at, d);  // stray control or data addressed to the MR itself
}

void Simulation::on_mr_ingress(NodeId at, MrRuntime& mr, Datagram d) {
    const Address& dst = d.outer().dst;
    if (prefix_contains(mr.st.mnp, dst)) {
        send_from(at, std::move(d));  // local delivery inside the mobile network
        return;
    }
    ForwardAction action = ro_enabled()
                               ? mr_on_mnn_packet_ro(mr.st, mr.reg, d, cfg_.max_encap_depth)
                               : mr_on_egress_from_mnn(mr.st, d, cfg_.max_encap_depth);
    if (auto* send = std::get_if<SendOut>(&action)) {
        send_from(at, std::move(send->d));
    } else if (auto* dropped = std::get_if<DropPacket>(&action)) {
        trace_drop(at, d, dropped->reason);
    }
}

void Simulation::on_cn(NodeId at, Datagram d) {
    CnRuntime& cn = cns_.at(at);
    if (d.outer().dst != cn.st.address) {
        transit(at, std::move(d));
        return;
    }
    while (d.layers() > 1 && d.outer().dst == cn.st.address) d = decapsulate(d);
    if (d.outer().dst != cn.st.address) {
        trace_drop(at, d, DropReason::Unroutable);
        return;
    }
    if (const auto* bu = std::get_if<BindingUpdateBody>(&d.body)) {
        if (bu->audience == BuAudience::ToCorrespondent) {
            trace_consume(at, d);
            send_from(at, stamp(cn_on_binding_update(cn.st, *bu)));
            return;
        }
    }
    if (std::holds_alternative<DataBody>(d.body)) {
        consume_data(at, d);
        return;
    }
    trace_consume(at, d);
}

void Simulation::on_mnn(NodeId at, Datagram d) {
    const NodeInfo& info = topo_.node(at);
    if (!info.addr || *info.addr != d.outer().dst) {
        trace_drop(at, d, DropReason::Unroutable);
        return;
    }
    consume_data(at, d);
}

void Simulation::consume_data(NodeId at, const Datagram& d) {
    trace_consume(at, d);
    if (const auto* data = std::get_if<DataBody>(&d.body)) {
        auto flow = flows_.find(data->flow_id);
        if (flow != flows_.end()) {
            auto shortest = topo_.shortest_path_len(flow->second.src, flow->second.dst);
            store_.note_delivery_distance(d.id, shortest.value_or(0));
        }
    }
}

// --- scheduled actions -----------------------------------------------------------

void Simulation::do_attach(NodeId mr_node, NodeId target) {
    MrRuntime& mr = mrs_.at(mr_node);
    store_.note_attach(engine_.now());
    Address coa = topo_.apply_attach(mr_node, target);

    if (topo_.node(target).kind == NodeKind::HomeAgent) {
        mr_on_attach_home(mr.st);
        ha_register_at_home(has_.at(target).st, mr.st.mnp, mr.st.home_address, engine_.now());
        return;  // trivially bound, nothing to signal
    }

    Datagram bu = stamp(mr_on_attach(mr.st, coa));
    std::int64_t seq = mr.st.bu_seq;
    send_from(mr_node, std::move(bu));
    schedule_home_bu_timeout(mr_node, seq);

    if (ro_enabled()) {
        // The HA registration went out first; now fan out to the
        // correspondents that already hold a binding.
        for (auto& bu_cn : mr_on_handoff_broadcast(mr.st, mr.reg, coa)) {
            const auto& body = std::get<BindingUpdateBody>(bu_cn.body);
            Address cn = bu_cn.outer().dst;
            std::int64_t cn_seq = body.seq;
            send_from(mr_node, stamp(std::move(bu_cn)));
            schedule_cn_bu_timeout(mr_node, cn, cn_seq);
        }
    }
}

void Simulation::do_inject(int flow_id, NodeId src, NodeId dst, std::int64_t bytes,
                           std::int64_t seq) {
    const NodeInfo& src_info = topo_.node(src);
    const NodeInfo& dst_info = topo_.node(dst);
    DataBody body{flow_id, seq, bytes};

    Datagram d;
    if (src_info.kind == NodeKind::Cn) {
        d = cn_send(cns_.at(src).st, *dst_info.addr, body, cfg_.max_encap_depth);
    } else {
        d.headers = {HopHeader{*src_info.addr, *dst_info.addr}};
        d.body = body;
        d.label = TraceKind::Data;
    }
    send_from(src, stamp(std::move(d)));
}

void Simulation::schedule_home_bu_timeout(NodeId mr_node, std::int64_t seq) {
    engine_.schedule(cfg_.bu_retransmit_ms, [this, mr_node, seq] {
        MrRuntime& mr = mrs_.at(mr_node);
        if (mr.st.bound || !mr.st.pending_bu || mr.st.pending_bu->seq != seq) return;
        if (mr.st.pending_bu->retried) return;  // one retransmission, then stay unbound
        ++mr.st.bu_seq;
        mr.st.pending_bu = MrState::PendingBu{mr.st.bu_seq, true};
        Datagram bu;
        bu.headers = {HopHeader{*mr.st.current_coa, mr.st.ha_address}};
        bu.body = BindingUpdateBody{HomeSubject{mr.st.mnp, mr.st.home_address},
                                    *mr.st.current_coa, mr.st.bu_seq,
                                    kDefaultBindingLifetimeMs, BuAudience::ToHomeAgent};
        bu.label = TraceKind::Bu;
        std::int64_t new_seq = mr.st.bu_seq;
        send_from(mr_node, stamp(std::move(bu)));
        schedule_home_bu_timeout(mr_node, new_seq);
    });
}

void Simulation::schedule_cn_bu_timeout(NodeId mr_node, const Address& cn, std::int64_t seq) {
    engine_.schedule(cfg_.bu_retransmit_ms, [this, mr_node, cn, seq] {
        MrRuntime& mr = mrs_.at(mr_node);
        auto it = mr.reg.entries.find(cn);
        if (it == mr.reg.entries.end()) return;
        CnRegistryEntry& entry = it->second;
        if (!entry.awaiting_ba || entry.last_bu_seq != seq) return;
        if (entry.bu_retried) return;  // give up; CN stays on the stale CoA
        entry.bu_retried = true;
        if (!mr.st.current_coa) return;
        for (const Address& mnn : entry.mnns) {
            Datagram bu;
            bu.headers = {HopHeader{*mr.st.current_coa, cn}};
            bu.body = BindingUpdateBody{mnn, *mr.st.current_coa, ++entry.last_bu_seq,
                                        kDefaultBindingLifetimeMs, BuAudience::ToCorrespondent};
            bu.label = TraceKind::BuCn;
            send_from(mr_node, stamp(std::move(bu)));
        }
        schedule_cn_bu_timeout(mr_node, cn, entry.last_bu_seq);
    });
}

bool Simulation::is_mobile_network_member(NodeId mr_node, NodeId from) const {
    const NodeInfo& f = topo_.node(from);
    if (f.kind == NodeKind::Mnn) return f.mr == mr_node;
    if (f.kind == NodeKind::MobileRouter) return f.parent == mr_node;
    return false;
}

RunResult run_scenario(const ScenarioSpec& spec, RunConfig cfg) {
    Simulation sim(spec, cfg);
    sim.run();
    return RunResult{sim.trace(), sim.trace_text(), sim.report()};
}

}  // namespace nemo
