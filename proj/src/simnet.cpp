#include "nemo/simnet.hpp"

#include <algorithm>
#include <cassert>
#include <deque>

#include "nemo/errors.hpp"

namespace nemo {

std::string_view to_string(NodeKind k) {
    switch (k) {
        case NodeKind::Cn: return "cn";
        case NodeKind::Router: return "router";
        case NodeKind::HomeAgent: return "ha";
        case NodeKind::AccessRouter: return "ar";
        case NodeKind::MobileRouter: return "mr";
        case NodeKind::Mnn: return "mnn";
    }
    return "?";
}

NodeId Topology::add_node(NodeInfo info) {
    info.id = NodeId{static_cast<std::int32_t>(nodes_.size()) + 1};
    nodes_.push_back(std::move(info));
    return nodes_.back().id;
}

void Topology::add_link(NodeId a, NodeId b, int delay_ms) {
    node(a);
    node(b);  // validates both ends
    links_.push_back(Link{a, b, delay_ms, true});
}

const NodeInfo& Topology::node(NodeId id) const {
    if (id.value < 1 || id.value > static_cast<std::int32_t>(nodes_.size()))
        throw UnknownNode("node id " + std::to_string(id.value));
    return nodes_[static_cast<std::size_t>(id.value) - 1];
}

NodeInfo& Topology::node(NodeId id) {
    return const_cast<NodeInfo&>(static_cast<const Topology*>(this)->node(id));
}

const NodeInfo* Topology::find(const std::string& name) const {
    for (const auto& n : nodes_)
        if (n.name == name) return &n;
    return nullptr;
}

void Topology::set_link_up(NodeId a, NodeId b, bool up) {
    for (auto& l : links_) {
        if ((l.a == a && l.b == b) || (l.a == b && l.b == a)) {
            l.up = up;
            return;
        }
    }
    throw UnknownNode("no link between node " + std::to_string(a.value) + " and " +
                      std::to_string(b.value));
}

std::optional<int> Topology::link_delay(NodeId a, NodeId b) const {
    for (const auto& l : links_)
        if ((l.a == a && l.b == b) || (l.a == b && l.b == a)) return l.delay_ms;
    return std::nullopt;
}

Address Topology::apply_attach(NodeId mr, NodeId target) {
    const NodeInfo& m = node(mr);
    const NodeInfo& t = node(target);
    if (m.kind != NodeKind::MobileRouter) throw UnknownNode("attach: " + m.name + " is not an MR");
    Address coa;
    switch (t.kind) {
        case NodeKind::AccessRouter:
            if (!t.prefix) throw UnknownNode("attach: AR " + t.name + " advertises no prefix");
            coa = t.prefix->base + static_cast<std::uint64_t>(mr.value);
            break;
        case NodeKind::MobileRouter:
            // Nested attachment: CoA comes out of the outer MR's MNP.
            if (!t.prefix) throw UnknownNode("attach: MR " + t.name + " has no MNP");
            coa = t.prefix->base + static_cast<std::uint64_t>(mr.value);
            break;
        case NodeKind::HomeAgent:
            // Returning home: the home address is topologically correct again.
            if (!m.addr) throw UnknownNode("attach: MR " + m.name + " has no home address");
            coa = *m.addr;
            break;
        default:
            throw UnknownNode("attach target " + t.name + " is not an AR, MR or HA");
    }
    attachments_[mr] = target;
    coas_[mr] = coa;
    return coa;
}

void Topology::detach(NodeId mr) {
    attachments_.erase(mr);
    coas_.erase(mr);
}

std::optional<NodeId> Topology::attachment(NodeId mr) const {
    auto it = attachments_.find(mr);
    if (it == attachments_.end()) return std::nullopt;
    return it->second;
}

std::optional<Address> Topology::current_coa(NodeId mr) const {
    auto it = coas_.find(mr);
    if (it == coas_.end()) return std::nullopt;
    return it->second;
}

bool Topology::is_fixed(NodeId n) const {
    NodeKind k = node(n).kind;
    return k != NodeKind::MobileRouter && k != NodeKind::Mnn;
}

bool Topology::link_active(NodeId a, NodeId b) const {
    const Link* link = nullptr;
    for (const auto& l : links_) {
        if ((l.a == a && l.b == b) || (l.a == b && l.b == a)) {
            link = &l;
            break;
        }
    }
    if (!link || !link->up) return false;

    // An MR egress link only carries traffic while it is the attachment.
    auto egress_gated = [&](NodeId x, NodeId y) {
        if (node(x).kind != NodeKind::MobileRouter) return false;
        NodeKind yk = node(y).kind;
        if (yk == NodeKind::AccessRouter || yk == NodeKind::HomeAgent) return true;
        // MR-to-MR: the child side (the one declaring the other as parent,
        // or simply whichever is attached to the other) is gated.
        if (yk == NodeKind::MobileRouter) {
            auto p = node(x).parent;
            return p && *p == y;
        }
        return false;
    };
    if (egress_gated(a, b)) return attachment(a) == std::optional<NodeId>(b);
    if (egress_gated(b, a)) return attachment(b) == std::optional<NodeId>(a);
    return true;
}

std::vector<NodeId> Topology::active_neighbors(NodeId n) const {
    std::vector<NodeId> out;
    for (const auto& l : links_) {
        NodeId other;
        if (l.a == n)
            other = l.b;
        else if (l.b == n)
            other = l.a;
        else
            continue;
        if (link_active(n, other)) out.push_back(other);
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool Topology::owns_exactly(NodeId n, const Address& dst) const {
    const NodeInfo& info = node(n);
    if (info.addr && *info.addr == dst) return true;
    if (info.kind == NodeKind::MobileRouter) {
        auto coa = current_coa(n);
        if (coa && *coa == dst) return true;
    }
    return false;
}

std::optional<NodeId> Topology::resolve_anchor(const Address& dst) const {
    // Longest-prefix match over what the fixed infrastructure can see.
    // Mobile nodes' exact addresses are deliberately invisible here.
    std::optional<NodeId> best;
    int best_len = -1;
    auto consider = [&](const Prefix& p, NodeId anchor) {
        if (!prefix_contains(p, dst)) return;
        if (p.length > best_len || (p.length == best_len && best && anchor < *best)) {
            best_len = p.length;
            best = anchor;
        }
    };
    for (const auto& n : nodes_) {
        switch (n.kind) {
            case NodeKind::Cn:
            case NodeKind::Router:
            case NodeKind::HomeAgent:
            case NodeKind::AccessRouter:
                if (n.addr) consider(make_prefix(*n.addr, 128), n.id);
                if (n.kind == NodeKind::AccessRouter && n.prefix) consider(*n.prefix, n.id);
                break;
            case NodeKind::MobileRouter:
                // The MNP is anchored at the HA serving it.
                if (n.prefix && n.ha) consider(*n.prefix, *n.ha);
                break;
            case NodeKind::Mnn:
                break;
        }
    }
    return best;
}

std::optional<NodeId> Topology::next_hop(NodeId at, const Address& dst) const {
    const NodeInfo& here = node(at);

    if (here.kind == NodeKind::Mnn) {
        // Default route: everything goes to the MR in front of the node.
        if (here.mr && link_active(at, *here.mr)) return here.mr;
        return std::nullopt;
    }

    if (here.kind == NodeKind::MobileRouter) {
        if (here.prefix && prefix_contains(*here.prefix, dst)) {
            // Internal delivery: exact neighbor owner inside the mobile network.
            for (NodeId nb : active_neighbors(at))
                if (owns_exactly(nb, dst)) return nb;
            return std::nullopt;
        }
        return attachment(at);  // egress; nullopt while detached
    }

    // Fixed infrastructure. A directly attached owner wins (this is how an
    // AR hands tunnel traffic to the MR holding the care-of address). Only
    // the care-of address of an attached MR is visible here; home addresses
    // and MNN addresses stay behind the MNP anchor.
    for (NodeId nb : active_neighbors(at)) {
        const NodeInfo& nbi = node(nb);
        if (nbi.kind == NodeKind::MobileRouter) {
            auto coa = current_coa(nb);
            if (coa && *coa == dst) return nb;
        } else if (nbi.kind != NodeKind::Mnn && nbi.addr && *nbi.addr == dst) {
            return nb;
        }
    }

    auto anchor = resolve_anchor(dst);
    if (!anchor) return std::nullopt;
    if (*anchor == at) return std::nullopt;  // we are the anchor and nobody local owns it

    // BFS distances to the anchor over the fixed subgraph.
    std::map<NodeId, int> dist;
    dist[*anchor] = 0;
    std::deque<NodeId> queue{*anchor};
    while (!queue.empty()) {
        NodeId n = queue.front();
        queue.pop_front();
        for (NodeId nb : active_neighbors(n)) {
            if (!is_fixed(nb) || dist.count(nb)) continue;
            dist[nb] = dist[n] + 1;
            queue.push_back(nb);
        }
    }

    std::optional<NodeId> best;
    int best_dist = 0;
    for (NodeId nb : active_neighbors(at)) {  // sorted by id: first minimum wins ties
        if (!is_fixed(nb)) continue;
        auto it = dist.find(nb);
        if (it == dist.end()) continue;
        if (!best || it->second < best_dist) {
            best = nb;
            best_dist = it->second;
        }
    }
    return best;
}

std::optional<int> Topology::shortest_path_len(NodeId from, NodeId to) const {
    if (from == to) return 0;
    std::map<NodeId, int> dist;
    dist[from] = 0;
    std::deque<NodeId> queue{from};
    while (!queue.empty()) {
        NodeId n = queue.front();
        queue.pop_front();
        for (NodeId nb : active_neighbors(n)) {
            if (dist.count(nb)) continue;
            dist[nb] = dist[n] + 1;
            if (nb == to) return dist[nb];
            queue.push_back(nb);
        }
    }
    return std::nullopt;
}

// --- engine ------------------------------------------------------------------

namespace {
struct HeapOrder {
    // std::push_heap builds a max-heap; invert for earliest-first.
    template <typename P>
    bool operator()(const P& a, const P& b) const {
        if (a.time != b.time) return a.time > b.time;
        return a.seq > b.seq;
    }
};
}  // namespace

Engine::EventId Engine::schedule(std::int64_t delay_ms, Action action) {
    EventId id = next_seq_++;
    heap_.push_back(Pending{now_ + delay_ms, id, std::move(action)});
    std::push_heap(heap_.begin(), heap_.end(), HeapOrder{});
    return id;
}

void Engine::run_until(std::int64_t t_end_ms) {
    while (!heap_.empty() && heap_.front().time <= t_end_ms) {
        std::pop_heap(heap_.begin(), heap_.end(), HeapOrder{});
        Pending ev = std::move(heap_.back());
        heap_.pop_back();
        assert(ev.time >= now_);  // heap order keeps the clock monotone
        now_ = ev.time;
        if (++processed_ > event_cap_)
            throw EventStorm("event cap " + std::to_string(event_cap_) +
                             " exceeded at t=" + std::to_string(now_) + "ms; forwarding loop?");
        ev.action();
    }
    if (t_end_ms > now_) now_ = t_end_ms;
}

}  // namespace nemo
