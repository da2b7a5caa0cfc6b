// NEMO basic support: mobile router and home agent state machines.
//
// Every operation here is a pure transition — (state, input) -> (state,
// outgoing datagrams/actions) — with no knowledge of the event engine.
// Returned datagrams carry id 0; the simulation stamps ids before sending.
#pragma once

#include <map>
#include <optional>
#include <set>
#include <variant>

#include "nemo/netmodel.hpp"

namespace nemo {

inline constexpr std::int64_t kDefaultBindingLifetimeMs = 30'000;
inline constexpr std::int64_t kBuRetransmitMs = 1'000;

struct BindingCacheEntry {
    Prefix mnp;
    Address mr_home;
    Address coa;
    std::int64_t seq = 0;
    std::int64_t expires_at_ms = 0;
    bool at_home = false;  // registered by returning home; traffic is not tunneled
};

enum class VisitingTrafficPolicy { Allow, Deny };

struct HaState {
    Address address;
    std::vector<Prefix> served_prefixes;
    VisitingTrafficPolicy visiting_traffic_policy = VisitingTrafficPolicy::Allow;
    std::map<Address, BindingCacheEntry> cache;  // keyed by MR home address
    std::set<Address> ro_denied_cns;             // correspondents refused RO authorization
};

struct TunnelEndpoints {
    Address local;   // MR care-of address
    Address remote;  // HA address
};

struct MrState {
    Address home_address;
    Address ha_address;
    Prefix mnp;
    std::optional<Address> current_coa;
    bool bound = false;
    std::int64_t bu_seq = 0;
    std::optional<TunnelEndpoints> tunnel;
    bool at_home = false;

    // Outstanding home registration, for the single-retransmit policy.
    struct PendingBu {
        std::int64_t seq = 0;
        bool retried = false;
    };
    std::optional<PendingBu> pending_bu;
};

// --- actions ------------------------------------------------------------------

struct SendOut {
    Datagram d;
};  // route toward the outer destination
struct DeliverLocal {
    Datagram d;
};  // this node consumes the (decapsulated) datagram
struct DropPacket {
    DropReason reason;
};

using ForwardAction = std::variant<SendOut, DeliverLocal, DropPacket>;

/// ha_intercept outcome for traffic to a served prefix when the binding was
/// registered at home: forward unchanged straight to the MR, no tunnel.
struct ForwardAtHome {
    Datagram d;
    Address mr_home;
};

using HaAction = std::variant<SendOut, ForwardAtHome, DeliverLocal, DropPacket>;

// --- mobile router ------------------------------------------------------------

/// Care-of address acquired: rebind. Returns the Binding Update to the HA
/// (sent plain, src = CoA), with the next sequence number. bound stays false
/// until the acknowledgement arrives.
Datagram mr_on_attach(MrState& mr, const Address& coa);

/// Returning home: trivially bound, zero-length tunnel, no signaling.
void mr_on_attach_home(MrState& mr);

/// Acknowledgement from the HA for the home registration.
void mr_on_binding_ack(MrState& mr, const BindingAckBody& ba);

/// Encapsulated packet on the egress interface, addressed to the CoA.
/// Outer source must be the HA; the decapsulated destination must be inside
/// the MNP (or the MR itself, for control riding the tunnel).
ForwardAction mr_on_tunnel_packet(const MrState& mr, const Datagram& d);

/// Packet from the mobile network heading out: reverse-tunnel to the HA.
/// Visitor traffic (source outside the MNP) is tunneled all the same; the
/// HA-side policy decides its fate.
ForwardAction mr_on_egress_from_mnn(const MrState& mr, const Datagram& d,
                                    int max_depth = kDefaultMaxEncapDepth);

// --- home agent ----------------------------------------------------------------

/// Registration (or refresh) from an MR. Stale sequence numbers are rejected
/// without touching the cache. Throws UnknownPrefix if the subject prefix is
/// not served here. Returns the Binding Acknowledgement, addressed to the CoA.
Datagram ha_on_binding_update(HaState& ha, const BindingUpdateBody& bu, std::int64_t now_ms);

/// Registers an MR that returned home (no BU exchange).
void ha_register_at_home(HaState& ha, const Prefix& mnp, const Address& mr_home,
                         std::int64_t now_ms);

/// Datagram arriving at the HA: tunnel traffic for served prefixes toward
/// the bound CoA, terminate the reverse tunnel (with the visiting-traffic
/// policy check), hand local control up. Drops are actions, not errors.
HaAction ha_intercept(const HaState& ha, const Datagram& d, std::int64_t now_ms,
                      int max_depth = kDefaultMaxEncapDepth);

/// Live (unexpired) cache entry whose MNP covers dst, if any.
const BindingCacheEntry* ha_find_binding(const HaState& ha, const Address& dst,
                                         std::int64_t now_ms);

}  // namespace nemo
