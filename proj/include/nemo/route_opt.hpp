// Route optimization on top of basic support: direct binding with a new
// correspondent (authorized through the HA) and the handoff Binding Update
// fan-out to every registered correspondent.
//
// Same conventions as nemo_bs: pure transitions, datagram ids stamped by the
// caller. MNNs have no state here at all — the optimization is invisible to
// them.
#pragma once

#include <map>
#include <set>
#include <vector>

#include "nemo/nemo_bs.hpp"

namespace nemo {

enum class CnClass { New, Pending, Registered };

struct CnRegistryEntry {
    enum class State { AuthPending, Active };

    std::set<Address> mnns;  // the mobile nodes this correspondent talks to
    State state = State::AuthPending;
    std::int64_t registered_at_ms = 0;
    std::int64_t last_bu_seq = 0;

    // Outstanding BU to this CN, for the single-retransmit policy.
    bool awaiting_ba = false;
    bool bu_retried = false;
};

/// Kept by the MR: the correspondents that talk to its mobile network.
struct CnRegistry {
    std::map<Address, CnRegistryEntry> entries;
    std::set<Address> denied;        // authorization refused: permanent BS fallback
    std::int64_t next_auth_seq = 0;  // RoAuthRequest sequence numbers
};

/// Kept by a CN: care-of address (and freshness) per mobile network node.
struct CnAddressTable {
    struct Entry {
        Address mr_coa;
        std::int64_t seq = 0;
    };
    std::map<Address, Entry> entries;  // keyed by MNN address
};

struct CnState {
    Address address;
    CnAddressTable table;
};

CnClass mr_classify_cn(const CnRegistry& reg, const Address& cn);

struct InboundResult {
    Datagram to_mnn;                       // always forwarded
    std::optional<Datagram> auth_request;  // tunneled RoAuthRequest for a new CN
};

/// Decapsulated data arrived through the home tunnel. Forwards it inward and,
/// for a previously unseen correspondent, starts the authorization handshake
/// (at most one outstanding request per CN; denied CNs never re-trigger).
InboundResult mr_on_inbound_data(const MrState& mr, CnRegistry& reg, const Datagram& inner,
                                 std::int64_t now_ms, int max_depth = kDefaultMaxEncapDepth);

/// HA's answer to an authorization request, delivered through the tunnel.
/// Granted: emit the Binding Update(s) straight to the CN (entry stays
/// AuthPending until the CN acknowledges). Denied: forget the entry and fall
/// back to basic support for good. Throws UnknownCn for an unknown subject.
std::vector<Datagram> mr_on_ro_auth_ack(const MrState& mr, CnRegistry& reg,
                                        const RoAuthAckBody& ack, std::int64_t now_ms);

/// Binding Acknowledgement from a correspondent. Completes the handshake
/// (AuthPending -> Active) or clears the handoff-BU retransmit state.
void mr_on_cn_binding_ack(CnRegistry& reg, const Address& cn, const BindingAckBody& ba);

/// Correspondent processes a BU sent on behalf of an MNN. The address table
/// only ever moves forward: stale sequence numbers are rejected unchanged.
Datagram cn_on_binding_update(CnState& cn, const BindingUpdateBody& bu);

/// Correspondent sends data: straight to the MR's care-of address when the
/// MNN is in the address table (one-layer encapsulation, original header
/// preserved), otherwise plain — which lands at the HA and may trigger the
/// new-CN handshake.
Datagram cn_send(const CnState& cn, const Address& mnn, const DataBody& body,
                 int max_depth = kDefaultMaxEncapDepth);

/// Reply from the mobile network: bypass the home tunnel for Active
/// correspondents, otherwise plain basic support.
ForwardAction mr_on_mnn_packet_ro(const MrState& mr, const CnRegistry& reg, const Datagram& d,
                                  int max_depth = kDefaultMaxEncapDepth);

/// New care-of address: one BU per (Active correspondent, MNN) pair, sent
/// directly from the new CoA. AuthPending entries get nothing.
std::vector<Datagram> mr_on_handoff_broadcast(const MrState& mr, CnRegistry& reg,
                                              const Address& new_coa);

/// HA side of the authorization: policy lookup, answered in one round trip.
RoAuthAckBody ha_on_ro_auth_request(const HaState& ha, const RoAuthRequestBody& req);

}  // namespace nemo
