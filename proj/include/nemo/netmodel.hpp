// Addresses, prefixes, message bodies and datagrams with an explicit
// encapsulation-header stack. Everything here is an immutable value type;
// encapsulate/decapsulate return new datagrams and never mutate their input.
#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nemo/errors.hpp"

namespace nemo {

/// Opaque 128-bit locator. Ordered numerically; equality is bitwise.
struct Address {
    std::uint64_t hi = 0;
    std::uint64_t lo = 0;

    friend auto operator<=>(const Address&, const Address&) = default;

    /// Numeric addition of a small offset (used for deterministic CoA derivation).
    Address operator+(std::uint64_t n) const {
        Address r{hi, lo + n};
        if (r.lo < lo) ++r.hi;
        return r;
    }
};

/// Parses exactly 32 hex digits (case-insensitive). Returns nullopt on bad input.
std::optional<Address> parse_address(std::string_view text);

/// 32 lowercase hex digits, zero-padded.
std::string format_address(const Address& a);

/// (base, length) prefix in canonical form: bits below (128 - length) are zero.
struct Prefix {
    Address base;
    int length = 0;  // in [0, 128]

    friend auto operator<=>(const Prefix&, const Prefix&) = default;
};

/// Canonicalizes base by masking away bits below (128 - length).
Prefix make_prefix(Address base, int length);

/// True iff the top p.length bits of a equal those of p.base. Total function.
bool prefix_contains(const Prefix& p, const Address& a);

std::optional<Prefix> parse_prefix(std::string_view text);  // "<hex32>/<len>"
std::string format_prefix(const Prefix& p);

// --- message bodies ---------------------------------------------------------

enum class BuAudience { ToHomeAgent, ToCorrespondent };
enum class BaStatus { Accepted, Rejected };

struct DataBody {
    int flow_id = 0;
    std::int64_t seq = 0;
    std::int64_t payload_bytes = 0;
};

/// Subject of a home-registration BU: the mobile network prefix plus the
/// MR home address the binding cache is keyed by.
struct HomeSubject {
    Prefix mnp;
    Address mr_home;
};

struct BindingUpdateBody {
    // ToHomeAgent carries a HomeSubject, ToCorrespondent the MNN address
    // the correspondent communicates with.
    std::variant<HomeSubject, Address> subject;
    Address coa;
    std::int64_t seq = 0;
    std::int64_t lifetime_ms = 0;
    BuAudience audience = BuAudience::ToHomeAgent;
};

struct BindingAckBody {
    std::int64_t seq = 0;
    BaStatus status = BaStatus::Accepted;
};

struct RoAuthRequestBody {
    Address cn;
    Address mnn;
    std::int64_t seq = 0;
};

struct RoAuthAckBody {
    Address cn;
    bool granted = false;
    std::int64_t seq = 0;
};

using MessageBody =
    std::variant<DataBody, BindingUpdateBody, BindingAckBody, RoAuthRequestBody, RoAuthAckBody>;

/// Trace label a datagram carries through its lifetime. Data packets switch
/// to DirectData when they enter the optimized CN<->MR path.
enum class TraceKind {
    Data,
    DirectData,
    Bu,
    Ba,
    BuCn,
    BaCn,
    RoAuthReq,
    RoAuthAck,
};

std::string_view to_string(TraceKind k);

/// Fixed vocabulary of traced drop reasons.
enum class DropReason { BadTunnelSource, NotMnp, NoBinding, NotBound, PolicyVisitor, Unroutable };

std::string_view to_string(DropReason r);

// --- datagrams --------------------------------------------------------------

struct HopHeader {
    Address src;
    Address dst;

    friend bool operator==(const HopHeader&, const HopHeader&) = default;
};

/// Inner payload plus an ordered stack of encapsulation headers.
/// headers[0] is the outermost header; the stack never becomes empty.
struct Datagram {
    std::vector<HopHeader> headers;  // size >= 1
    MessageBody body;
    std::uint64_t id = 0;      // unique per run, preserved by encap/decap
    TraceKind label = TraceKind::Data;

    const HopHeader& outer() const { return headers.front(); }
    int layers() const { return static_cast<int>(headers.size()); }
};

inline constexpr int kDefaultMaxEncapDepth = 8;
inline constexpr std::int64_t kIpHeaderBytes = 40;      // one encapsulation layer
inline constexpr std::int64_t kControlBodyBytes = 24;   // flat cost of any control body

/// Pushes a new outermost header. Throws EncapDepthExceeded beyond max_depth.
Datagram encapsulate(const Datagram& d, const Address& src, const Address& dst,
                     int max_depth = kDefaultMaxEncapDepth);

/// Removes the outermost header. Throws NoInnerHeader on a single-header datagram.
Datagram decapsulate(const Datagram& d);

/// Payload bytes (control bodies billed flat) plus 40 bytes per header layer.
std::int64_t wire_size(const Datagram& d);

}  // namespace nemo
