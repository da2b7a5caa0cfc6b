#include "nemo/netmodel.hpp"

#include <cctype>
#include <charconv>

namespace nemo {

namespace {

int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

void append_hex64(std::string& out, std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    for (int shift = 60; shift >= 0; shift -= 4) out.push_back(digits[(v >> shift) & 0xf]);
}

}  // namespace

std::optional<Address> parse_address(std::string_view text) {
    if (text.size() != 32) return std::nullopt;
    Address a;
    for (int i = 0; i < 16; ++i) {
        int d = hex_digit(text[i]);
        if (d < 0) return std::nullopt;
        a.hi = (a.hi << 4) | static_cast<std::uint64_t>(d);
    }
    for (int i = 16; i < 32; ++i) {
        int d = hex_digit(text[i]);
        if (d < 0) return std::nullopt;
        a.lo = (a.lo << 4) | static_cast<std::uint64_t>(d);
    }
    return a;
}

std::string format_address(const Address& a) {
    std::string out;
    out.reserve(32);
    append_hex64(out, a.hi);
    append_hex64(out, a.lo);
    return out;
}

Prefix make_prefix(Address base, int length) {
    Prefix p;
    p.length = length;
    if (length <= 0) {
        p.base = Address{};
    } else if (length >= 128) {
        p.length = 128;
        p.base = base;
    } else if (length <= 64) {
        std::uint64_t mask = length == 64 ? ~std::uint64_t{0} : ~(~std::uint64_t{0} >> length);
        p.base.hi = base.hi & mask;
        p.base.lo = 0;
    } else {
        p.base.hi = base.hi;
        p.base.lo = base.lo & ~(~std::uint64_t{0} >> (length - 64));
    }
    return p;
}

bool prefix_contains(const Prefix& p, const Address& a) {
    int len = p.length;
    if (len <= 0) return true;
    if (len <= 64) {
        std::uint64_t mask = len == 64 ? ~std::uint64_t{0} : ~(~std::uint64_t{0} >> len);
        return (a.hi & mask) == (p.base.hi & mask);
    }
    if (a.hi != p.base.hi) return false;
    int rest = len - 64;
    std::uint64_t mask = rest == 64 ? ~std::uint64_t{0} : ~(~std::uint64_t{0} >> rest);
    return (a.lo & mask) == (p.base.lo & mask);
}

std::optional<Prefix> parse_prefix(std::string_view text) {
    auto slash = text.find('/');
    if (slash == std::string_view::npos) return std::nullopt;
    auto addr = parse_address(text.substr(0, slash));
    if (!addr) return std::nullopt;
    auto len_text = text.substr(slash + 1);
    int len = 0;
    auto [ptr, ec] = std::from_chars(len_text.data(), len_text.data() + len_text.size(), len);
    if (ec != std::errc{} || ptr != len_text.data() + len_text.size()) return std::nullopt;
    if (len < 0 || len > 128) return std::nullopt;
    return make_prefix(*addr, len);
}

std::string format_prefix(const Prefix& p) {
    return format_address(p.base) + "/" + std::to_string(p.length);
}

std::string_view to_string(TraceKind k) {
    switch (k) {
        case TraceKind::Data: return "DATA";
        case TraceKind::DirectData: return "DIRECT_DATA";
        case TraceKind::Bu: return "BU";
        case TraceKind::Ba: return "BA";
        case TraceKind::BuCn: return "BU_CN";
        case TraceKind::BaCn: return "BA_CN";
        case TraceKind::RoAuthReq: return "RO_AUTH_REQ";
        case TraceKind::RoAuthAck: return "RO_AUTH_ACK";
    }
    return "?";
}

std::string_view to_string(DropReason r) {
    switch (r) {
        case DropReason::BadTunnelSource: return "BadTunnelSource";
        case DropReason::NotMnp: return "NotMnp";
        case DropReason::NoBinding: return "NoBinding";
        case DropReason::NotBound: return "NotBound";
        case DropReason::PolicyVisitor: return "PolicyVisitor";
        case DropReason::Unroutable: return "Unroutable";
    }
    return "?";
}

Datagram encapsulate(const Datagram& d, const Address& src, const Address& dst, int max_depth) {
    if (d.layers() + 1 > max_depth)
        throw EncapDepthExceeded("encapsulation depth would exceed " + std::to_string(max_depth) +
                                 " on datagram " + std::to_string(d.id));
    Datagram out = d;
    out.headers.insert(out.headers.begin(), HopHeader{src, dst});
    return out;
}

Datagram decapsulate(const Datagram& d) {
    if (d.layers() < 2)
        throw NoInnerHeader("decapsulate on single-header datagram " + std::to_string(d.id));
    Datagram out = d;
    out.headers.erase(out.headers.begin());
    return out;
}

std::int64_t wire_size(const Datagram& d) {
    std::int64_t body = kControlBodyBytes;
    if (const auto* data = std::get_if<DataBody>(&d.body)) body = data->payload_bytes;
    return body + kIpHeaderBytes * d.layers();
}

}  // namespace nemo
