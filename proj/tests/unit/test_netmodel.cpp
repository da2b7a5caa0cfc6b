#include <doctest.h>

#include "nemo/errors.hpp"
#include "nemo/netmodel.hpp"

using namespace nemo;

namespace {

Address addr(std::uint64_t hi, std::uint64_t lo) { return Address{hi, lo}; }

Datagram data_gram(Address src, Address dst, std::int64_t payload, std::uint64_t id = 1) {
    Datagram d;
    d.headers = {HopHeader{src, dst}};
    d.body = DataBody{1, 0, payload};
    d.id = id;
    return d;
}

// Bit-level reference for prefix matching, deliberately different from the
// word-mask implementation: walks the top `len` bits one by one.
bool contains_bitwise(const Prefix& p, const Address& a) {
    for (int bit = 0; bit < p.length; ++bit) {
        int pos = 127 - bit;  // bit 127 = most significant
        std::uint64_t word_a = pos >= 64 ? a.hi : a.lo;
        std::uint64_t word_p = pos >= 64 ? p.base.hi : p.base.lo;
        int shift = pos % 64;
        if (((word_a >> shift) & 1) != ((word_p >> shift) & 1)) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("address parse/format round trip") {
    auto a = parse_address("20010db8e00100000000000000000001");
    REQUIRE(a.has_value());
    CHECK(a->hi == 0x20010db8e0010000ull);
    CHECK(a->lo == 0x0000000000000001ull);
    CHECK(format_address(*a) == "20010db8e00100000000000000000001");

    CHECK(!parse_address("20010db8").has_value());                          // too short
    CHECK(!parse_address("20010db8e001000000000000000000zz").has_value());  // bad digit
    CHECK(parse_address("20010DB8E00100000000000000000001").has_value());   // case folding
}

TEST_CASE("address ordering and arithmetic") {
    CHECK(addr(0, 1) < addr(0, 2));
    CHECK(addr(0, ~0ull) < addr(1, 0));
    CHECK(addr(0, ~0ull) + 1 == addr(1, 0));  // carry into the high word
    CHECK(addr(3, 7) + 5 == addr(3, 12));
}

TEST_CASE("prefix_contains examples") {
    Address any = addr(0xdeadbeef12345678ull, 0x9abcdef012345678ull);

    // zero-length prefix matches everything
    CHECK(prefix_contains(make_prefix(Address{}, 0), any));
    CHECK(prefix_contains(make_prefix(any, 0), addr(0, 0)));

    // full-length self-match, off by one fails
    Prefix full = make_prefix(any, 128);
    CHECK(prefix_contains(full, any));
    CHECK(!prefix_contains(full, any + 1));

    // /64 membership, checked against the bit-level reference
    Prefix p64 = make_prefix(addr(0x20010db8e0010000ull, 0), 64);
    Address inside = addr(0x20010db8e0010000ull, 0x42);
    Address outside = addr(0x20010db8e0020000ull, 0x42);
    CHECK(prefix_contains(p64, inside));
    CHECK(!prefix_contains(p64, outside));
    CHECK(contains_bitwise(p64, inside));
    CHECK(!contains_bitwise(p64, outside));
}

TEST_CASE("prefix_contains agrees with the bit-level reference on random input") {
    std::uint64_t state = 0x12345678;
    auto next = [&state] {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        return state;
    };
    for (int i = 0; i < 2000; ++i) {
        Prefix p = make_prefix(addr(next(), next()), static_cast<int>(next() % 129));
        Address a = addr(next(), next());
        CHECK(prefix_contains(p, a) == contains_bitwise(p, a));
        // nearby address exercising the boundary
        Address close = p.base + (next() % 4);
        CHECK(prefix_contains(p, close) == contains_bitwise(p, close));
    }
}

TEST_CASE("prefix monotonicity: shorter prefixes contain more") {
    Prefix longer = make_prefix(addr(0x20010db8e0010000ull, 0), 64);
    Prefix shorter = make_prefix(addr(0x20010db8e0010000ull, 0), 32);
    Address inside = addr(0x20010db8e0010000ull, 99);
    REQUIRE(prefix_contains(longer, inside));
    CHECK(prefix_contains(shorter, inside));
}

TEST_CASE("make_prefix canonicalizes") {
    Prefix p = make_prefix(addr(0x20010db8e0010000ull, 0x1234), 64);
    CHECK(p.base.lo == 0);  // bits below the prefix are cleared
    CHECK(format_prefix(p) == "20010db8e00100000000000000000000/64");
    auto parsed = parse_prefix("20010db8e00100000000000000000000/64");
    REQUIRE(parsed.has_value());
    CHECK(*parsed == p);
    CHECK(!parse_prefix("20010db8e00100000000000000000000/129").has_value());
    CHECK(!parse_prefix("20010db8e00100000000000000000000").has_value());
}

TEST_CASE("encapsulate pushes an outer header and preserves the rest") {
    Address cn = addr(1, 1), mnn = addr(2, 2), ha = addr(3, 3), coa = addr(4, 4);
    Datagram inner = data_gram(cn, mnn, 1000, 7);

    Datagram outer = encapsulate(inner, ha, coa);
    REQUIRE(outer.layers() == 2);
    CHECK(outer.headers[0] == HopHeader{ha, coa});
    CHECK(outer.headers[1] == HopHeader{cn, mnn});
    CHECK(outer.id == 7);
    CHECK(inner.layers() == 1);  // input untouched

    CHECK(decapsulate(outer).headers == inner.headers);

    // nested: two layers on top, +80 bytes of headers
    Datagram nested = encapsulate(outer, addr(5, 5), addr(6, 6));
    CHECK(nested.layers() == 3);
    CHECK(wire_size(nested) == wire_size(inner) + 2 * 40);
}

TEST_CASE("encapsulate enforces the depth limit") {
    Datagram d = data_gram(addr(1, 1), addr(2, 2), 10);
    for (int i = 0; i < 7; ++i) d = encapsulate(d, addr(9, i), addr(8, i));
    CHECK(d.layers() == 8);
    CHECK_THROWS_AS(encapsulate(d, addr(9, 9), addr(8, 8)), EncapDepthExceeded);
    CHECK_THROWS_AS(encapsulate(data_gram(addr(1, 1), addr(2, 2), 0), addr(1, 2), addr(2, 1), 1),
                    EncapDepthExceeded);
}

TEST_CASE("decapsulate pops the outermost header") {
    Datagram d = data_gram(addr(1, 1), addr(2, 2), 10, 42);
    Datagram two = encapsulate(d, addr(3, 3), addr(4, 4));
    Datagram three = encapsulate(two, addr(5, 5), addr(6, 6));

    Datagram back = decapsulate(three);
    CHECK(back.layers() == 2);
    CHECK(back.headers[0] == HopHeader{addr(3, 3), addr(4, 4)});
    CHECK(back.id == 42);

    CHECK_THROWS_AS(decapsulate(d), NoInnerHeader);
}

TEST_CASE("wire_size: payload plus 40 per layer, control billed flat") {
    Datagram d = data_gram(addr(1, 1), addr(2, 2), 1000);
    CHECK(wire_size(d) == 1040);
    CHECK(wire_size(encapsulate(d, addr(3, 3), addr(4, 4))) == 1080);

    Datagram bu;
    bu.headers = {HopHeader{addr(1, 1), addr(2, 2)}};
    bu.body = BindingUpdateBody{HomeSubject{make_prefix(addr(5, 0), 64), addr(5, 1)}, addr(4, 4),
                                1, 30000, BuAudience::ToHomeAgent};
    CHECK(wire_size(bu) == 64);  // 24-byte control body + one header
}
