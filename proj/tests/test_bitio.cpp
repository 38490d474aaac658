#include <doctest.h>

#include <stdexcept>

#include "adpcm/bitio.hpp"
#include "adpcm/rng.hpp"

using namespace adpcm;

TEST_CASE("pack_codes packs MSB-first with zero padding") {
    const std::vector<std::uint32_t> codes = {1, 2, 3};
    const std::vector<std::uint8_t> bytes = pack_codes(codes, 2);
    REQUIRE(bytes.size() == 1);
    CHECK(bytes[0] == 0b01101100);

    CHECK(pack_codes({}, 2).empty());
}

TEST_CASE("pack rejects out-of-range codes") {
    CHECK_THROWS_AS(pack_codes(std::vector<std::uint32_t>{4}, 2), std::invalid_argument);
}

TEST_CASE("unpack inverts pack for every width") {
    SplitMix64 rng(3);
    for (int bits = 2; bits <= 10; ++bits) {
        std::vector<std::uint32_t> codes(257);
        for (std::uint32_t& c : codes)
            c = static_cast<std::uint32_t>(rng.next() % (1ull << bits));
        const std::vector<std::uint8_t> bytes = pack_codes(codes, bits);
        CHECK(bytes.size() == (codes.size() * static_cast<std::size_t>(bits) + 7) / 8);
        CHECK(unpack_codes(bytes, bits, codes.size()) == codes);
    }
}

TEST_CASE("bit reader reports exhaustion") {
    const std::vector<std::uint8_t> bytes = {0xff};
    BitReader r(bytes);
    CHECK(r.get(8) == 0xffu);
    CHECK_THROWS_AS(r.get(1), std::out_of_range);
}

TEST_CASE("mixed-width writes read back in order") {
    BitWriter w;
    w.put(0b101, 3);
    w.put(0b01, 2);
    w.put(0x1ff, 9);
    REQUIRE(w.bit_count() == 14);
    BitReader r(w.bytes());
    CHECK(r.get(3) == 0b101u);
    CHECK(r.get(2) == 0b01u);
    CHECK(r.get(9) == 0x1ffu);
}
