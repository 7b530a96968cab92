#include <doctest.h>

#include <cmath>
#include <set>

#include "superrad/rng.hpp"

using namespace superrad;

// Known-answer vectors for philox4x32 with 10 rounds (Random123 kat_vectors).
TEST_CASE("philox4x32-10 known answers") {
    {
        const auto out = philox4x32({0, 0, 0, 0}, 0);
        CHECK(out[0] == 0x6627e8d5u);
        CHECK(out[1] == 0xe169c58du);
        CHECK(out[2] == 0xbc57ac4cu);
        CHECK(out[3] == 0x9b00dbd8u);
    }
    {
        const auto out = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu,
                                     0xffffffffu},
                                    0xffffffffffffffffull);
        CHECK(out[0] == 0x408f276du);
        CHECK(out[1] == 0x41c83b0eu);
        CHECK(out[2] == 0xa20bc7c6u);
        CHECK(out[3] == 0x6d5451fdu);
    }
    {
        const auto out = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu,
                                     0x03707344u},
                                    (uint64_t(0x299f31d0u) << 32) | 0xa4093822u);
        CHECK(out[0] == 0xd16cfe09u);
        CHECK(out[1] == 0x94fdccebu);
        CHECK(out[2] == 0x5001e420u);
        CHECK(out[3] == 0x24126ea1u);
    }
}

TEST_CASE("streams are deterministic and distinct") {
    CounterRng a(42), b(42), c(43);
    bool all_equal = true, any_equal_cross = false;
    for (int i = 0; i < 64; ++i) {
        const uint64_t xa = a.next_u64(), xb = b.next_u64(), xc = c.next_u64();
        all_equal = all_equal && xa == xb;
        any_equal_cross = any_equal_cross || xa == xc;
    }
    CHECK(all_equal);
    CHECK_FALSE(any_equal_cross);
}

TEST_CASE("derive_stream_seed splits without collisions over many indices") {
    std::set<uint64_t> seen;
    for (uint64_t i = 0; i < 4096; ++i)
        seen.insert(derive_stream_seed(123456789ull, i));
    CHECK(seen.size() == 4096);
    CHECK(derive_stream_seed(1, 0) != derive_stream_seed(2, 0));
    CHECK(derive_stream_seed(1, 0) == derive_stream_seed(1, 0));
}

TEST_CASE("uniform moments look uniform") {
    CounterRng rng(7);
    const int n = 200000;
    double mean = 0.0, var = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        mean += u;
        var += (u - 0.5) * (u - 0.5);
    }
    mean /= n;
    var /= n;
    CHECK(std::abs(mean - 0.5) < 5.0 / std::sqrt(12.0 * n));
    CHECK(std::abs(var - 1.0 / 12.0) < 0.002);
}

TEST_CASE("threshold draws lie in (0, 1]") {
    CounterRng rng(99);
    for (int i = 0; i < 10000; ++i) {
        const double r = rng.threshold();
        CHECK(r > 0.0);
        CHECK(r <= 1.0);
    }
}
