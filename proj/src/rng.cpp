#include "superrad/rng.hpp"

namespace superrad {

namespace {

constexpr uint32_t kMul0 = 0xD2511F53u;
constexpr uint32_t kMul1 = 0xCD9E8D57u;
constexpr uint32_t kWeyl0 = 0x9E3779B9u;
constexpr uint32_t kWeyl1 = 0xBB67AE85u;

inline void round_once(std::array<uint32_t, 4>& x, uint32_t k0, uint32_t k1) {
    const uint64_t p0 = uint64_t(kMul0) * x[0];
    const uint64_t p1 = uint64_t(kMul1) * x[2];
    const uint32_t hi0 = uint32_t(p0 >> 32), lo0 = uint32_t(p0);
    const uint32_t hi1 = uint64_t(p1) >> 32, lo1 = uint32_t(p1);
    x = {hi1 ^ x[1] ^ k0, lo1, hi0 ^ x[3] ^ k1, lo0};
}

} // namespace

std::array<uint32_t, 4> philox4x32(const std::array<uint32_t, 4>& counter,
                                   uint64_t key) {
    std::array<uint32_t, 4> x = counter;
    uint32_t k0 = uint32_t(key), k1 = uint32_t(key >> 32);
    for (int r = 0; r < 10; ++r) {
        round_once(x, k0, k1);
        k0 += kWeyl0;
        k1 += kWeyl1;
    }
    return x;
}

uint64_t derive_stream_seed(uint64_t master, uint64_t index) {
    // Fixed tag in the upper counter words keeps this disjoint from the
    // block counters used when drawing numbers (those have upper word 0).
    const std::array<uint32_t, 4> ctr = {uint32_t(index), uint32_t(index >> 32),
                                         0x5EEDB10Cu, 0x000000001u};
    const auto out = philox4x32(ctr, master);
    return (uint64_t(out[1]) << 32) | out[0];
}

uint64_t CounterRng::next_u64() {
    if (have_ < 2) {
        buf_ = philox4x32({uint32_t(block_), uint32_t(block_ >> 32), 0u, 0u}, key_);
        ++block_;
        have_ = 4;
    }
    const uint32_t lo = buf_[4 - have_];
    const uint32_t hi = buf_[5 - have_];
    have_ -= 2;
    return (uint64_t(hi) << 32) | lo;
}

double CounterRng::uniform() {
    return double(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::uniform_open() {
    double u;
    do {
        u = uniform();
    } while (u == 0.0);
    return u;
}

} // namespace superrad
