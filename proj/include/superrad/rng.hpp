// Counter-based random streams (Philox4x32-10).
//
// Each trajectory draws from its own stream, keyed by a 64-bit seed and
// indexed by a 128-bit block counter, so ensemble output is independent of
// worker scheduling.  Per-trajectory seeds are derived from the ensemble
// master seed with derive_stream_seed(), a fixed one-block Philox evaluation.
#pragma once

#include <array>
#include <cstdint>

namespace superrad {

/// One 10-round Philox4x32 block: 128-bit counter, 64-bit key -> 128 bits.
std::array<uint32_t, 4> philox4x32(const std::array<uint32_t, 4>& counter,
                                   uint64_t key);

/// Deterministic splitting function: seed of stream `index` under `master`.
uint64_t derive_stream_seed(uint64_t master, uint64_t index);

/// Stream of uniform doubles; 53-bit mantissas from successive blocks.
class CounterRng {
  public:
    explicit CounterRng(uint64_t seed) : key_(seed) {}

    /// Uniform on [0, 1).
    double uniform();
    /// Uniform on (0, 1); rejects exact zeros (probability 2^-53 each draw).
    double uniform_open();
    /// Uniform on (0, 1]; used as a jump threshold.
    double threshold() { return 1.0 - uniform(); }

    uint64_t next_u64();

  private:
    uint64_t key_;
    uint64_t block_ = 0;
    std::array<uint32_t, 4> buf_{};
    int have_ = 0; // unread 32-bit words left in buf_
};

} // namespace superrad
