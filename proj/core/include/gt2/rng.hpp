#pragma once

#include <cstdint>
#include <random>

namespace gt2 {

// Deterministic RNG wrapper. std::mt19937_64 is fully specified by the
// standard; the distributions below are hand-rolled so streams are identical
// across standard library implementations.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // uniform in [0, 1)
    double uniform() {
        return (next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    int uniform_int(int lo, int hi);  // inclusive bounds

    // standard normal via Box-Muller
    double normal();

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace gt2
