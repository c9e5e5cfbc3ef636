#pragma once

#include <cstdint>

namespace apcre {

// splitmix64 finalizer
std::uint64_t mix64(std::uint64_t x);

// Deterministic counter-based generator. Streams are keyed by (seed, k1, k2)
// and advance a counter through the splitmix64 finalizer, so draws are
// reproducible bit-for-bit across platforms. The normal variate uses an
// explicit Box-Muller pair instead of std::normal_distribution, whose output
// sequence is implementation-defined.
class CounterRng {
  public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t k1 = 0, std::uint64_t k2 = 0);

    std::uint64_t next_u64();
    double next_double();  // uniform on [0, 1)
    double next_normal();  // standard normal

  private:
    std::uint64_t base_ = 0;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace apcre
