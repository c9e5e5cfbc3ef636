#include "apcre/rng.hpp"

#include <cmath>
#include <numbers>

namespace apcre {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t k1, std::uint64_t k2) {
    base_ = mix64(seed);
    base_ = mix64(base_ ^ mix64(k1));
    base_ = mix64(base_ ^ mix64(k2));
}

std::uint64_t CounterRng::next_u64() {
    return mix64(base_ + (counter_++) * 0x9e3779b97f4a7c15ULL);
}

double CounterRng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::next_normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // u1 in (0, 1]: avoids log(0)
    double u1 = 1.0 - next_double();
    double u2 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
}

}  // namespace apcre
