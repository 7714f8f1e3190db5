#include <em/rng.hpp>

#include <cmath>

namespace em {

namespace {

// splitmix64 (Steele, Lea, Vigna); fully specified, cross-platform
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr Real kTwoPi = 6.283185307179586476925286766559005768;

} // namespace

Rng::Rng(uint64_t seed) : state_(seed) {
    // warm up so small seeds decorrelate
    splitmix64(state_);
    splitmix64(state_);
}

uint64_t Rng::next_u64() { return splitmix64(state_); }

Real Rng::uniform01() {
    return static_cast<Real>(next_u64() >> 11) * 0x1.0p-53;
}

Real Rng::uniform(Real lo, Real hi) { return lo + (hi - lo) * uniform01(); }

Real Rng::gaussian() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    // Box-Muller; reject u1 == 0 to keep log finite
    Real u1 = uniform01();
    while (u1 <= 0) u1 = uniform01();
    const Real u2 = uniform01();
    const Real r  = std::sqrt(-2.0 * std::log(u1));
    spare_        = r * std::sin(kTwoPi * u2);
    have_spare_   = true;
    return r * std::cos(kTwoPi * u2);
}

uint64_t derive_seed(uint64_t master, uint64_t stream, uint64_t index) {
    uint64_t s = master;
    splitmix64(s);
    s ^= 0xA5A5A5A55A5A5A5AULL * (stream + 1);
    splitmix64(s);
    s ^= 0xC2B2AE3D27D4EB4FULL * (index + 1);
    return splitmix64(s);
}

} // namespace em
