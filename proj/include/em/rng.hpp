#pragma once

#include <cstdint>
#include <vector>

#include <em/types.hpp>

namespace em {

/// Deterministic stream generator built on splitmix64 with hand-rolled output
/// maps (53-bit uniforms, Box-Muller normals), so a seed produces the same
/// doubles on every run and on every platform with IEEE doubles.
class Rng {
public:
    explicit Rng(uint64_t seed);

    uint64_t next_u64();
    Real     uniform01();                 // [0, 1), 53-bit
    Real     uniform(Real lo, Real hi);
    Real     gaussian();                  // standard normal, Box-Muller

private:
    uint64_t state_;
    Real     spare_   = 0;
    bool     have_spare_ = false;
};

/// Stream splitting: hash of (master, stream, index). Documented rule used by
/// the harness to derive per-trial sample/noise/layout seeds.
uint64_t derive_seed(uint64_t master, uint64_t stream, uint64_t index);

} // namespace em
