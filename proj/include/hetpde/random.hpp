#pragma once

#include <cstdint>
#include <random>

namespace hetpde {

// All stochastic sampling in the library goes through std::mt19937_64 plus
// this mapping. The mapping uses the top 53 bits of the raw draw, so the
// resulting doubles are identical on every conforming platform (the
// std::uniform_real_distribution adaptor is implementation defined and is
// deliberately avoided).
inline double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform on [0, high).
inline double uniform_below(std::mt19937_64& rng, double high) {
    return uniform_unit(rng) * high;
}

}
