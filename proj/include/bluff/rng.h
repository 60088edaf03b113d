#ifndef BLUFF_RNG_H_
#define BLUFF_RNG_H_

#include <cstdint>
#include <random>

namespace bluff {

// All randomness flows through mt19937_64, whose output sequence is fixed by
// the standard. The standard distributions are not, so the helpers below are
// used instead to keep logs byte-identical across standard libraries.
using Rng = std::mt19937_64;

// Uniform integer in [0, n). n must be positive.
uint64_t UniformInt(Rng& rng, uint64_t n);

// Uniform double in [0, 1) with 53 bits of resolution.
double Uniform01(Rng& rng);

// Uniform double in [lo, hi).
double UniformReal(Rng& rng, double lo, double hi);

// SplitMix64 finalizer; used to derive independent sub-seeds from one master seed.
uint64_t MixSeed(uint64_t seed, uint64_t stream);

}  // namespace bluff

#endif  // BLUFF_RNG_H_
