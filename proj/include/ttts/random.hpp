#pragma once

#include <cstdint>
#include <random>

namespace ttts {

using Rng = std::mt19937_64;

/// Named random substreams. Every random draw in a run derives from one master seed.
enum class Stream : std::uint64_t {
    init = 1,
    sketch = 2,
    sampling = 3,
    noise = 4,
    amm = 5,
    truth = 6,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for the `counter`-th draw of `stream` under `master`.
inline std::uint64_t derive_seed(std::uint64_t master, Stream stream, std::uint64_t counter = 0) {
    return splitmix64(splitmix64(master ^ splitmix64(static_cast<std::uint64_t>(stream))) + counter);
}

inline Rng make_rng(std::uint64_t master, Stream stream, std::uint64_t counter = 0) {
    return Rng(derive_seed(master, stream, counter));
}

}  // namespace ttts
