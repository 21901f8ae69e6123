// Copyright 2026 The QFw Authors.

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace qfw {

/// SplitMix64 finalizer. Used as the stated hash for every seed derivation in
/// the framework (per-shot streams, per-subtask seeds, readout-flip draws).
constexpr std::uint64_t mix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// derive_seed(s, {a, b}) == mix64(mix64(mix64(s) ^ a) ^ b)
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept
{
    std::uint64_t h = mix64(seed);
    for (std::uint64_t p : path)
        h = mix64(h ^ p);
    return h;
}

// Stream tags keep unrelated derivations from colliding.
namespace stream {
inline constexpr std::uint64_t shot = 0x5348'4f54ULL;       // "SHOT"
inline constexpr std::uint64_t readout = 0x5245'4144ULL;    // "READ"
inline constexpr std::uint64_t subtask = 0x5355'4254ULL;    // "SUBT"
inline constexpr std::uint64_t shuffle = 0x5348'5546ULL;    // "SHUF"
inline constexpr std::uint64_t scenario = 0x5343'454eULL;   // "SCEN"
} // namespace stream

/// Seedable generator. mt19937_64 is fully specified by the standard, and the
/// float conversion below is done by hand, so draws are identical on every
/// conforming platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound) by rejection; bound > 0.
    std::uint64_t below(std::uint64_t bound)
    {
        const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % bound;
    }

    /// A child generator on an independent derived stream.
    Rng split(std::uint64_t stream_index) { return Rng(derive_seed(engine_(), {stream_index})); }

private:
    std::mt19937_64 engine_;
};

/// Fisher-Yates with Rng::below, so the permutation is platform-independent
/// (std::shuffle is not).
template <class T>
void seeded_shuffle(std::vector<T>& items, Rng& rng)
{
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.below(i));
        std::swap(items[i - 1], items[j]);
    }
}

} // namespace qfw
