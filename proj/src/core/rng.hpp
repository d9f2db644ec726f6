// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SOMSYNC_CORE_RNG_HPP
#define SOMSYNC_CORE_RNG_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace somsync {

// Deterministic across platforms and standard libraries: the generator and
// every distribution below are spelled out explicitly, so a (seed, call
// sequence) pair always yields the same bits. Trial reproducibility and the
// golden stream dumps rely on this.

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256++ (Blackman & Vigna, public domain reference implementation).
class Xoshiro256pp {
public:
    explicit Xoshiro256pp(std::uint64_t seed = 1) { reseed(seed); }

    void reseed(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t state_[4]{};
};

class Rng {
public:
    explicit Rng(std::uint64_t seed = 1) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_.next(); }

    // Uniform in [0, 1) with 53 significant bits.
    double uniform() { return static_cast<double>(engine_.next() >> 11) * 0x1.0p-53; }

    // Uniform integer in [lo, hi], inclusive, bias-free via rejection.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        if (span == 0) return static_cast<std::int64_t>(engine_.next()); // full 64-bit range
        const std::uint64_t limit = std::uint64_t(-span) % span; // 2^64 mod span
        std::uint64_t draw;
        do {
            draw = engine_.next();
        } while (draw < limit);
        return lo + static_cast<std::int64_t>(draw % span);
    }

    // Standard normal via Box-Muller; the pair is cached.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    // Circular complex Gaussian, E{|z|^2} = variance.
    std::complex<double> complex_gaussian(double variance) {
        double u1 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double u2 = uniform();
        const double radius = std::sqrt(-variance * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        return {radius * std::cos(angle), radius * std::sin(angle)};
    }

private:
    Xoshiro256pp engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Counter-based per-trial stream derivation: independent of execution order,
// so parallel trial workers reproduce the sequential run bit for bit.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t point_index,
                                 std::uint64_t trial_index) {
    std::uint64_t s = master;
    std::uint64_t a = splitmix64(s);
    s ^= point_index * 0x9e3779b97f4a7c15ULL;
    std::uint64_t b = splitmix64(s);
    s ^= trial_index * 0xd1b54a32d192ed03ULL;
    std::uint64_t c = splitmix64(s);
    return a ^ (b + 0x94d049bb133111ebULL) ^ (c << 1);
}

} // namespace somsync

#endif
