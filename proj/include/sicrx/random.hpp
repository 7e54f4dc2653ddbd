// SPDX-License-Identifier: Apache-2.0
//
// sicrx - overloaded multi-LNB satellite receiver simulator
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef SICRX_RANDOM_HPP
#define SICRX_RANDOM_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace sicrx
{
    // SplitMix64 finalizer (Steele, Lea, Flood 2014).
    constexpr std::uint64_t splitmix64(std::uint64_t x)
    {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    // Portable random source. The engine is std::mt19937_64, whose output sequence is
    // fixed by the C++ standard; every derived variate below is computed here rather than
    // through <random> distributions (which are implementation-defined), so streams
    // reproduce bit-for-bit across standard libraries.
    //
    //   uniform_open()    : ((x >> 11) + 1) * 2^-53, in (0, 1]
    //   uniform_index(n)  : floor(x * n / 2^64)
    //   complex_normal()  : Box-Muller, sqrt(-ln u1) * exp(i 2 pi u2), E|z|^2 = 1
    class Rng
    {
    public:
        explicit Rng(std::uint64_t seed) : engine_(seed) {}

        // Independent stream for (seed, stream): engine seeded with
        // splitmix64(seed ^ splitmix64(stream)).
        static Rng for_stream(std::uint64_t seed, std::uint64_t stream)
        {
            return Rng(splitmix64(seed ^ splitmix64(stream)));
        }

        std::uint64_t next_u64() { return engine_(); }

        double uniform_open()
        {
            return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
        }

        unsigned uniform_index(unsigned n)
        {
            // High word of the 64 x 32 bit product, exact without a 128-bit type.
            const std::uint64_t x = next_u64();
            const std::uint64_t hi = (x >> 32) * n;
            const std::uint64_t lo = (x & 0xFFFFFFFFULL) * n;
            return static_cast<unsigned>((hi + (lo >> 32)) >> 32);
        }

        std::complex<double> complex_normal()
        {
            const double radius = std::sqrt(-std::log(uniform_open()));
            const double angle = 6.283185307179586476925 * uniform_open();
            return {radius * std::cos(angle), radius * std::sin(angle)};
        }

    private:
        std::mt19937_64 engine_;
    };

} // namespace sicrx

#endif
