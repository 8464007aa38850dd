// fas-keygen: fluid-antenna-assisted physical-layer secret key generation
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

#ifndef FAS_KEYGEN_RNG_HPP
#define FAS_KEYGEN_RNG_HPP

#include <cmath>
#include <complex>
#include <cstdint>

namespace faskeygen {

// Counter-based generator built on the SplitMix64 output function: draw i of
// stream `seed` is mix64(seed * GOLDEN + i). Draws depend only on (seed, i),
// so shards seeded as seed+shard produce the same numbers on any platform and
// with any thread count. Gaussians come from Box-Muller on consecutive
// uniforms.
class CounterRng {
  public:
    explicit CounterRng(std::uint64_t seed) : base_(mix64(seed ^ 0x6a09e667f3bcc908ull)) {}

    static std::uint64_t mix64(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform on (0, 1]
    double next_uniform() {
        const std::uint64_t bits = mix64(base_ + counter_++);
        return (double)((bits >> 11) + 1) * 0x1.0p-53;
    }

    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // circularly symmetric complex Gaussian with unit variance per entry
    // (real and imaginary parts each N(0, 1/2))
    std::complex<double> next_cn() {
        const double s = 1.0 / std::sqrt(2.0);
        const double re = s * next_gaussian();
        const double im = s * next_gaussian();
        return {re, im};
    }

  private:
    std::uint64_t base_;
    std::uint64_t counter_ = 0;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace faskeygen

#endif
