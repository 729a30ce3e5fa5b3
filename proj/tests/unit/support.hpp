#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>

namespace testing {

using cplx = std::complex<double>;

// SplitMix64: tiny, seedable and identical on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * static_cast<double>(next() >> 11) * 0x1p-53; }

    // Uniform in the annulus lo <= |z| <= hi intersected with |Im z| <= im_max.
    cplx annulus(double lo, double hi, double im_max) {
        for (;;) {
            const cplx z{uniform(-hi, hi), uniform(-im_max, im_max)};
            if (std::abs(z) >= lo && std::abs(z) <= hi) return z;
        }
    }

private:
    std::uint64_t state_;
};

inline double rel_err(cplx got, cplx want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

}  // namespace testing
