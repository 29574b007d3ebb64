#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "lwcmap/errors.hpp"

namespace lwcmap {

// splitmix64 generator. Everything random in the library goes through this
// type so a fixed seed gives bit-identical results regardless of platform
// or standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n), n > 0
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(next_u64() % n); }

    // standard normal via Box-Muller; u1 drawn from (0,1] so the log is finite
    double normal() {
        double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
        double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = below(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

// Derives a decorrelated sub-seed for stream `stream` (per tree, per fold,
// per experiment cell). Documented rule: one splitmix64 step of
// seed XOR (golden * (stream + 1)).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    Rng r(seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
    return r.next_u64();
}

// K disjoint test-index sets covering 0..n-1: one seeded shuffle, then
// contiguous blocks; the first n % k folds take the extra element.
// Indices within a fold are returned sorted.
inline std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t k,
                                                        std::uint64_t seed) {
    if (k < 2) fail("InvalidConfig", "fold count must be >= 2");
    if (n < k) fail("InsufficientData", "need at least one sample per fold");
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    std::vector<std::vector<std::size_t>> folds(k);
    std::size_t base = n / k, extra = n % k, pos = 0;
    for (std::size_t f = 0; f < k; ++f) {
        std::size_t len = base + (f < extra ? 1 : 0);
        folds[f].assign(order.begin() + pos, order.begin() + pos + len);
        std::sort(folds[f].begin(), folds[f].end());
        pos += len;
    }
    return folds;
}

} // namespace lwcmap
