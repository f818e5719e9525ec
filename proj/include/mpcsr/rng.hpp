#pragma once

#include <random>
#include <string_view>

#include "mpcsr/common.hpp"
#include "mpcsr/ring.hpp"

namespace mpcsr {

// Deterministic RNG with portable value mappings. mt19937_64's raw output is
// pinned by the standard; the std <random> distributions are not, so all
// bounded draws are implemented here.
class Rng {
  public:
    explicit Rng(u64 seed) : eng_(seed) {}

    u64 next_u64() { return eng_(); }

    // uniform in [0, n); n > 0
    u64 below(u64 n) {
        // rejection sampling on the top range to stay unbiased
        const u64 limit = n * ((~u64{0}) / n);
        u64 v;
        do {
            v = eng_();
        } while (v >= limit);
        return v % n;
    }

    // uniform in [0, 1) with 53 bits
    double real01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * real01(); }

    bool chance(double p) { return real01() < p; }

    u64 ring_element(const Ring& r) { return eng_() & r.mask; }

    RingVector ring_vector(const Ring& r, Eigen::Index n) {
        RingVector out(n);
        for (Eigen::Index i = 0; i < n; ++i) out[i] = ring_element(r);
        return out;
    }

    RingMatrix ring_matrix(const Ring& r, Eigen::Index rows, Eigen::Index cols) {
        RingMatrix out(rows, cols);
        for (Eigen::Index j = 0; j < cols; ++j)
            for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = ring_element(r);
        return out;
    }

  private:
    std::mt19937_64 eng_;
};

inline u64 splitmix64(u64 x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline u64 fnv1a(std::string_view s, u64 h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Stable sub-seed for a named role within one experiment.
inline u64 derive_seed(u64 master, std::string_view tag) {
    return splitmix64(master ^ fnv1a(tag));
}

}  // namespace mpcsr
