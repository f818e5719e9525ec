#pragma once

#include <cassert>
#include <cmath>

#include "mpcsr/common.hpp"

namespace mpcsr {

// The ring Z_{2^L} for 1 <= L <= 64, backed by uint64 with a bitmask.
// All arithmetic wraps; nothing overflows or traps.
struct Ring {
    unsigned bits;
    u64 mask;  // 2^L - 1, all-ones for L = 64

    constexpr explicit Ring(unsigned l_bits = 64)
        : bits(l_bits), mask(l_bits >= 64 ? ~u64{0} : ((u64{1} << l_bits) - 1)) {
        assert(l_bits >= 1 && l_bits <= 64);
    }

    constexpr u64 reduce(u64 x) const { return x & mask; }
    constexpr u64 add(u64 a, u64 b) const { return (a + b) & mask; }
    constexpr u64 sub(u64 a, u64 b) const { return (a - b) & mask; }
    constexpr u64 mul(u64 a, u64 b) const { return (a * b) & mask; }
    constexpr u64 neg(u64 a) const { return (-a) & mask; }

    // Two's-complement interpretation: values with the top bit set are negative.
    constexpr bool is_negative(u64 x) const { return (x >> (bits - 1)) & 1; }

    constexpr i64 to_signed(u64 x) const {
        x &= mask;
        if (is_negative(x) && bits < 64) x |= ~mask;  // sign-extend
        return static_cast<i64>(x);
    }

    constexpr u64 from_signed(i64 x) const { return static_cast<u64>(x) & mask; }

    constexpr friend bool operator==(const Ring&, const Ring&) = default;
};

// Fixed-point codec: a real x is carried as round(2^B * x) in Z_{2^L},
// with two's-complement for negatives.
struct FixedCodec {
    Ring ring;
    unsigned frac_bits;  // B

    constexpr explicit FixedCodec(Ring r = Ring{64}, unsigned b = 16)
        : ring(r), frac_bits(b) {
        assert(b < r.bits);
    }

    double scale() const { return std::ldexp(1.0, static_cast<int>(frac_bits)); }

    // Largest |x| that encodes without wrapping: 2^(L-B-1).
    double magnitude_limit() const {
        return std::ldexp(1.0, static_cast<int>(ring.bits - frac_bits) - 1);
    }

    // round-half-even; throws MagnitudeOverflow outside the representable range
    u64 encode(double x) const {
        const double scaled = x * scale();
        const double limit = std::ldexp(1.0, static_cast<int>(ring.bits) - 1);
        if (!std::isfinite(scaled) || std::fabs(scaled) >= limit)
            throw MagnitudeOverflow("fixed-point encode out of range");
        return ring.from_signed(static_cast<i64>(std::nearbyint(scaled)));
    }

    double decode(u64 v) const {
        return static_cast<double>(ring.to_signed(v)) / scale();
    }

    RingVector encode_vector(const VectorXd& x) const {
        RingVector out(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = encode(x[i]);
        return out;
    }

    RingMatrix encode_matrix(const MatrixXd& x) const {
        RingMatrix out(x.rows(), x.cols());
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            for (Eigen::Index i = 0; i < x.rows(); ++i) out(i, j) = encode(x(i, j));
        return out;
    }

    VectorXd decode_vector(const RingVector& v) const {
        VectorXd out(v.size());
        for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = decode(v[i]);
        return out;
    }

    MatrixXd decode_matrix(const RingMatrix& v) const {
        MatrixXd out(v.rows(), v.cols());
        for (Eigen::Index j = 0; j < v.cols(); ++j)
            for (Eigen::Index i = 0; i < v.rows(); ++i) out(i, j) = decode(v(i, j));
        return out;
    }

    constexpr friend bool operator==(const FixedCodec&, const FixedCodec&) = default;
};

// Element-wise ring ops on dense containers.
inline RingVector ring_add(const Ring& r, const RingVector& a, const RingVector& b) {
    return (a + b).unaryExpr([m = r.mask](u64 v) { return v & m; });
}

inline RingVector ring_sub(const Ring& r, const RingVector& a, const RingVector& b) {
    return (a - b).unaryExpr([m = r.mask](u64 v) { return v & m; });
}

inline RingVector ring_mul(const Ring& r, const RingVector& a, const RingVector& b) {
    return (a.array() * b.array()).matrix().unaryExpr([m = r.mask](u64 v) { return v & m; });
}

inline RingVector ring_scale(const Ring& r, const RingVector& a, u64 k) {
    return a.unaryExpr([&r, k](u64 v) { return r.mul(v, k); });
}

inline RingMatrix ring_add(const Ring& r, const RingMatrix& a, const RingMatrix& b) {
    return (a + b).unaryExpr([m = r.mask](u64 v) { return v & m; });
}

inline RingMatrix ring_sub(const Ring& r, const RingMatrix& a, const RingMatrix& b) {
    return (a - b).unaryExpr([m = r.mask](u64 v) { return v & m; });
}

}  // namespace mpcsr
