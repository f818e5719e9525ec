#include "mpcsr/kernels.hpp"

namespace mpcsr {

namespace {

// sin/cos run with extra fractional bits: the angle-doubling steps amplify
// rounding noise by 2 per step, so the iteration keeps 4 guard bits and drops
// them at the end.
constexpr unsigned kTrigGuardBits = 4;
constexpr unsigned kTrigDoublings = 4;   // covers |x| <= 16 from |t| <= 1
constexpr unsigned kExpSquarings = 5;    // e^x = P5(x/32)^32
constexpr unsigned kLogInitSquarings = 7;  // init term reaches exp(-201) without blowup
constexpr int kReciprocalIters = 10;
constexpr int kLogHouseholderIters = 2;
constexpr int kLogHouseholderOrder = 8;

struct SinCos {
    RingVector sin, cos;
};

// Degree-5/6 Maclaurin start at t = x/2^n, then n double-angle steps
// (c,s) -> (c^2 - s^2, 2cs), evaluated as ((c+s)(c-s), 2cs).
SinCos sincos_pipeline(PartyEngine& eng, const RingVector& x) {
    const unsigned b = eng.codec().frac_bits;
    const unsigned sh = b + kTrigGuardBits;
    const Eigen::Index n = x.size();

    RingVector t = eng.scale_public(x, 1.0 / (1u << kTrigDoublings), b, sh);
    RingVector t2 = eng.mul_fx(t, t, sh);
    RingVector t3 = eng.mul_fx(t, t2, sh);
    RingVector t4 = eng.mul_fx(t2, t2, sh);
    RingVector t5 = eng.mul_fx(t2, t3, sh);
    RingVector t6 = eng.mul_fx(t3, t3, sh);

    RingVector s = eng.add(eng.sub(t, eng.scale_public(t3, 1.0 / 6, sh, sh)),
                           eng.scale_public(t5, 1.0 / 120, sh, sh));
    RingVector c = eng.sub(eng.add(eng.sub(eng.constant(1.0, n, sh),
                                           eng.scale_public(t2, 0.5, sh, sh)),
                                   eng.scale_public(t4, 1.0 / 24, sh, sh)),
                           eng.scale_public(t6, 1.0 / 720, sh, sh));

    for (unsigned k = 0; k < kTrigDoublings; ++k) {
        RingVector c_next = eng.mul_fx(eng.add(c, s), eng.sub(c, s), sh);
        RingVector s_next = eng.mul_public(eng.mul_fx(c, s, sh), 2);
        c = std::move(c_next);
        s = std::move(s_next);
    }
    return SinCos{eng.truncate(s, kTrigGuardBits), eng.truncate(c, kTrigGuardBits)};
}

// e^x as P5(x / 2^n)^(2^n); the Horner chain and each squaring are one round.
RingVector exp_raw(PartyEngine& eng, const RingVector& x, unsigned squarings) {
    const unsigned b = eng.codec().frac_bits;
    RingVector t = eng.scale_public(x, 1.0 / (1u << squarings), b, b);
    const Ring& r = eng.ring();
    FixedCodec fx{r, b};
    RingVector acc = eng.constant(1.0 / 120, x.size(), b);
    const double coeffs[] = {1.0 / 24, 1.0 / 6, 0.5, 1.0, 1.0};
    for (double coef : coeffs) acc = eng.add_public(eng.mul_fx(acc, t), fx.encode(coef));
    for (unsigned k = 0; k < squarings; ++k) acc = eng.mul_fx(acc, acc);
    return acc;
}

}  // namespace

RingVector sec_square(PartyEngine& eng, const RingVector& x) { return eng.mul_fx(x, x); }

RingVector sec_sin(PartyEngine& eng, const RingVector& x) { return sincos_pipeline(eng, x).sin; }

RingVector sec_cos(PartyEngine& eng, const RingVector& x) { return sincos_pipeline(eng, x).cos; }

RingVector sec_exp(PartyEngine& eng, const RingVector& x) {
    return exp_raw(eng, x, kExpSquarings);
}

// Newton-Raphson z <- z(2 - xz). The seed 3*e^(0.5-x) + 0.003 keeps xz in
// (0, 2) across [0.1, 100], so every point contracts.
RingVector sec_reciprocal(PartyEngine& eng, const RingVector& x) {
    const unsigned b = eng.codec().frac_bits;
    FixedCodec fx{eng.ring(), b};
    const Eigen::Index n = x.size();

    RingVector arg = eng.sub(eng.constant(0.5, n, b), x);
    RingVector z = eng.add_public(eng.mul_public(exp_raw(eng, arg, kExpSquarings), 3),
                                  fx.encode(0.003));
    const RingVector two = eng.constant(2.0, n, b);
    for (int k = 0; k < kReciprocalIters; ++k) {
        RingVector xz = eng.mul_fx(x, z);
        z = eng.mul_fx(z, eng.sub(two, xz));
    }
    return z;
}

// Householder refinement of y toward ln(x): with h = 1 - x*e^-y the update
// y <- y - sum_j h^j / j recovers y - (y - ln x) up to O(h^9).
RingVector sec_log(PartyEngine& eng, const RingVector& x) {
    const unsigned b = eng.codec().frac_bits;
    const Ring& r = eng.ring();
    FixedCodec fx{r, b};
    const Eigen::Index n = x.size();

    // y0 = x/120 - 20*e^(-2x-1) + 3
    RingVector init_arg = eng.add_public(eng.mul_public(x, r.from_signed(-2)), fx.encode(-1.0));
    RingVector decay = exp_raw(eng, init_arg, kLogInitSquarings);
    RingVector y = eng.add_public(eng.add(eng.scale_public(x, 1.0 / 120, b, b),
                                          eng.mul_public(decay, r.from_signed(-20))),
                                  fx.encode(3.0));

    const RingVector one = eng.constant(1.0, n, b);
    for (int it = 0; it < kLogHouseholderIters; ++it) {
        RingVector em = exp_raw(eng, eng.neg(y), kExpSquarings);
        RingVector h = eng.sub(one, eng.mul_fx(x, em));
        RingVector pow[kLogHouseholderOrder + 1];
        pow[1] = h;
        pow[2] = eng.mul_fx(h, h);
        pow[3] = eng.mul_fx(pow[2], h);
        pow[4] = eng.mul_fx(pow[2], pow[2]);
        pow[5] = eng.mul_fx(pow[2], pow[3]);
        pow[6] = eng.mul_fx(pow[3], pow[3]);
        pow[7] = eng.mul_fx(pow[3], pow[4]);
        pow[8] = eng.mul_fx(pow[4], pow[4]);
        RingVector corr = h;
        for (int j = 2; j <= kLogHouseholderOrder; ++j)
            corr = eng.add(corr, eng.scale_public(pow[j], 1.0 / j, b, b));
        y = eng.sub(y, corr);
    }
    return y;
}

}  // namespace mpcsr
