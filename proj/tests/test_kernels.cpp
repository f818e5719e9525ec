#include <cmath>
#include <numbers>

#include "doctest.h"
#include "mpcsr/kernels.hpp"

using namespace mpcsr;

namespace {

const FixedCodec kCodec{};

// run a kernel over both parties' shares and decode the reconstruction
template <typename Kernel>
VectorXd run_kernel(Kernel kernel, const VectorXd& inputs, u64 seed = 42) {
    const Eigen::Index n = inputs.size();
    const RingVector encoded = kCodec.encode_vector(inputs);
    Rng mask_rng(seed ^ 0x5eed);
    const RingVector mask = mask_rng.ring_vector(kCodec.ring, n);
    auto [r0, r1] = run_pair(kCodec, seed, [&](PartyEngine& eng) {
        RingVector mine = eng.party() == 0 ? mask : ring_sub(kCodec.ring, encoded, mask);
        return kernel(eng, mine);
    });
    VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) out[i] = kCodec.decode(kCodec.ring.add(r0[i], r1[i]));
    return out;
}

VectorXd sample_uniform(double lo, double hi, int n, u64 seed) {
    Rng rng(seed);
    VectorXd v(n);
    // quantized to the fixed-point grid: the tolerance covers the kernel, not
    // the input encoding
    for (int i = 0; i < n; ++i) v[i] = kCodec.decode(kCodec.encode(rng.uniform(lo, hi)));
    return v;
}

}  // namespace

TEST_SUITE_BEGIN("kernels");

TEST_CASE("sec_square matches x^2") {
    VectorXd xs = sample_uniform(-10, 10, 500, 1);
    xs[0] = 0.0;
    xs[1] = 1.0;
    const VectorXd got = run_kernel(sec_square, xs);
    CHECK(std::fabs(got[0]) <= 3.1e-5);
    CHECK(std::fabs(got[1] - 1.0) <= 3.1e-5);
    for (int i = 0; i < xs.size(); ++i)
        CHECK(std::fabs(got[i] - xs[i] * xs[i]) <= std::ldexp(1.0, 2 - 16));
}

TEST_CASE("sec_sin within 1e-3 on [-pi, pi]") {
    VectorXd xs = sample_uniform(-std::numbers::pi, std::numbers::pi, 1000, 2);
    xs[0] = 0.0;
    xs[1] = std::numbers::pi / 2;
    xs[2] = 0.7;
    const VectorXd got = run_kernel(sec_sin, xs);
    CHECK(std::fabs(got[0]) <= std::ldexp(1.0, 4 - 16));
    CHECK(std::fabs(got[1] - 1.0) <= 1e-3);
    CHECK(std::fabs(got[2] - 0.644217687237691) <= 1e-3);
    for (int i = 0; i < xs.size(); ++i) CHECK(std::fabs(got[i] - std::sin(xs[i])) <= 1e-3);
}

TEST_CASE("sec_cos within 1e-3 on [-pi, pi]") {
    VectorXd xs = sample_uniform(-std::numbers::pi, std::numbers::pi, 1000, 3);
    xs[0] = 0.0;
    const VectorXd got = run_kernel(sec_cos, xs);
    CHECK(std::fabs(got[0] - 1.0) <= std::ldexp(1.0, 4 - 16));
    for (int i = 0; i < xs.size(); ++i) CHECK(std::fabs(got[i] - std::cos(xs[i])) <= 1e-3);
}

TEST_CASE("sec_sin and sec_cos hold to 1e-2 across the documented [-16, 16] domain") {
    VectorXd xs = sample_uniform(-16, 16, 1000, 4);
    const VectorXd s = run_kernel(sec_sin, xs);
    const VectorXd c = run_kernel(sec_cos, xs, 43);
    for (int i = 0; i < xs.size(); ++i) {
        CHECK(std::fabs(s[i] - std::sin(xs[i])) <= 1e-2);
        CHECK(std::fabs(c[i] - std::cos(xs[i])) <= 1e-2);
    }
}

TEST_CASE("pythagorean identity within 5e-3") {
    VectorXd xs = sample_uniform(-std::numbers::pi, std::numbers::pi, 100, 5);
    const VectorXd s = run_kernel(sec_sin, xs);
    const VectorXd c = run_kernel(sec_cos, xs, 44);
    for (int i = 0; i < xs.size(); ++i)
        CHECK(std::fabs(s[i] * s[i] + c[i] * c[i] - 1.0) <= 5e-3);
}

TEST_CASE("sec_exp within 1e-2 * max(1, e^x) on [-8, 8]") {
    VectorXd xs = sample_uniform(-8, 8, 1000, 6);
    xs[0] = 0.0;
    xs[1] = 1.0;
    xs[2] = -2.0;
    const VectorXd got = run_kernel(sec_exp, xs);
    CHECK(std::fabs(got[0] - 1.0) <= 1e-3);
    CHECK(std::fabs(got[1] - 2.718281828459045) <= 0.03);
    CHECK(std::fabs(got[2] - 0.1353352832366127) <= 0.01);
    for (int i = 0; i < xs.size(); ++i) {
        const double want = std::exp(xs[i]);
        CHECK(std::fabs(got[i] - want) <= 1e-2 * std::max(1.0, want));
    }
}

TEST_CASE("sec_reciprocal within 1e-2 relative on [0.1, 100]") {
    VectorXd xs = sample_uniform(0.1, 100, 1000, 7);
    xs[0] = 1.0;
    xs[1] = 4.0;
    xs[2] = 0.5;
    const VectorXd got = run_kernel(sec_reciprocal, xs);
    CHECK(std::fabs(got[0] - 1.0) <= 1e-2);
    CHECK(std::fabs(got[1] - 0.25) <= 0.0025);
    CHECK(std::fabs(got[2] - 2.0) <= 0.02);
    for (int i = 0; i < xs.size(); ++i)
        CHECK(std::fabs(got[i] - 1.0 / xs[i]) <= 1e-2 / xs[i]);
}

TEST_CASE("sec_log within 1e-2 absolute on [0.1, 100]") {
    VectorXd xs = sample_uniform(0.1, 100, 1000, 8);
    xs[0] = 1.0;
    xs[1] = std::numbers::e;
    xs[2] = 10.0;
    const VectorXd got = run_kernel(sec_log, xs);
    CHECK(std::fabs(got[0]) <= 1e-2);
    CHECK(std::fabs(got[1] - 1.0) <= 1e-2);
    CHECK(std::fabs(got[2] - 2.302585092994046) <= 1e-2);
    for (int i = 0; i < xs.size(); ++i) CHECK(std::fabs(got[i] - std::log(xs[i])) <= 1e-2);
}

TEST_CASE("per-call triple and round budgets are the documented constants") {
    struct Case {
        RingVector (*kernel)(PartyEngine&, const RingVector&);
        u64 rounds;
    };
    const Case cases[] = {
        {sec_square, kSquareRounds},
        {sec_sin, kSinRounds},
        {sec_cos, kCosRounds},
        {sec_exp, kExpRounds},
        {sec_reciprocal, kReciprocalRounds},
        {sec_log, kLogRounds},
    };
    for (const Case& c : cases) {
        for (const int n : {1, 7}) {
            auto [stats0, stats1] = run_pair(kCodec, 9, [&](PartyEngine& eng) {
                RingVector in = eng.constant(0.25, n, kCodec.frac_bits);
                (void)c.kernel(eng, in);
                return std::pair<u64, u64>{eng.rounds(), eng.triples_used()};
            });
            CHECK(stats0.first == c.rounds);
            CHECK(stats0.second == c.rounds * static_cast<u64>(n));
            CHECK(stats1.first == stats0.first);
            CHECK(stats1.second == stats0.second);
        }
    }
}

TEST_SUITE_END();
