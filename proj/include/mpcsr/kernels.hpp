#pragma once

#include "mpcsr/engine.hpp"

namespace mpcsr {

// Secure element-wise approximations over shared fixed-point vectors. Every
// call costs a fixed number of multiplication rounds (one triple per element
// per round); the counts below are part of the contract and asserted in tests.
//
// Input domains (documented contracts; no secure range reduction exists):
//   sec_sin / sec_cos : |x| <= 16, error <= 1e-3 on [-pi, pi], <= 1e-2 beyond
//   sec_exp           : x in [-8, 8], error <= 1e-2 * max(1, e^x)
//   sec_reciprocal    : x in [0.1, 100], relative error <= 1e-2
//   sec_log           : x in [0.1, 100], absolute error <= 1e-2
inline constexpr u64 kSquareRounds = 1;
inline constexpr u64 kSinRounds = 13;
inline constexpr u64 kCosRounds = 13;
inline constexpr u64 kExpRounds = 10;
inline constexpr u64 kReciprocalRounds = 30;
inline constexpr u64 kLogRounds = 48;

RingVector sec_square(PartyEngine& eng, const RingVector& x);
RingVector sec_sin(PartyEngine& eng, const RingVector& x);
RingVector sec_cos(PartyEngine& eng, const RingVector& x);
RingVector sec_exp(PartyEngine& eng, const RingVector& x);
RingVector sec_reciprocal(PartyEngine& eng, const RingVector& x);
RingVector sec_log(PartyEngine& eng, const RingVector& x);

}  // namespace mpcsr
