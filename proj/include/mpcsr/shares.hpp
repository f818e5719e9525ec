#pragma once

#include <utility>
#include <vector>

#include "mpcsr/ring.hpp"
#include "mpcsr/rng.hpp"

namespace mpcsr {

// One party's additive share of a secret ring element.
// Invariant: value(party 0) + value(party 1) = secret (mod 2^L).
struct Share {
    int party;  // 0 or 1
    u64 value;
};

// One party's share of an m x n secret matrix, shared element-wise.
struct SharedMatrix {
    int party;
    RingMatrix values;

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }
};

struct SharedVector {
    int party;
    RingVector values;
};

inline std::pair<Share, Share> share_value(const Ring& r, u64 x, Rng& rng) {
    const u64 r0 = rng.ring_element(r);
    return {Share{0, r0}, Share{1, r.sub(x, r0)}};
}

inline u64 reconstruct(const Ring& r, const Share& s0, const Share& s1) {
    if (s0.party == s1.party) throw IndexMismatch("reconstruct needs one share per party");
    return r.add(s0.value, s1.value);
}

inline std::pair<SharedMatrix, SharedMatrix> share_matrix(const Ring& r, const RingMatrix& x,
                                                          Rng& rng) {
    RingMatrix mask = rng.ring_matrix(r, x.rows(), x.cols());
    return {SharedMatrix{0, mask}, SharedMatrix{1, ring_sub(r, x, mask)}};
}

inline RingMatrix reconstruct(const Ring& r, const SharedMatrix& a, const SharedMatrix& b) {
    if (a.party == b.party) throw IndexMismatch("reconstruct needs one share per party");
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionMismatch("shared matrix shapes differ");
    return ring_add(r, a.values, b.values);
}

// Public-value arithmetic: only party 0 offsets for add/sub; both scale for mul.
inline Share add_public(const Ring& r, const Share& s, u64 a) {
    return Share{s.party, s.party == 0 ? r.add(s.value, a) : s.value};
}

inline Share sub_public(const Ring& r, const Share& s, u64 a) {
    return Share{s.party, s.party == 0 ? r.sub(s.value, a) : s.value};
}

inline Share mul_public(const Ring& r, const Share& s, u64 a) {
    return Share{s.party, r.mul(s.value, a)};
}

inline Share add_shared(const Ring& r, const Share& s, const Share& t) {
    if (s.party != t.party) throw IndexMismatch("add_shared needs same-party shares");
    return Share{s.party, r.add(s.value, t.value)};
}

inline Share sub_shared(const Ring& r, const Share& s, const Share& t) {
    if (s.party != t.party) throw IndexMismatch("sub_shared needs same-party shares");
    return Share{s.party, r.sub(s.value, t.value)};
}

// One party's half of a Beaver triple (a, b, c) with c = ab.
struct TripleShare {
    u64 a, b, c;
};

struct BeaverTriple {
    TripleShare half[2];
};

// Public values opened during one Beaver multiplication.
struct BeaverOpening {
    u64 epsilon, delta;
};

inline BeaverTriple deal_triple(const Ring& r, Rng& rng) {
    const u64 a = rng.ring_element(r);
    const u64 b = rng.ring_element(r);
    const u64 c = r.mul(a, b);
    const u64 a0 = rng.ring_element(r);
    const u64 b0 = rng.ring_element(r);
    const u64 c0 = rng.ring_element(r);
    BeaverTriple t;
    t.half[0] = TripleShare{a0, b0, c0};
    t.half[1] = TripleShare{r.sub(a, a0), r.sub(b, b0), r.sub(c, c0)};
    return t;
}

inline std::vector<BeaverTriple> deal_triples(const Ring& r, std::size_t count, Rng& rng) {
    std::vector<BeaverTriple> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(deal_triple(r, rng));
    return out;
}

// Party-local step 1 of Beaver multiplication: the opening shares
// eps_i = <x>_i - <a>_i, delta_i = <y>_i - <b>_i.
inline BeaverOpening beaver_open(const Ring& r, u64 x_share, u64 y_share, const TripleShare& t) {
    return BeaverOpening{r.sub(x_share, t.a), r.sub(y_share, t.b)};
}

// Party-local step 2, after eps/delta are public:
// <xy>_i = <c>_i + eps*<b>_i + <a>_i*delta + i*eps*delta.
inline u64 beaver_finish(const Ring& r, int party, const TripleShare& t, u64 eps, u64 delta) {
    u64 out = r.add(t.c, r.mul(eps, t.b));
    out = r.add(out, r.mul(t.a, delta));
    if (party == 1) out = r.add(out, r.mul(eps, delta));
    return out;
}

// Both halves of one multiplication run in-line; the "exchange" is the local
// sum of the opening shares. Test-side convenience mirroring the protocol.
inline std::pair<Share, Share> beaver_mul(const Ring& r, const std::pair<Share, Share>& x,
                                          const std::pair<Share, Share>& y,
                                          const BeaverTriple& t) {
    if (x.first.party != 0 || x.second.party != 1 || y.first.party != 0 || y.second.party != 1)
        throw IndexMismatch("beaver_mul expects (party0, party1) pairs");
    const BeaverOpening o0 = beaver_open(r, x.first.value, y.first.value, t.half[0]);
    const BeaverOpening o1 = beaver_open(r, x.second.value, y.second.value, t.half[1]);
    const u64 eps = r.add(o0.epsilon, o1.epsilon);
    const u64 delta = r.add(o0.delta, o1.delta);
    return {Share{0, beaver_finish(r, 0, t.half[0], eps, delta)},
            Share{1, beaver_finish(r, 1, t.half[1], eps, delta)}};
}

// Local share truncation by `shift` bits (scale rescaling after a product).
// Party 0 logical-shifts its share; party 1 negates, shifts, negates. The
// reconstruction lands within 1 ulp of the arithmetic shift of the secret,
// except for a wrap event of probability ~ |secret| / 2^L.
inline u64 truncate_local(const Ring& r, int party, u64 share, unsigned shift) {
    share &= r.mask;
    if (party == 0) return (share >> shift) & r.mask;
    return r.neg((r.neg(share) >> shift) & r.mask);
}

inline std::pair<Share, Share> truncate_shares(const Ring& r, const std::pair<Share, Share>& s,
                                               unsigned shift) {
    return {Share{s.first.party, truncate_local(r, s.first.party, s.first.value, shift)},
            Share{s.second.party, truncate_local(r, s.second.party, s.second.value, shift)}};
}

inline RingVector truncate_local(const Ring& r, int party, const RingVector& shares,
                                 unsigned shift) {
    return shares.unaryExpr(
        [&r, party, shift](u64 v) { return truncate_local(r, party, v, shift); });
}

}  // namespace mpcsr
