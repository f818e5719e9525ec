#pragma once

#include <condition_variable>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <thread>

#include "mpcsr/shares.hpp"

namespace mpcsr {

// Exchange point for one batched epsilon/delta opening round between P0 and P1.
class PeerLink {
  public:
    virtual ~PeerLink() = default;
    virtual void send_opening(const RingVector& eps, const RingVector& delta) = 0;
    virtual std::pair<RingVector, RingVector> recv_opening() = 0;
};

// Stream of this party's triple-share halves. Both parties must consume the
// same stream positions in the same order.
class TripleSource {
  public:
    virtual ~TripleSource() = default;
    // next `n` triple shares; throws TripleExhausted when the stream ends
    virtual void take(std::size_t n, RingVector& a, RingVector& b, RingVector& c) = 0;
};

// Test-side source: regenerates the dealer's deterministic stream locally.
// Two instances with the same seed and different party indices are consistent.
class LocalDealerStream final : public TripleSource {
  public:
    LocalDealerStream(Ring ring, int party, u64 seed, u64 budget = ~u64{0})
        : ring_(ring), party_(party), rng_(seed), budget_(budget) {}

    void take(std::size_t n, RingVector& a, RingVector& b, RingVector& c) override {
        if (n > budget_) throw TripleExhausted("triple budget exhausted");
        budget_ -= n;
        a.resize(static_cast<Eigen::Index>(n));
        b.resize(static_cast<Eigen::Index>(n));
        c.resize(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            const BeaverTriple t = deal_triple(ring_, rng_);
            a[static_cast<Eigen::Index>(i)] = t.half[party_].a;
            b[static_cast<Eigen::Index>(i)] = t.half[party_].b;
            c[static_cast<Eigen::Index>(i)] = t.half[party_].c;
        }
    }

  private:
    Ring ring_;
    int party_;
    Rng rng_;
    u64 budget_;
};

// In-memory duplex queue wiring two PeerLink ends together.
class LocalLink {
  public:
    class End final : public PeerLink {
      public:
        End(LocalLink& owner, int side) : owner_(owner), side_(side) {}
        void send_opening(const RingVector& eps, const RingVector& delta) override {
            owner_.push(side_, eps, delta);
        }
        std::pair<RingVector, RingVector> recv_opening() override { return owner_.pop(side_); }

      private:
        LocalLink& owner_;
        int side_;
    };

    LocalLink() : end0_(*this, 0), end1_(*this, 1) {}

    PeerLink& end(int party) { return party == 0 ? end0_ : end1_; }

  private:
    void push(int from, const RingVector& eps, const RingVector& delta) {
        std::lock_guard lock(mu_);
        queue_[from].emplace_back(eps, delta);
        cv_.notify_all();
    }

    std::pair<RingVector, RingVector> pop(int to) {
        std::unique_lock lock(mu_);
        auto& q = queue_[1 - to];  // messages sent by the peer
        cv_.wait(lock, [&] { return !q.empty(); });
        auto out = std::move(q.front());
        q.pop_front();
        return out;
    }

    std::mutex mu_;
    std::condition_variable cv_;
    std::deque<std::pair<RingVector, RingVector>> queue_[2];
    End end0_;
    End end1_;
};

// One compute party's vectorized share arithmetic. Pure ops are local; every
// multiplication is one batched opening round through the link and consumes
// one triple per element.
class PartyEngine {
  public:
    // common_seed drives the shared mask stream for public constants; both
    // parties must use the same value (it masks nothing secret)
    PartyEngine(int party, FixedCodec codec, PeerLink& link, TripleSource& triples,
                u64 common_seed = 0x636f6d6d6f6eULL)
        : party_(party), codec_(codec), link_(&link), triples_(&triples), common_(common_seed) {}

    int party() const { return party_; }
    const FixedCodec& codec() const { return codec_; }
    const Ring& ring() const { return codec_.ring; }
    u64 rounds() const { return rounds_; }
    u64 triples_used() const { return triples_used_; }

    // ---- local share algebra (element-wise) ----
    RingVector add(const RingVector& x, const RingVector& y) const {
        return ring_add(ring(), x, y);
    }
    RingVector sub(const RingVector& x, const RingVector& y) const {
        return ring_sub(ring(), x, y);
    }
    RingVector neg(const RingVector& x) const {
        return x.unaryExpr([r = ring()](u64 v) { return r.neg(v); });
    }
    RingVector add_public(const RingVector& x, u64 a) const {
        if (party_ != 0) return x;
        return x.unaryExpr([&](u64 v) { return ring().add(v, a); });
    }
    RingVector mul_public(const RingVector& x, u64 a) const { return ring_scale(ring(), x, a); }

    // Shares of the public constant c at scale 2^scale_bits. Masked with the
    // common-seed stream: local truncation breaks on a (value, 0) sharing of
    // a negative value, so even public constants need random-looking shares.
    // Both parties draw the same mask because they run the same op sequence.
    RingVector constant(double c, Eigen::Index n, unsigned scale_bits) {
        FixedCodec at{ring(), scale_bits};
        const u64 enc = at.encode(c);
        const u64 mask = common_.ring_element(ring());
        const u64 mine = party_ == 0 ? ring().add(enc, mask) : ring().neg(mask);
        RingVector out(n);
        out.setConstant(mine);
        return out;
    }

    RingVector truncate(const RingVector& x, unsigned shift) const {
        return truncate_local(ring(), party_, x, shift);
    }

    // multiply by the public real c; input at scale in_bits, output at out_bits
    RingVector scale_public(const RingVector& x, double c, unsigned in_bits,
                            unsigned out_bits) const {
        FixedCodec at{ring(), codec_.frac_bits};
        const u64 enc = at.encode(c);
        return truncate(mul_public(x, enc), in_bits + codec_.frac_bits - out_bits);
    }

    // ---- interactive ----
    // raw Beaver product: output scale is the sum of the input scales
    RingVector mul_raw(const RingVector& x, const RingVector& y) {
        if (x.size() != y.size()) throw DimensionMismatch("mul operand sizes differ");
        const auto n = static_cast<std::size_t>(x.size());
        RingVector a, b, c;
        triples_->take(n, a, b, c);
        triples_used_ += n;
        RingVector eps_mine = sub(x, a);
        RingVector delta_mine = sub(y, b);
        link_->send_opening(eps_mine, delta_mine);
        auto [eps_theirs, delta_theirs] = link_->recv_opening();
        ++rounds_;
        if (eps_theirs.size() != x.size() || delta_theirs.size() != x.size())
            throw ProtocolError("opening round size mismatch");
        const RingVector eps = add(eps_mine, eps_theirs);
        const RingVector delta = add(delta_mine, delta_theirs);
        const Ring& r = ring();
        RingVector out(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            out[i] = beaver_finish(r, party_, TripleShare{a[i], b[i], c[i]}, eps[i], delta[i]);
        }
        return out;
    }

    // fixed-point product of two shares at scale 2^scale_bits
    RingVector mul_fx(const RingVector& x, const RingVector& y, unsigned scale_bits) {
        return truncate(mul_raw(x, y), scale_bits);
    }

    RingVector mul_fx(const RingVector& x, const RingVector& y) {
        return mul_fx(x, y, codec_.frac_bits);
    }

  private:
    int party_;
    FixedCodec codec_;
    PeerLink* link_;
    TripleSource* triples_;
    Rng common_;
    u64 rounds_ = 0;
    u64 triples_used_ = 0;
};

// Run the same two-party computation body on both parties, wired by an
// in-memory link, and return each party's result. Used by tests and kernels'
// reference drivers.
template <typename F>
auto run_pair(const FixedCodec& codec, u64 dealer_seed, F&& body, u64 triple_budget = ~u64{0})
    -> std::pair<std::invoke_result_t<F, PartyEngine&>, std::invoke_result_t<F, PartyEngine&>> {
    using R = std::invoke_result_t<F, PartyEngine&>;
    LocalLink link;
    LocalDealerStream t0(codec.ring, 0, dealer_seed, triple_budget);
    LocalDealerStream t1(codec.ring, 1, dealer_seed, triple_budget);
    PartyEngine e0(0, codec, link.end(0), t0);
    PartyEngine e1(1, codec, link.end(1), t1);
    R r0, r1;
    std::exception_ptr err0, err1;
    std::thread worker([&] {
        try {
            r1 = body(e1);
        } catch (...) {
            err1 = std::current_exception();
        }
    });
    try {
        r0 = body(e0);
    } catch (...) {
        err0 = std::current_exception();
    }
    worker.join();
    if (err0) std::rethrow_exception(err0);
    if (err1) std::rethrow_exception(err1);
    return {std::move(r0), std::move(r1)};
}

}  // namespace mpcsr
