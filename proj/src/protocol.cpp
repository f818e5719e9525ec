#include "mpcsr/protocol.hpp"

#include <algorithm>
#include <cstdio>
#include <thread>

#include "mpcsr/secure_eval.hpp"

namespace mpcsr {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Message make_message(const SessionConfig& config, Endpoint from, Endpoint to, Payload payload) {
    Message m;
    m.session_id = config.session_id;
    m.sender = from;
    m.receiver = to;
    m.payload = std::move(payload);
    return m;
}

void send_error(Transport& transport, const SessionConfig& config, Endpoint from,
                std::initializer_list<Endpoint> to, Control::Reason reason,
                const std::string& text) {
    for (const Endpoint& e : to) {
        try {
            transport.send(make_message(config, from, e,
                                        Control{Control::Code::Error, reason, text}));
        } catch (const MpcError&) {
            // receiver already gone; the local throw still reports the failure
        }
    }
}

}  // namespace

u64 SessionConfig::config_hash() const {
    std::string s;
    s += "L=" + std::to_string(codec.ring.bits);
    s += ";B=" + std::to_string(codec.frac_bits);
    s += ";pop=" + std::to_string(gp.population_size);
    s += ";tour=" + std::to_string(gp.tournament_size);
    s += ";pm=" + fmt_double(gp.mutation_prob);
    s += ";pc=" + fmt_double(gp.crossover_prob);
    s += ";sub=" + std::to_string(gp.min_subtree_depth) + ".." +
         std::to_string(gp.max_subtree_depth);
    s += ";depth=" + std::to_string(gp.max_depth);
    s += ";len=" + std::to_string(gp.max_length);
    s += ";gens=" + std::to_string(gp.max_generations);
    s += ";elite=" + std::to_string(gp.elitism_count);
    s += ";nvars=" + std::to_string(gp.n_vars);
    s += ";seed=" + std::to_string(master_seed);
    s += ";clients=" + std::to_string(n_clients);
    s += ";fitness=" + std::to_string(static_cast<int>(fitness));
    return fnv1a(s);
}

void SessionConfig::validate() const {
    gp.validate();
    if (n_clients < 2) throw MpcError("a vertical session needs at least two clients");
    if (codec.ring.bits < 2 * codec.frac_bits + 16)
        throw MpcError("ring too small for fixed-point products: need L >= 2B + 16");
    if (fitness != FitnessTag::Mse) throw MpcError("unsupported fitness tag");
}

void client_main(Transport& transport, const SessionConfig& config, u8 index,
                 const ClientData& data) {
    const Endpoint me = client(index);
    Inbox inbox(transport, me);
    transport.send(make_message(
        config, me, p3(),
        Hello{me, config.codec.ring.bits, config.codec.frac_bits, config.config_hash()}));
    inbox.expect(PayloadKind::Control, p3());  // Start; Error raises

    const bool holds_y = index + 1 == config.n_clients;
    if (holds_y != data.y_train.has_value())
        throw ProtocolError("target vector must sit with the last client");

    Rng rng(derive_seed(config.master_seed, "client" + std::to_string(index)));
    const Ring& ring = config.codec.ring;

    ShareUpload up0, up1;
    up0.client = up1.client = index;
    up0.has_y = up1.has_y = holds_y;
    auto [x_tr0, x_tr1] = share_matrix(ring, config.codec.encode_matrix(data.x_train), rng);
    auto [x_te0, x_te1] = share_matrix(ring, config.codec.encode_matrix(data.x_test), rng);
    up0.x_train = std::move(x_tr0.values);
    up1.x_train = std::move(x_tr1.values);
    up0.x_test = std::move(x_te0.values);
    up1.x_test = std::move(x_te1.values);
    if (holds_y) {
        const RingVector y_tr = config.codec.encode_vector(*data.y_train);
        const RingVector y_te = config.codec.encode_vector(*data.y_test);
        RingVector mask_tr = rng.ring_vector(ring, y_tr.size());
        RingVector mask_te = rng.ring_vector(ring, y_te.size());
        up0.y_train = mask_tr;
        up1.y_train = ring_sub(ring, y_tr, mask_tr);
        up0.y_test = mask_te;
        up1.y_test = ring_sub(ring, y_te, mask_te);
    }
    transport.send(make_message(config, me, p0(), std::move(up0)));
    transport.send(make_message(config, me, p1(), std::move(up1)));

    if (holds_y) {
        // deliberate, quantified disclosure: lets P3 derive R^2 from MSE
        transport.send(make_message(config, me, p3(),
                                    PublicStats{sst_over_m(*data.y_train),
                                                sst_over_m(*data.y_test)}));
    }
}

void dealer_main(Transport& transport, const SessionConfig& config) {
    const Endpoint me = p2();
    Inbox inbox(transport, me);
    transport.send(make_message(
        config, me, p3(),
        Hello{me, config.codec.ring.bits, config.codec.frac_bits, config.config_hash()}));
    inbox.expect(PayloadKind::Control, p3());

    Rng rng(derive_seed(config.master_seed, "dealer"));
    const Ring& ring = config.codec.ring;
    std::deque<TripleShare> pending[2];
    u64 dealt = 0;

    for (;;) {
        Message m = inbox.expect_any({PayloadKind::TripleRequest});
        if (const auto* c = std::get_if<Control>(&m.payload)) {
            if (c->code == Control::Code::Stop) return;
            if (c->code == Control::Code::Error) raise_control_error(*c);
            continue;
        }
        const auto* req = std::get_if<TripleRequest>(&m.payload);
        if (req == nullptr) throw ProtocolError("dealer got an unexpected message");
        const int party = m.sender == p0() ? 0 : 1;
        while (pending[party].size() < req->count) {
            if (dealt >= config.triple_budget) {
                const std::string text = "triple budget exhausted after " + std::to_string(dealt);
                send_error(transport, config, me, {p0(), p1(), p3()},
                           Control::Reason::TripleExhausted, text);
                throw TripleExhausted(text);
            }
            const u64 chunk = std::min(config.triple_batch, config.triple_budget - dealt);
            for (u64 i = 0; i < chunk; ++i) {
                const BeaverTriple t = deal_triple(ring, rng);
                pending[0].push_back(t.half[0]);
                pending[1].push_back(t.half[1]);
            }
            dealt += chunk;
        }
        TripleBatch batch;
        batch.a.resize(static_cast<Eigen::Index>(req->count));
        batch.b.resize(static_cast<Eigen::Index>(req->count));
        batch.c.resize(static_cast<Eigen::Index>(req->count));
        for (u64 i = 0; i < req->count; ++i) {
            const TripleShare t = pending[party].front();
            pending[party].pop_front();
            batch.a[static_cast<Eigen::Index>(i)] = t.a;
            batch.b[static_cast<Eigen::Index>(i)] = t.b;
            batch.c[static_cast<Eigen::Index>(i)] = t.c;
        }
        transport.send(make_message(config, me, m.sender, std::move(batch)));
    }
}

namespace {

// PeerLink over the transport: one BeaverOpen message each way per round.
class TransportLink final : public PeerLink {
  public:
    TransportLink(Transport& transport, Inbox& inbox, const SessionConfig& config, Endpoint me,
                  Endpoint peer)
        : transport_(transport), inbox_(inbox), config_(config), me_(me), peer_(peer) {}

    void send_opening(const RingVector& eps, const RingVector& delta) override {
        transport_.send(make_message(config_, me_, peer_, BeaverOpen{eps, delta}));
    }

    std::pair<RingVector, RingVector> recv_opening() override {
        Message m = inbox_.expect(PayloadKind::BeaverOpen, peer_);
        auto& open = std::get<BeaverOpen>(m.payload);
        return {std::move(open.epsilon), std::move(open.delta)};
    }

  private:
    Transport& transport_;
    Inbox& inbox_;
    const SessionConfig& config_;
    Endpoint me_, peer_;
};

// Triple stream fed by P2 in batches on low watermark. Both parties issue
// identical request sequences, so their stream positions stay aligned.
class BufferedTriples final : public TripleSource {
  public:
    BufferedTriples(Transport& transport, Inbox& inbox, const SessionConfig& config, Endpoint me)
        : transport_(transport), inbox_(inbox), config_(config), me_(me) {}

    void take(std::size_t n, RingVector& a, RingVector& b, RingVector& c) override {
        while (buffer_.size() < n) {
            const u64 want = std::max<u64>(config_.triple_batch, n - buffer_.size());
            transport_.send(make_message(config_, me_, p2(), TripleRequest{want}));
            Message m = inbox_.expect(PayloadKind::TripleBatch, p2());
            const auto& batch = std::get<TripleBatch>(m.payload);
            for (Eigen::Index i = 0; i < batch.a.size(); ++i)
                buffer_.push_back(TripleShare{batch.a[i], batch.b[i], batch.c[i]});
        }
        a.resize(static_cast<Eigen::Index>(n));
        b.resize(static_cast<Eigen::Index>(n));
        c.resize(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            const TripleShare t = buffer_.front();
            buffer_.pop_front();
            a[static_cast<Eigen::Index>(i)] = t.a;
            b[static_cast<Eigen::Index>(i)] = t.b;
            c[static_cast<Eigen::Index>(i)] = t.c;
        }
    }

  private:
    Transport& transport_;
    Inbox& inbox_;
    const SessionConfig& config_;
    Endpoint me_;
    std::deque<TripleShare> buffer_;
};

struct LoadedShares {
    SharedDataset train, test;
};

LoadedShares collect_uploads(Inbox& inbox, const SessionConfig& config) {
    const int k = config.n_clients;
    std::vector<ShareUpload> blocks(static_cast<std::size_t>(k));
    std::vector<bool> seen(static_cast<std::size_t>(k), false);
    for (int i = 0; i < k; ++i) {
        Message m = inbox.expect(PayloadKind::ShareUpload);
        auto& up = std::get<ShareUpload>(m.payload);
        if (up.client >= k || seen[up.client]) throw ProtocolError("bad or duplicate upload");
        seen[up.client] = true;
        blocks[up.client] = std::move(up);
    }
    const Eigen::Index m_train = blocks[0].x_train.rows();
    const Eigen::Index m_test = blocks[0].x_test.rows();
    Eigen::Index cols = 0;
    for (const ShareUpload& b : blocks) {
        if (b.x_train.rows() != m_train || b.x_test.rows() != m_test)
            throw DimensionMismatch("clients disagree on the number of rows");
        const bool should_hold_y = b.client + 1 == k;
        if (b.has_y != should_hold_y) throw ProtocolError("y must come from the last client");
        cols += b.x_train.cols();
    }
    LoadedShares out;
    out.train.x.resize(m_train, cols);
    out.test.x.resize(m_test, cols);
    Eigen::Index at = 0;
    for (const ShareUpload& b : blocks) {
        out.train.x.middleCols(at, b.x_train.cols()) = b.x_train;
        out.test.x.middleCols(at, b.x_test.cols()) = b.x_test;
        at += b.x_train.cols();
    }
    out.train.y = blocks.back().y_train;
    out.test.y = blocks.back().y_test;
    if (out.train.y.size() != m_train || out.test.y.size() != m_test)
        throw DimensionMismatch("target length does not match the feature rows");
    return out;
}

}  // namespace

void compute_main(Transport& transport, const SessionConfig& config, int party) {
    const Endpoint me = compute_party(party);
    const Endpoint peer = compute_party(1 - party);
    Inbox inbox(transport, me);
    try {
        transport.send(make_message(
            config, me, p3(),
            Hello{me, config.codec.ring.bits, config.codec.frac_bits, config.config_hash()}));
        inbox.expect(PayloadKind::Control, p3());

        const LoadedShares data = collect_uploads(inbox, config);
        TransportLink link(transport, inbox, config, me, peer);
        BufferedTriples triples(transport, inbox, config, me);
        PartyEngine engine(party, config.codec, link, triples);

        for (;;) {
            // a fast peer's BeaverOpen for the next request may arrive before
            // our own copy of that request; leave it buffered for the link
            Message m = inbox.expect_any({PayloadKind::EvalRequest});
            if (const auto* c = std::get_if<Control>(&m.payload)) {
                if (c->code == Control::Code::Stop) {
                    transport.send(make_message(config, me, p3(),
                                                RunStats{engine.triples_used(), engine.rounds()}));
                    return;
                }
                if (c->code == Control::Code::Error) raise_control_error(*c);
                continue;
            }
            const auto* req = std::get_if<EvalRequest>(&m.payload);
            if (req == nullptr || m.sender != p3())
                throw ProtocolError("compute party got an unexpected " +
                                    std::to_string(static_cast<int>(kind_of(m.payload))) +
                                    " from " + to_string(m.sender));
            const SharedDataset& split =
                req->dataset == DatasetTag::Train ? data.train : data.test;
            FitnessShare reply;
            reply.generation = req->generation;
            reply.z.resize(static_cast<Eigen::Index>(req->expressions.size()));
            for (std::size_t i = 0; i < req->expressions.size(); ++i) {
                const ExprPtr tree = parse(req->expressions[i]);
                reply.z[static_cast<Eigen::Index>(i)] =
                    secure_fitness_mse(engine, *tree, split)[0];
            }
            transport.send(make_message(config, me, p3(), std::move(reply)));
        }
    } catch (const TripleExhausted&) {
        throw;  // P2 already notified everyone
    } catch (const DimensionMismatch& e) {
        send_error(transport, config, me, {p3(), peer}, Control::Reason::Dimension, e.what());
        throw;
    } catch (const MpcError& e) {
        send_error(transport, config, me, {p3(), peer}, Control::Reason::None, e.what());
        throw;
    }
}

namespace {

double decode_fitness(const FixedCodec& codec, u64 z0, u64 z1) {
    const double z = codec.decode(codec.ring.add(z0, z1));
    if (z > kFitnessPlausibleMax || z < kFitnessNoiseFloor) return kWorstFitness;
    return std::max(z, 0.0);
}

}  // namespace

SecureRunSummary coordinator_main(Transport& transport, const SessionConfig& config) {
    config.validate();
    const Endpoint me = p3();
    Inbox inbox(transport, me);

    // handshake: everyone claims a role and echoes the session parameters
    std::vector<Endpoint> expected{p0(), p1(), p2()};
    for (int j = 0; j < config.n_clients; ++j) expected.push_back(client(static_cast<u8>(j)));
    std::vector<bool> greeted(expected.size(), false);
    for (std::size_t i = 0; i < expected.size(); ++i) {
        Message m = inbox.expect(PayloadKind::Hello);
        const auto& hello = std::get<Hello>(m.payload);
        const auto at = std::find(expected.begin(), expected.end(), m.sender);
        const bool role_ok = at != expected.end() && !greeted[at - expected.begin()] &&
                             hello.role == m.sender;
        const bool params_ok = hello.ring_bits == config.codec.ring.bits &&
                               hello.frac_bits == config.codec.frac_bits &&
                               hello.config_hash == config.config_hash() &&
                               m.session_id == config.session_id;
        if (!role_ok || !params_ok) {
            const std::string text = "handshake mismatch from " + to_string(m.sender);
            for (const Endpoint& e : expected)
                send_error(transport, config, me, {e}, Control::Reason::Handshake, text);
            throw ProtocolError(text);
        }
        greeted[at - expected.begin()] = true;
    }
    for (const Endpoint& e : expected)
        transport.send(make_message(config, me, e, Control{Control::Code::Start, Control::Reason::None, ""}));

    Message stats_msg = inbox.expect(PayloadKind::PublicStats,
                                     client(static_cast<u8>(config.n_clients - 1)));
    const PublicStats stats = std::get<PublicStats>(stats_msg.payload);

    SecureRunSummary out;
    u64 generation = 0;

    auto secure_oracle = [&](const std::vector<ExprPtr>& trees,
                             DatasetTag split) -> std::vector<double> {
        EvalRequest req;
        req.generation = ++generation;
        req.dataset = split;
        req.fitness = config.fitness;
        req.expressions.reserve(trees.size());
        for (const ExprPtr& t : trees) {
            req.expressions.push_back(format(*t));
            out.predicted_rounds += fitness_rounds(*t);
        }
        transport.send(make_message(config, me, p0(), req));
        transport.send(make_message(config, me, p1(), req));
        RingVector z[2];
        for (const int party : {0, 1}) {
            for (;;) {
                Message m = inbox.expect(PayloadKind::FitnessShare, compute_party(party));
                auto& share = std::get<FitnessShare>(m.payload);
                if (share.generation == req.generation) {
                    z[party] = std::move(share.z);
                    break;
                }
            }
        }
        if (z[0].size() != static_cast<Eigen::Index>(trees.size()) || z[1].size() != z[0].size())
            throw ProtocolError("fitness share count mismatch");
        std::vector<double> values(trees.size());
        for (std::size_t i = 0; i < trees.size(); ++i) {
            const auto idx = static_cast<Eigen::Index>(i);
            values[i] = decode_fitness(config.codec, z[0][idx], z[1][idx]);
        }
        return values;
    };

    GpConfig gp = config.gp;
    gp.rng_seed = derive_seed(config.master_seed, "gp");
    Rng rng(gp.rng_seed);
    out.gp = evolve(
        gp,
        [&](const std::vector<ExprPtr>& trees) { return secure_oracle(trees, DatasetTag::Train); },
        rng);

    out.train_mse = out.gp.best.fitness.value();
    out.test_mse = secure_oracle({out.gp.best.tree}, DatasetTag::Test)[0];
    out.train_r2 = metric_r2(out.train_mse, stats.sst_over_m_train);
    out.test_r2 = metric_r2(out.test_mse, stats.sst_over_m_test);

    for (const Endpoint& e : {p0(), p1(), p2()})
        transport.send(make_message(config, me, e, Control{Control::Code::Stop, Control::Reason::None, ""}));
    RunStats run_stats[2];
    for (const int party : {0, 1}) {
        Message m = inbox.expect(PayloadKind::RunStats, compute_party(party));
        run_stats[party] = std::get<RunStats>(m.payload);
    }
    if (run_stats[0].opening_rounds != run_stats[1].opening_rounds)
        throw ProtocolError("compute parties disagree on round count");
    out.triples_used = run_stats[0].triples_used;
    out.opening_rounds = run_stats[0].opening_rounds;
    return out;
}

SecureRunSummary run_secure_session(const SessionConfig& config,
                                    const std::vector<ClientData>& clients,
                                    Transport& transport) {
    config.validate();
    if (clients.size() != static_cast<std::size_t>(config.n_clients))
        throw MpcError("client data count does not match the session config");

    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(clients.size() + 3);
    auto guard = [&errors](std::size_t slot, auto fn) {
        return [&errors, slot, fn = std::move(fn)] {
            try {
                fn();
            } catch (...) {
                errors[slot] = std::current_exception();
            }
        };
    };
    threads.emplace_back(guard(0, [&] { dealer_main(transport, config); }));
    threads.emplace_back(guard(1, [&] { compute_main(transport, config, 0); }));
    threads.emplace_back(guard(2, [&] { compute_main(transport, config, 1); }));
    for (std::size_t j = 0; j < clients.size(); ++j) {
        threads.emplace_back(guard(3 + j, [&, j] {
            client_main(transport, config, static_cast<u8>(j), clients[j]);
        }));
    }

    SecureRunSummary out;
    std::exception_ptr coordinator_error;
    try {
        out = coordinator_main(transport, config);
    } catch (...) {
        coordinator_error = std::current_exception();
        transport.shutdown();  // unblock any party still waiting
    }
    for (std::thread& t : threads) t.join();
    if (coordinator_error) std::rethrow_exception(coordinator_error);
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

}  // namespace mpcsr
