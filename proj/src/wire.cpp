#include "mpcsr/wire.hpp"

#include <cstring>

namespace mpcsr {

namespace {

struct Writer {
    std::vector<u8> out;

    void u8_(u8 v) { out.push_back(v); }
    void u32_(u32 v) {
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<u8>(v >> (8 * i)));
    }
    void u64_(u64 v) {
        for (int i = 0; i < 8; ++i) out.push_back(static_cast<u8>(v >> (8 * i)));
    }
    void f64_(double v) {
        u64 bits;
        std::memcpy(&bits, &v, sizeof bits);
        u64_(bits);
    }
    void endpoint(const Endpoint& e) {
        u8_(static_cast<u8>(e.kind));
        u8_(e.index);
    }
    void str(const std::string& s) {
        u32_(static_cast<u32>(s.size()));
        out.insert(out.end(), s.begin(), s.end());
    }
    void ring_vector(const RingVector& v) {
        u32_(static_cast<u32>(v.size()));
        for (Eigen::Index i = 0; i < v.size(); ++i) u64_(v[i]);
    }
    void ring_matrix(const RingMatrix& m) {
        u32_(static_cast<u32>(m.rows()));
        u32_(static_cast<u32>(m.cols()));
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            for (Eigen::Index i = 0; i < m.rows(); ++i) u64_(m(i, j));
    }
};

struct Reader {
    std::span<const u8> in;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > in.size()) throw ChannelFailure("truncated frame");
    }
    u8 u8_() {
        need(1);
        return in[pos++];
    }
    u32 u32_() {
        need(4);
        u32 v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<u32>(in[pos++]) << (8 * i);
        return v;
    }
    u64 u64_() {
        need(8);
        u64 v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<u64>(in[pos++]) << (8 * i);
        return v;
    }
    double f64_() {
        const u64 bits = u64_();
        double v;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }
    Endpoint endpoint() {
        const u8 kind = u8_();
        const u8 index = u8_();
        if (kind > static_cast<u8>(Endpoint::Kind::Client))
            throw ChannelFailure("bad endpoint kind");
        return Endpoint{static_cast<Endpoint::Kind>(kind), index};
    }
    std::string str() {
        const u32 n = u32_();
        need(n);
        std::string s(reinterpret_cast<const char*>(in.data() + pos), n);
        pos += n;
        return s;
    }
    RingVector ring_vector() {
        const u32 n = u32_();
        need(static_cast<std::size_t>(n) * 8);
        RingVector v(n);
        for (u32 i = 0; i < n; ++i) v[i] = u64_();
        return v;
    }
    RingMatrix ring_matrix() {
        const u32 rows = u32_();
        const u32 cols = u32_();
        need(static_cast<std::size_t>(rows) * cols * 8);
        RingMatrix m(rows, cols);
        for (u32 j = 0; j < cols; ++j)
            for (u32 i = 0; i < rows; ++i) m(i, j) = u64_();
        return m;
    }
};

void write_payload(Writer& w, const Payload& p) {
    std::visit(
        [&](const auto& body) {
            using T = std::decay_t<decltype(body)>;
            if constexpr (std::is_same_v<T, Hello>) {
                w.endpoint(body.role);
                w.u32_(body.ring_bits);
                w.u32_(body.frac_bits);
                w.u64_(body.config_hash);
            } else if constexpr (std::is_same_v<T, ShareUpload>) {
                w.u8_(body.client);
                w.u8_(body.has_y ? 1 : 0);
                w.ring_matrix(body.x_train);
                w.ring_matrix(body.x_test);
                if (body.has_y) {
                    w.ring_vector(body.y_train);
                    w.ring_vector(body.y_test);
                }
            } else if constexpr (std::is_same_v<T, TripleRequest>) {
                w.u64_(body.count);
            } else if constexpr (std::is_same_v<T, TripleBatch>) {
                w.ring_vector(body.a);
                w.ring_vector(body.b);
                w.ring_vector(body.c);
            } else if constexpr (std::is_same_v<T, EvalRequest>) {
                w.u64_(body.generation);
                w.u8_(static_cast<u8>(body.dataset));
                w.u8_(static_cast<u8>(body.fitness));
                w.u32_(static_cast<u32>(body.expressions.size()));
                for (const std::string& s : body.expressions) w.str(s);
            } else if constexpr (std::is_same_v<T, BeaverOpen>) {
                w.ring_vector(body.epsilon);
                w.ring_vector(body.delta);
            } else if constexpr (std::is_same_v<T, FitnessShare>) {
                w.u64_(body.generation);
                w.ring_vector(body.z);
            } else if constexpr (std::is_same_v<T, PublicStats>) {
                w.f64_(body.sst_over_m_train);
                w.f64_(body.sst_over_m_test);
            } else if constexpr (std::is_same_v<T, RunStats>) {
                w.u64_(body.triples_used);
                w.u64_(body.opening_rounds);
            } else if constexpr (std::is_same_v<T, Control>) {
                w.u8_(static_cast<u8>(body.code));
                w.u8_(static_cast<u8>(body.reason));
                w.str(body.text);
            }
        },
        p);
}

Payload read_payload(Reader& r, PayloadKind kind) {
    switch (kind) {
        case PayloadKind::Hello: {
            Hello h;
            h.role = r.endpoint();
            h.ring_bits = r.u32_();
            h.frac_bits = r.u32_();
            h.config_hash = r.u64_();
            return h;
        }
        case PayloadKind::ShareUpload: {
            ShareUpload s;
            s.client = r.u8_();
            s.has_y = r.u8_() != 0;
            s.x_train = r.ring_matrix();
            s.x_test = r.ring_matrix();
            if (s.has_y) {
                s.y_train = r.ring_vector();
                s.y_test = r.ring_vector();
            }
            return s;
        }
        case PayloadKind::TripleRequest: return TripleRequest{r.u64_()};
        case PayloadKind::TripleBatch: {
            TripleBatch t;
            t.a = r.ring_vector();
            t.b = r.ring_vector();
            t.c = r.ring_vector();
            return t;
        }
        case PayloadKind::EvalRequest: {
            EvalRequest e;
            e.generation = r.u64_();
            e.dataset = static_cast<DatasetTag>(r.u8_());
            e.fitness = static_cast<FitnessTag>(r.u8_());
            const u32 n = r.u32_();
            e.expressions.reserve(n);
            for (u32 i = 0; i < n; ++i) e.expressions.push_back(r.str());
            return e;
        }
        case PayloadKind::BeaverOpen: {
            BeaverOpen b;
            b.epsilon = r.ring_vector();
            b.delta = r.ring_vector();
            return b;
        }
        case PayloadKind::FitnessShare: {
            FitnessShare f;
            f.generation = r.u64_();
            f.z = r.ring_vector();
            return f;
        }
        case PayloadKind::PublicStats: {
            PublicStats s;
            s.sst_over_m_train = r.f64_();
            s.sst_over_m_test = r.f64_();
            return s;
        }
        case PayloadKind::RunStats: {
            RunStats s;
            s.triples_used = r.u64_();
            s.opening_rounds = r.u64_();
            return s;
        }
        case PayloadKind::Control: {
            Control c;
            c.code = static_cast<Control::Code>(r.u8_());
            c.reason = static_cast<Control::Reason>(r.u8_());
            c.text = r.str();
            return c;
        }
    }
    throw ChannelFailure("unknown payload tag");
}

}  // namespace

std::vector<u8> serialize_message(const Message& m) {
    Writer w;
    // length placeholder, big-endian by contract
    w.out.resize(4);
    w.u8_(static_cast<u8>(kind_of(m.payload)));
    w.u64_(m.session_id);
    w.u64_(m.seq_no);
    w.endpoint(m.sender);
    w.endpoint(m.receiver);
    write_payload(w, m.payload);
    const u64 len = w.out.size() - 4;
    if (len > kMaxFrameBytes) throw ChannelFailure("frame too large");
    for (int i = 0; i < 4; ++i) w.out[i] = static_cast<u8>(len >> (8 * (3 - i)));
    return std::move(w.out);
}

Message parse_frame(std::span<const u8> frame) {
    Reader r{frame};
    const u8 tag = r.u8_();
    if (tag > static_cast<u8>(PayloadKind::Control)) throw ChannelFailure("unknown payload tag");
    Message m;
    m.session_id = r.u64_();
    m.seq_no = r.u64_();
    m.sender = r.endpoint();
    m.receiver = r.endpoint();
    m.payload = read_payload(r, static_cast<PayloadKind>(tag));
    if (r.pos != frame.size()) throw ChannelFailure("trailing bytes in frame");
    return m;
}

}  // namespace mpcsr
