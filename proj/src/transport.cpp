#include "mpcsr/transport.hpp"

namespace mpcsr {

std::string to_string(const Endpoint& e) {
    switch (e.kind) {
        case Endpoint::Kind::P0: return "P0";
        case Endpoint::Kind::P1: return "P1";
        case Endpoint::Kind::P2: return "P2";
        case Endpoint::Kind::P3: return "P3";
        case Endpoint::Kind::Client: return "C" + std::to_string(e.index + 1);
    }
    return "?";
}

void MessageLog::record(const Message& m) {
    std::lock_guard lock(mu_);
    ++counts_[{m.sender, m.receiver, kind_of(m.payload)}];
    const PayloadKind k = kind_of(m.payload);
    if (k != PayloadKind::BeaverOpen && k != PayloadKind::TripleBatch) messages_.push_back(m);
}

std::vector<Message> MessageLog::for_receiver(const Endpoint& e) const {
    std::lock_guard lock(mu_);
    std::vector<Message> out;
    for (const Message& m : messages_)
        if (m.receiver == e) out.push_back(m);
    return out;
}

u64 MessageLog::count(const Endpoint& sender, const Endpoint& receiver, PayloadKind kind) const {
    std::lock_guard lock(mu_);
    const auto it = counts_.find({sender, receiver, kind});
    return it == counts_.end() ? 0 : it->second;
}

void InProcTransport::send(Message m) {
    std::lock_guard lock(mu_);
    m.seq_no = ++send_seq_[{m.sender, m.receiver}];
    maybe_record(m);
    Mailbox& box = boxes_[m.receiver];
    if (box.closed) throw ChannelFailure("send to closed mailbox");
    box.queue.push_back(std::move(m));
    cv_.notify_all();
}

Message InProcTransport::recv(const Endpoint& me) {
    std::unique_lock lock(mu_);
    Mailbox& box = boxes_[me];
    cv_.wait(lock, [&] { return !box.queue.empty() || box.closed; });
    if (box.queue.empty()) throw ChannelFailure("transport shut down");
    Message m = std::move(box.queue.front());
    box.queue.pop_front();
    u64& expected = recv_seq_[{m.sender, m.receiver}];
    if (m.seq_no <= expected) throw ProtocolError("sequence number not increasing");
    expected = m.seq_no;
    return m;
}

void InProcTransport::shutdown() {
    std::lock_guard lock(mu_);
    for (auto& [ep, box] : boxes_) box.closed = true;
    cv_.notify_all();
}

Message Inbox::next() {
    if (!pending_.empty()) {
        Message m = std::move(pending_.front());
        pending_.pop_front();
        return m;
    }
    return transport_.recv(me_);
}

Message Inbox::expect(PayloadKind kind, std::optional<Endpoint> from) {
    // scan what we already buffered
    for (auto it = pending_.begin(); it != pending_.end(); ++it) {
        if (kind_of(it->payload) == kind && (!from || it->sender == *from)) {
            Message m = std::move(*it);
            pending_.erase(it);
            return m;
        }
    }
    for (;;) {
        Message m = transport_.recv(me_);
        if (kind_of(m.payload) == kind && (!from || m.sender == *from)) return m;
        if (const auto* c = std::get_if<Control>(&m.payload)) {
            if (c->code == Control::Code::Error) raise_control_error(*c);
            if (c->code == Control::Code::Stop)
                throw ProtocolError("session stopped while waiting for " +
                                    std::to_string(static_cast<int>(kind)));
        }
        pending_.push_back(std::move(m));
    }
}

Message Inbox::expect_any(std::initializer_list<PayloadKind> kinds) {
    auto matches = [&](const Message& m) {
        const PayloadKind k = kind_of(m.payload);
        if (k == PayloadKind::Control) return true;
        for (const PayloadKind want : kinds)
            if (k == want) return true;
        return false;
    };
    for (auto it = pending_.begin(); it != pending_.end(); ++it) {
        if (matches(*it)) {
            Message m = std::move(*it);
            pending_.erase(it);
            return m;
        }
    }
    for (;;) {
        Message m = transport_.recv(me_);
        if (matches(m)) return m;
        pending_.push_back(std::move(m));
    }
}

void raise_control_error(const Control& c) {
    switch (c.reason) {
        case Control::Reason::TripleExhausted: throw TripleExhausted(c.text);
        case Control::Reason::Handshake: throw ProtocolError("handshake mismatch: " + c.text);
        case Control::Reason::Dimension: throw DimensionMismatch(c.text);
        default: throw ProtocolError(c.text);
    }
}

}  // namespace mpcsr
