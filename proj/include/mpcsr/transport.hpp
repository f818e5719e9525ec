#pragma once

#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mpcsr/common.hpp"

namespace mpcsr {

// Session roles: two compute parties, the triple dealer, the coordinator,
// and K data-owner clients.
struct Endpoint {
    enum class Kind : u8 { P0 = 0, P1 = 1, P2 = 2, P3 = 3, Client = 4 };
    Kind kind = Kind::P0;
    u8 index = 0;  // client number (0-based); 0 for servers

    friend auto operator<=>(const Endpoint&, const Endpoint&) = default;
};

inline Endpoint p0() { return {Endpoint::Kind::P0, 0}; }
inline Endpoint p1() { return {Endpoint::Kind::P1, 0}; }
inline Endpoint p2() { return {Endpoint::Kind::P2, 0}; }
inline Endpoint p3() { return {Endpoint::Kind::P3, 0}; }
inline Endpoint client(u8 j) { return {Endpoint::Kind::Client, j}; }
inline Endpoint compute_party(int i) { return i == 0 ? p0() : p1(); }

std::string to_string(const Endpoint& e);

enum class FitnessTag : u8 { Mse = 0 };
enum class DatasetTag : u8 { Train = 0, Test = 1 };

// ---- payloads (wire tag = variant index) ----

// session handshake: role claim, ring parameters, config hash
struct Hello {
    Endpoint role;
    u32 ring_bits = 64;
    u32 frac_bits = 16;
    u64 config_hash = 0;
};

// one client's secret-shared column block (train and test split of the same
// variables); the last client also uploads its share of y
struct ShareUpload {
    u8 client = 0;
    bool has_y = false;
    RingMatrix x_train, x_test;
    RingVector y_train, y_test;
};

struct TripleRequest {
    u64 count = 0;
};

struct TripleBatch {
    RingVector a, b, c;
};

struct EvalRequest {
    u64 generation = 0;
    DatasetTag dataset = DatasetTag::Train;
    FitnessTag fitness = FitnessTag::Mse;
    std::vector<std::string> expressions;
};

struct BeaverOpen {
    RingVector epsilon, delta;
};

struct FitnessShare {
    u64 generation = 0;
    RingVector z;
};

// client K's one-time public disclosure used by P3 to derive R^2 from MSE
struct PublicStats {
    double sst_over_m_train = 0;
    double sst_over_m_test = 0;
};

struct RunStats {
    u64 triples_used = 0;
    u64 opening_rounds = 0;
};

struct Control {
    enum class Code : u8 { Start = 0, Stop = 1, Error = 2 };
    enum class Reason : u8 { None = 0, TripleExhausted = 1, Handshake = 2, Dimension = 3 };
    Code code = Code::Start;
    Reason reason = Reason::None;
    std::string text;
};

using Payload = std::variant<Hello, ShareUpload, TripleRequest, TripleBatch, EvalRequest,
                             BeaverOpen, FitnessShare, PublicStats, RunStats, Control>;

enum class PayloadKind : u8 {
    Hello = 0,
    ShareUpload = 1,
    TripleRequest = 2,
    TripleBatch = 3,
    EvalRequest = 4,
    BeaverOpen = 5,
    FitnessShare = 6,
    PublicStats = 7,
    RunStats = 8,
    Control = 9,
};

inline PayloadKind kind_of(const Payload& p) { return static_cast<PayloadKind>(p.index()); }

struct Message {
    u64 session_id = 0;
    u64 seq_no = 0;  // strictly increasing per sender->receiver channel
    Endpoint sender, receiver;
    Payload payload;
};

// Records all traffic except the bulky BeaverOpen/TripleBatch bodies (those
// are still counted). Used by the audit tests.
class MessageLog {
  public:
    void record(const Message& m);
    std::vector<Message> for_receiver(const Endpoint& e) const;
    u64 count(const Endpoint& sender, const Endpoint& receiver, PayloadKind kind) const;

  private:
    mutable std::mutex mu_;
    std::vector<Message> messages_;
    std::map<std::tuple<Endpoint, Endpoint, PayloadKind>, u64> counts_;
};

// Ordered, reliable, point-to-point channels among all session roles.
class Transport {
  public:
    virtual ~Transport() = default;

    // assigns the channel sequence number and delivers
    virtual void send(Message m) = 0;
    // blocking; next message addressed to `me` from any sender
    virtual Message recv(const Endpoint& me) = 0;
    // unblocks all pending recv calls with ChannelFailure
    virtual void shutdown() = 0;

    void set_log(MessageLog* log) { log_ = log; }

  protected:
    void maybe_record(const Message& m) {
        if (log_ != nullptr) log_->record(m);
    }

  private:
    MessageLog* log_ = nullptr;
};

// Thread-safe in-process mailboxes; the default transport for tests and runs.
class InProcTransport final : public Transport {
  public:
    void send(Message m) override;
    Message recv(const Endpoint& me) override;
    void shutdown() override;

  private:
    struct Mailbox {
        std::deque<Message> queue;
        bool closed = false;
    };

    std::mutex mu_;
    std::condition_variable cv_;
    std::map<Endpoint, Mailbox> boxes_;
    std::map<std::pair<Endpoint, Endpoint>, u64> send_seq_;
    std::map<std::pair<Endpoint, Endpoint>, u64> recv_seq_;
};

// Buffered receive with selective matching; parties keep unconsumed messages
// aside until their state machine asks for them.
class Inbox {
  public:
    Inbox(Transport& transport, Endpoint me) : transport_(transport), me_(me) {}

    Message next();
    // waits for a payload of `kind` (optionally from a specific sender);
    // Control errors raise the matching exception
    Message expect(PayloadKind kind, std::optional<Endpoint> from = std::nullopt);
    // waits for any of `kinds`, stashing everything else (Control passes
    // through so state machines see Stop/Error)
    Message expect_any(std::initializer_list<PayloadKind> kinds);

    const Endpoint& me() const { return me_; }

  private:
    Transport& transport_;
    Endpoint me_;
    std::deque<Message> pending_;
};

// maps a received Control error to the exception the sender named
[[noreturn]] void raise_control_error(const Control& c);

}  // namespace mpcsr
