#pragma once

#include <thread>

#include "mpcsr/transport.hpp"

namespace mpcsr {

// Transport over loopback TCP with the length-prefixed wire format. Each
// ordered sender->receiver channel is one connection, established lazily on
// first send. Hosts any subset of endpoints; port_of/set_remote wire multiple
// transports together.
class TcpTransport final : public Transport {
  public:
    explicit TcpTransport(const std::vector<Endpoint>& local_endpoints);
    ~TcpTransport() override;

    TcpTransport(const TcpTransport&) = delete;
    TcpTransport& operator=(const TcpTransport&) = delete;

    void send(Message m) override;
    Message recv(const Endpoint& me) override;
    void shutdown() override;

    u16 port_of(const Endpoint& e) const;
    void set_remote(const Endpoint& e, u16 port);

  private:
    struct Listener {
        Endpoint endpoint;
        int fd = -1;
        u16 port = 0;
        std::thread acceptor;
    };
    struct Mailbox {
        std::deque<Message> queue;
        bool closed = false;
    };

    void accept_loop(Listener& listener);
    void reader_loop(int fd);
    void deliver(Message m);
    int connect_to(const Endpoint& receiver);

    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::map<Endpoint, Mailbox> boxes_;
    std::map<Endpoint, u16> ports_;
    std::map<std::pair<Endpoint, Endpoint>, u64> send_seq_;
    std::map<std::pair<Endpoint, Endpoint>, u64> recv_seq_;
    std::map<std::pair<Endpoint, Endpoint>, int> conns_;
    std::vector<Listener> listeners_;
    std::vector<std::thread> readers_;
    std::vector<int> open_fds_;
    bool down_ = false;
};

}  // namespace mpcsr
