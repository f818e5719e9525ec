#include "mpcsr/tcp.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>

#include "mpcsr/wire.hpp"

namespace mpcsr {

namespace {

bool read_exact(int fd, u8* buf, std::size_t n) {
    std::size_t got = 0;
    while (got < n) {
        const ssize_t r = ::read(fd, buf + got, n - got);
        if (r <= 0) return false;
        got += static_cast<std::size_t>(r);
    }
    return true;
}

bool write_all(int fd, const u8* buf, std::size_t n) {
    std::size_t sent = 0;
    while (sent < n) {
        const ssize_t r = ::write(fd, buf + sent, n - sent);
        if (r <= 0) return false;
        sent += static_cast<std::size_t>(r);
    }
    return true;
}

}  // namespace

TcpTransport::TcpTransport(const std::vector<Endpoint>& local_endpoints) {
    listeners_.reserve(local_endpoints.size());
    for (const Endpoint& e : local_endpoints) {
        const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd < 0) throw ChannelFailure("socket() failed");
        const int one = 1;
        ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        addr.sin_port = 0;  // ephemeral
        if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
            ::listen(fd, 16) != 0) {
            ::close(fd);
            throw ChannelFailure("bind/listen failed");
        }
        socklen_t len = sizeof addr;
        ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
        listeners_.push_back(Listener{e, fd, ntohs(addr.sin_port), {}});
        boxes_[e];
        ports_[e] = ntohs(addr.sin_port);
    }
    for (Listener& l : listeners_) l.acceptor = std::thread([this, &l] { accept_loop(l); });
}

TcpTransport::~TcpTransport() {
    shutdown();
    for (Listener& l : listeners_)
        if (l.acceptor.joinable()) l.acceptor.join();
    for (std::thread& t : readers_)
        if (t.joinable()) t.join();
}

u16 TcpTransport::port_of(const Endpoint& e) const {
    std::lock_guard lock(mu_);
    const auto it = ports_.find(e);
    if (it == ports_.end()) throw ChannelFailure("unknown endpoint " + to_string(e));
    return it->second;
}

void TcpTransport::set_remote(const Endpoint& e, u16 port) {
    std::lock_guard lock(mu_);
    ports_[e] = port;
}

void TcpTransport::accept_loop(Listener& listener) {
    for (;;) {
        const int conn = ::accept(listener.fd, nullptr, nullptr);
        if (conn < 0) return;  // listener closed
        std::lock_guard lock(mu_);
        if (down_) {
            ::close(conn);
            return;
        }
        open_fds_.push_back(conn);
        readers_.push_back(std::thread([this, conn] { reader_loop(conn); }));
    }
}

void TcpTransport::reader_loop(int fd) {
    for (;;) {
        u8 len_be[4];
        if (!read_exact(fd, len_be, 4)) return;
        const u32 len = (u32{len_be[0]} << 24) | (u32{len_be[1]} << 16) | (u32{len_be[2]} << 8) |
                        u32{len_be[3]};
        if (len == 0 || len > kMaxFrameBytes) return;
        std::vector<u8> frame(len);
        if (!read_exact(fd, frame.data(), len)) return;
        try {
            deliver(parse_frame(frame));
        } catch (const MpcError&) {
            return;  // malformed stream; drop the connection
        }
    }
}

void TcpTransport::deliver(Message m) {
    std::lock_guard lock(mu_);
    const auto box = boxes_.find(m.receiver);
    if (box == boxes_.end() || box->second.closed) return;
    u64& expected = recv_seq_[{m.sender, m.receiver}];
    if (m.seq_no <= expected) return;  // duplicate or reordered; drop
    expected = m.seq_no;
    box->second.queue.push_back(std::move(m));
    cv_.notify_all();
}

int TcpTransport::connect_to(const Endpoint& receiver) {
    const auto it = ports_.find(receiver);
    if (it == ports_.end()) throw ChannelFailure("no address for " + to_string(receiver));
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw ChannelFailure("socket() failed");
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(it->second);
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
        ::close(fd);
        throw ChannelFailure("connect to " + to_string(receiver) + " failed");
    }
    open_fds_.push_back(fd);
    return fd;
}

void TcpTransport::send(Message m) {
    int fd;
    std::vector<u8> frame;
    {
        std::unique_lock lock(mu_);
        if (down_) throw ChannelFailure("transport shut down");
        m.seq_no = ++send_seq_[{m.sender, m.receiver}];
        maybe_record(m);
        const auto key = std::make_pair(m.sender, m.receiver);
        auto it = conns_.find(key);
        if (it == conns_.end()) it = conns_.emplace(key, connect_to(m.receiver)).first;
        fd = it->second;
        frame = serialize_message(m);
    }
    // write outside the lock; a channel has a single sending thread, so
    // per-channel frame order is preserved
    if (!write_all(fd, frame.data(), frame.size()))
        throw ChannelFailure("write to " + to_string(m.receiver) + " failed");
}

Message TcpTransport::recv(const Endpoint& me) {
    std::unique_lock lock(mu_);
    const auto it = boxes_.find(me);
    if (it == boxes_.end()) throw ChannelFailure("endpoint not hosted here");
    Mailbox& box = it->second;
    cv_.wait(lock, [&] { return !box.queue.empty() || box.closed; });
    if (box.queue.empty()) throw ChannelFailure("transport shut down");
    Message m = std::move(box.queue.front());
    box.queue.pop_front();
    return m;
}

void TcpTransport::shutdown() {
    std::lock_guard lock(mu_);
    if (down_) return;
    down_ = true;
    for (auto& [ep, box] : boxes_) box.closed = true;
    for (Listener& l : listeners_) {
        ::shutdown(l.fd, SHUT_RDWR);
        ::close(l.fd);
    }
    for (const int fd : open_fds_) {
        ::shutdown(fd, SHUT_RDWR);
        ::close(fd);
    }
    cv_.notify_all();
}

}  // namespace mpcsr
