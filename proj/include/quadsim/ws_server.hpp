#pragma once

// WebSocket transport for LiveSession. One io thread handles sockets, one
// thread paces the simulation against the wall clock and publishes
// telemetry at rate_hz.

#include <atomic>
#include <chrono>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "quadsim/live_session.hpp"

namespace quadsim {

namespace ws_detail {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

class Connection;

struct Hub {
    net::io_context ioc;
    std::mutex mutex;  // guards session
    LiveSession* session = nullptr;
    std::map<ClientId, std::weak_ptr<Connection>> clients;  // io thread only
    ClientId next_id = 1;

    void deliver(const std::vector<Outgoing>& out);
};

class Connection : public std::enable_shared_from_this<Connection> {
public:
    Connection(tcp::socket socket, Hub& hub) : ws_(std::move(socket)), hub_(hub) {}

    void start() {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.async_accept([self = shared_from_this()](beast::error_code ec) { self->on_accept(ec); });
    }

    void send(std::string text) {
        queue_.push_back(std::move(text));
        if (queue_.size() > 64) queue_.erase(queue_.begin() + 1);  // slow reader: drop stale frames
        if (queue_.size() == 1) write_next();
    }

private:
    void on_accept(beast::error_code ec) {
        if (ec) return;
        id_ = hub_.next_id++;
        hub_.clients[id_] = weak_from_this();
        std::vector<Outgoing> out;
        {
            std::lock_guard lock(hub_.mutex);
            out = hub_.session->connect(id_);
        }
        hub_.deliver(out);
        read_next();
    }

    void read_next() {
        ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
    }

    void on_read(beast::error_code ec) {
        if (ec) {
            close();
            return;
        }
        const std::string text = beast::buffers_to_string(buffer_.data());
        buffer_.consume(buffer_.size());
        std::vector<Outgoing> out;
        {
            std::lock_guard lock(hub_.mutex);
            out = hub_.session->handle(id_, text);
        }
        hub_.deliver(out);
        read_next();
    }

    void write_next() {
        ws_.text(true);
        ws_.async_write(net::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) {
                self->close();
                return;
            }
            self->queue_.pop_front();
            if (!self->queue_.empty()) self->write_next();
        });
    }

    void close() {
        if (closed_ || id_ == 0) return;
        closed_ = true;
        hub_.clients.erase(id_);
        std::lock_guard lock(hub_.mutex);
        hub_.session->disconnect(id_);
    }

    websocket::stream<beast::tcp_stream> ws_;
    Hub& hub_;
    beast::flat_buffer buffer_;
    std::deque<std::string> queue_;
    ClientId id_ = 0;
    bool closed_ = false;
};

inline void Hub::deliver(const std::vector<Outgoing>& out) {
    for (const auto& o : out) {
        if (o.to) {
            if (auto it = clients.find(*o.to); it != clients.end()) {
                if (auto c = it->second.lock()) c->send(o.text);
            }
        } else {
            for (auto& [id, weak] : clients) {
                if (auto c = weak.lock()) c->send(o.text);
            }
        }
    }
}

}  // namespace ws_detail

class WsServer {
public:
    /// Binds immediately; port 0 picks a free port.
    WsServer(LiveSession& session, unsigned short port, double rate_hz, const std::string& host = "127.0.0.1")
        : acceptor_(hub_.ioc), rate_hz_(rate_hz) {
        if (!(rate_hz >= 1.0 && rate_hz <= 100.0)) throw ValidationError("serve: rate_hz must be in [1, 100]");
        hub_.session = &session;
        namespace net = ws_detail::net;
        const ws_detail::tcp::endpoint ep(net::ip::make_address(host), port);
        acceptor_.open(ep.protocol());
        acceptor_.set_option(net::socket_base::reuse_address(true));
        acceptor_.bind(ep);
        acceptor_.listen();
    }

    ~WsServer() { stop(); }

    unsigned short port() const { return acceptor_.local_endpoint().port(); }

    void start() {
        if (running_.exchange(true)) return;
        accept_next();
        io_thread_ = std::thread([this] { hub_.ioc.run(); });
        sim_thread_ = std::thread([this] { sim_loop(); });
    }

    void stop() {
        if (!running_.exchange(false)) return;
        if (sim_thread_.joinable()) sim_thread_.join();
        hub_.ioc.stop();
        if (io_thread_.joinable()) io_thread_.join();
    }

    /// Blocks until stop() is called from another thread or the simulation fails.
    void wait() {
        while (running_ && sim_alive_) std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }

private:
    void accept_next() {
        acceptor_.async_accept([this](boost::beast::error_code ec, ws_detail::tcp::socket socket) {
            if (!ec) std::make_shared<ws_detail::Connection>(std::move(socket), hub_)->start();
            if (acceptor_.is_open()) accept_next();
        });
    }

    void sim_loop() {
        using clock = std::chrono::steady_clock;
        const double dt = hub_.session->simulation().scenario().dt;
        const double publish_every = 1.0 / rate_hz_;
        const auto t0 = clock::now();
        const double sim0 = hub_.session->time();
        double next_publish = sim0;
        while (running_ && sim_alive_) {
            const double wall = std::chrono::duration<double>(clock::now() - t0).count();
            std::vector<Outgoing> out;
            {
                std::lock_guard lock(hub_.mutex);
                LiveSession& s = *hub_.session;
                try {
                    while (s.time() - sim0 + dt <= wall + 1e-12) {
                        auto ev = s.advance();
                        out.insert(out.end(), ev.begin(), ev.end());
                        if (s.time() >= next_publish - 1e-9) {
                            out.push_back(s.telemetry());
                            next_publish += publish_every;
                        }
                    }
                } catch (const NumericalError& e) {
                    out.push_back({std::nullopt, error_message(e.what(), "simulation")});
                    sim_alive_ = false;
                }
            }
            if (!out.empty()) {
                boost::asio::post(hub_.ioc, [this, out = std::move(out)] { hub_.deliver(out); });
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(2));
        }
    }

    ws_detail::Hub hub_;
    ws_detail::tcp::acceptor acceptor_;
    double rate_hz_;
    std::atomic<bool> running_{false};
    std::atomic<bool> sim_alive_{true};
    std::thread io_thread_;
    std::thread sim_thread_;
};

}  // namespace quadsim
