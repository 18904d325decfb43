#include "telecell/service.hpp"

#include <chrono>
#include <deque>
#include <fstream>
#include <memory>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "telecell/session.hpp"

namespace telecell {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

json client_message_to_event(const json &message) {
    if (!message.is_object()) {
        throw config_error("", "message must be a JSON object");
    }
    if (!message.contains("type") || !message.at("type").is_string()) {
        throw config_error("type", "missing message type");
    }
    const auto type = message.at("type").get<std::string>();
    if (type == "start" || type == "stop") {
        return nullptr;
    }
    if (type == "state" || type == "info" || type == "fault") {
        throw config_error("type", "'" + type + "' is sent by the service only");
    }
    if (type != "master_input" && type != "set_mode" && type != "set_channel") {
        throw config_error("type", "unknown message type '" + type + "'");
    }
    json event = {{"type", type}};
    if (message.contains("payload")) {
        const json &p = message.at("payload");
        if (type == "set_mode" && p.is_string()) {
            event["mode"] = p;
        } else if (p.is_object()) {
            for (const auto &[k, v] : p.items()) {
                if (k != "type") {
                    event[k] = v;
                }
            }
        } else {
            throw config_error("payload", "expected an object");
        }
    }
    return event;
}

namespace {

class hub;

class client : public std::enable_shared_from_this<client> {
public:
    client(tcp::socket socket, hub &owner, std::uint64_t id) : m_ws(std::move(socket)), m_hub(owner), m_id(id) {}

    void start();
    void send(std::string text);
    void close();
    std::uint64_t id() const { return m_id; }
    std::uint64_t next_seq() { return m_seq++; }

private:
    void read();
    void write_next();

    websocket::stream<beast::tcp_stream> m_ws;
    hub &m_hub;
    std::uint64_t m_id;
    std::uint64_t m_seq = 0;
    beast::flat_buffer m_buffer;
    std::deque<std::string> m_outbox;
    bool m_open = false;
    bool m_closing = false;
};

struct inbound {
    std::uint64_t client = 0;
    json message;
};

/// Connection bookkeeping; lives on the io thread. The kernel talks to it only
/// through post() and the inbound queue.
class hub {
public:
    hub(net::io_context &ioc, std::string session_id, json info)
        : m_ioc(ioc), m_session(std::move(session_id)), m_info(std::move(info)) {}

    void joined(const std::shared_ptr<client> &c) {
        m_clients.push_back(c);
        if (!m_owner) {
            m_owner = c->id();
        }
        json info = m_info;
        info["role"] = (m_owner == c->id()) ? "owner" : "observer";
        send_to(*c, "info", info);
    }

    void left(std::uint64_t id) {
        std::erase_if(m_clients, [id](const auto &c) { return c->id() == id; });
        // The kernel keeps the last operator target (hold-last).
        if (m_owner == id) {
            m_owner.reset();
        }
    }

    void received(std::uint64_t id, const std::string &text) {
        json message;
        try {
            message = json::parse(text);
        } catch (const json::exception &e) {
            fault(id, std::string("malformed JSON: ") + e.what());
            return;
        }
        try {
            client_message_to_event(message);
        } catch (const config_error &e) {
            fault(id, e.what());
            return;
        }
        if (m_owner != id) {
            fault(id, "read-only client: input is owned by another connection");
            return;
        }
        std::lock_guard lock(m_mutex);
        m_inbox.push_back({id, std::move(message)});
    }

    std::vector<inbound> drain() {
        std::lock_guard lock(m_mutex);
        std::vector<inbound> out(m_inbox.begin(), m_inbox.end());
        m_inbox.clear();
        return out;
    }

    void broadcast(const std::string &type, const json &payload) {
        for (const auto &c : m_clients) {
            send_to(*c, type, payload);
        }
    }

    void fault(std::uint64_t id, const std::string &reason) {
        for (const auto &c : m_clients) {
            if (c->id() == id) {
                send_to(*c, "fault", json{{"reason", reason}});
            }
        }
    }

    void close_all() {
        for (const auto &c : m_clients) {
            c->close();
        }
    }

    net::io_context &io() { return m_ioc; }

private:
    void send_to(client &c, const std::string &type, const json &payload) {
        json m = {{"type", type}, {"session", m_session}, {"seq", c.next_seq()}, {"payload", payload}};
        c.send(m.dump());
    }

    net::io_context &m_ioc;
    std::string m_session;
    json m_info;
    std::vector<std::shared_ptr<client>> m_clients;
    std::optional<std::uint64_t> m_owner;
    std::mutex m_mutex;
    std::deque<inbound> m_inbox;
};

void client::start() {
    auto self = shared_from_this();
    m_ws.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    m_ws.async_accept([self](beast::error_code ec) {
        if (ec) {
            return;
        }
        self->m_open = true;
        self->m_hub.joined(self);
        self->read();
    });
}

void client::read() {
    auto self = shared_from_this();
    m_ws.async_read(m_buffer, [self](beast::error_code ec, std::size_t) {
        if (ec) {
            self->m_open = false;
            self->m_hub.left(self->m_id);
            return;
        }
        const std::string text = beast::buffers_to_string(self->m_buffer.data());
        self->m_buffer.consume(self->m_buffer.size());
        self->m_hub.received(self->m_id, text);
        self->read();
    });
}

void client::send(std::string text) {
    if (!m_open) {
        return;
    }
    m_outbox.push_back(std::move(text));
    if (m_outbox.size() == 1) {
        write_next();
    }
}

void client::write_next() {
    auto self = shared_from_this();
    m_ws.text(true);
    m_ws.async_write(net::buffer(m_outbox.front()), [self](beast::error_code ec, std::size_t) {
        if (ec) {
            self->m_outbox.clear();
            return;
        }
        self->m_outbox.pop_front();
        if (!self->m_outbox.empty()) {
            self->write_next();
        } else if (self->m_closing) {
            self->close();
        }
    });
}

void client::close() {
    m_closing = true;
    if (!m_open || !m_outbox.empty()) {
        return;
    }
    m_open = false;
    auto self = shared_from_this();
    m_ws.async_close(websocket::close_code::normal, [self](beast::error_code) {});
}

void accept_loop(tcp::acceptor &acceptor, hub &h, std::uint64_t &next_id) {
    acceptor.async_accept([&acceptor, &h, &next_id](beast::error_code ec, tcp::socket socket) {
        if (ec) {
            return;
        }
        std::make_shared<client>(std::move(socket), h, next_id++)->start();
        accept_loop(acceptor, h, next_id);
    });
}

std::string make_session_id() {
    std::random_device rd;
    std::ostringstream out;
    out << std::hex << ((static_cast<std::uint64_t>(rd()) << 32) | rd());
    return out.str();
}

json state_payload(const telemetry_record &r, int dof) {
    return json::parse(serialize_record(r, dof));
}

} // namespace

int serve(const serve_options &options, std::ostream &log) {
    if (!(options.rate_hz > 0.0)) {
        throw config_error("rate-hz", "must be > 0");
    }
    session kernel(options.config);
    kernel.set_keep_records(false);
    const int dof = options.config.sim.dof;
    const double dt = options.config.sim.dt;
    const std::string id = make_session_id();

    std::filesystem::create_directories(options.log_dir);
    const auto log_path = options.log_dir / (options.config.name + "-" + id + ".jsonl");
    std::ofstream telemetry(log_path);
    if (!telemetry) {
        throw config_error("TELECELL_LOG_DIR", "cannot write " + log_path.string());
    }
    telemetry << serialize_header(kernel.series()) << '\n';

    json info = {{"protocol_version", service_protocol_version},
                 {"schema", telemetry_schema_name},
                 {"schema_version", telemetry_schema_version},
                 {"rate_hz", options.rate_hz},
                 {"dt", dt},
                 {"dof", dof},
                 {"arms", options.config.arms.size()},
                 {"fingers", options.config.hand.fingers},
                 {"total_ticks", kernel.total_ticks()},
                 {"telemetry", log_path.string()},
                 {"config", kernel.series().config()}};

    net::io_context ioc;
    tcp::acceptor acceptor(ioc, tcp::endpoint(net::ip::make_address("127.0.0.1"), options.port));
    hub h(ioc, id, info);
    std::uint64_t next_id = 0;
    accept_loop(acceptor, h, next_id);
    const unsigned short port = acceptor.local_endpoint().port();
    log << "telecell serve: session " << id << " on ws://127.0.0.1:" << port << ", telemetry " << log_path.string()
        << std::endl;
    if (options.on_listening) {
        options.on_listening(port);
    }

    auto guard = net::make_work_guard(ioc);
    std::thread io_thread([&ioc] { ioc.run(); });

    int result = 0;
    try {
        using clock = std::chrono::steady_clock;
        bool running = true;
        auto origin = clock::now();
        std::uint64_t origin_tick = 0;
        std::int64_t last_frame = -1;
        while (!kernel.finished()) {
            if (options.stop_flag && options.stop_flag->load()) {
                break;
            }
            for (auto &in : h.drain()) {
                const auto type = in.message.at("type").get<std::string>();
                if (type == "start" || type == "stop") {
                    const bool run = type == "start";
                    if (run && !running) {
                        origin = clock::now();
                        origin_tick = kernel.ticks_done();
                    }
                    running = run;
                    continue;
                }
                try {
                    kernel.submit(client_message_to_event(in.message));
                } catch (const config_error &e) {
                    net::post(ioc, [&h, cid = in.client, what = std::string(e.what())] { h.fault(cid, what); });
                }
            }
            if (!running) {
                std::this_thread::sleep_for(std::chrono::milliseconds(5));
                continue;
            }
            if (options.pace) {
                const auto due = origin + std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(
                                              static_cast<double>(kernel.ticks_done() - origin_tick) * dt));
                // Behind schedule: run the tick immediately; never skip one.
                std::this_thread::sleep_until(due);
            }
            const telemetry_record &rec = kernel.step();
            telemetry << serialize_record(rec, dof) << '\n';
            const auto frame = static_cast<std::int64_t>(std::floor(rec.time * options.rate_hz + 1e-9));
            if (frame != last_frame) {
                last_frame = frame;
                net::post(ioc, [&h, payload = state_payload(rec, dof)] { h.broadcast("state", payload); });
            }
        }
        net::post(ioc, [&h, done = kernel.ticks_done(), finished = kernel.finished()] {
            h.broadcast("stop", json{{"reason", finished ? "finished" : "stopped"}, {"ticks", done}});
        });
    } catch (const sim_fault &e) {
        log << "telecell serve: " << e.what() << std::endl;
        net::post(ioc, [&h, what = std::string(e.what())] { h.broadcast("fault", json{{"reason", what}, {"fatal", true}}); });
        result = 3;
    }
    telemetry.flush();

    net::post(ioc, [&] {
        acceptor.close();
        h.close_all();
    });
    guard.reset();
    // Let pending frames and close handshakes drain, then stop.
    std::thread stopper([&ioc] {
        std::this_thread::sleep_for(std::chrono::milliseconds(500));
        ioc.stop();
    });
    io_thread.join();
    stopper.join();
    return result;
}

} // namespace telecell
