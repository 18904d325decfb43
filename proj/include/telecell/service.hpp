#ifndef TELECELL_SERVICE_HPP
#define TELECELL_SERVICE_HPP

#include <atomic>
#include <filesystem>
#include <functional>
#include <ostream>

#include "telecell/scenario.hpp"

namespace telecell {

inline constexpr int service_protocol_version = 1;

struct serve_options {
    scenario_config config;
    unsigned short port = 0;   ///< 0 picks a free port
    double rate_hz = 60.0;     ///< state message rate
    bool pace = true;          ///< follow the wall clock at dt; false runs as fast as possible
    std::filesystem::path log_dir = ".";
    std::function<void(unsigned short)> on_listening;
    std::atomic<bool> *stop_flag = nullptr; ///< set externally to end the session early
};

/// WebSocket live session. Returns once the scenario has run to its end (or
/// stop_flag is raised). Telemetry is streamed to <log_dir>/<name>-<session>.jsonl.
///
/// Wire format, one JSON object per frame: {"type", "session", "seq", "payload"}.
/// Server -> client: info (on connect), state (decimated records), fault, stop.
/// Client -> server: master_input, set_mode, set_channel, start, stop.
/// The first connected client owns input; the rest get a read-only stream.
int serve(const serve_options &options, std::ostream &log);

/// Converts a client message into a kernel input event. Throws config_error on a
/// malformed payload. Returns a null json for start/stop, which are handled by
/// the service itself.
json client_message_to_event(const json &message);

} // namespace telecell

#endif // TELECELL_SERVICE_HPP
