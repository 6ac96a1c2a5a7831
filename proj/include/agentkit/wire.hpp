#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>

#include "agentkit/toolhost.hpp"

// Tool access over a byte stream. Each frame is a 4-byte big-endian payload
// length followed by that many bytes of UTF-8 JSON.
//
//   request   {"id": n, "method": "tools/list" | "tools/call", "params": {...}}
//   tools/call params {"name", "arguments", "call_id", "confirmation": bool}
//   result    {"id": n, "result": {"tools": [...]}}
//             {"id": n, "result": {"call_id", "content", "content_tokens"}}
//   error     {"id": n, "error": {"code", "message", "class", "content_tokens"}}
namespace agentkit::wire {

inline constexpr std::uint32_t kMaxFrameBytes = 16u << 20;

namespace code {
inline constexpr int parse_error = -32700;
inline constexpr int invalid_request = -32600;
inline constexpr int method_not_found = -32601;
inline constexpr int invalid_params = -32602;
inline constexpr int tool_error = -32000;
inline constexpr int tool_not_found = -32001;
}  // namespace code

std::string encode_frame(const Json& payload);

// Incremental decoder. next() returns one complete payload or nullopt when more
// bytes are needed; throws MalformedRecord for oversize frames or bad JSON.
class FrameDecoder {
public:
    void feed(std::string_view bytes) { buf_.append(bytes); }
    std::optional<Json> next();
    std::size_t buffered() const noexcept { return buf_.size(); }

private:
    std::string buf_;
    std::size_t consumed_ = 0;  // bytes of earlier frames, for error offsets
};

Json make_list_request(std::int64_t id);
Json make_call_request(std::int64_t id, const ValidatedCall& call);
Json make_error(const Json& id, int code, std::string_view message, std::optional<ErrorClass> cls);

// Server-side dispatch of one decoded request. Calls are validated again
// against the host's own schemas before they run.
Json handle_request(const ToolHost& host, const Json& request);

// Serves a host on 127.0.0.1. Port 0 picks a free port.
class WireServer {
public:
    explicit WireServer(const ToolHost& host, std::uint16_t port = 0);
    ~WireServer();
    WireServer(const WireServer&) = delete;
    WireServer& operator=(const WireServer&) = delete;

    std::uint16_t port() const noexcept { return port_; }
    void start();  // background accept loop
    void stop();

private:
    void serve();
    void handle_connection(int fd);

    const ToolHost& host_;
    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::atomic<bool> running_{false};
    std::thread thread_;
};

// Client transport: one connection per request. Connection failures are
// transient_network, receive timeouts are timeout.
class WireClient final : public ToolTransport {
public:
    WireClient(std::string host, std::uint16_t port,
               std::chrono::milliseconds timeout = std::chrono::milliseconds(5000));

    std::vector<ToolSchema> list_tools() override;
    ToolResult call(const ValidatedCall& call) override;

    // Sends one request and returns the decoded response. Throws ToolFailure.
    Json roundtrip(const Json& request);

private:
    std::string host_;
    std::uint16_t port_;
    std::chrono::milliseconds timeout_;
    std::atomic<std::int64_t> next_id_{1};
};

}  // namespace agentkit::wire
