#include "agentkit/wire.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "agentkit/errors.hpp"

namespace agentkit::wire {

std::string encode_frame(const Json& payload) {
    const std::string body = payload.dump();
    if (body.size() > kMaxFrameBytes) throw InvariantViolation("frame-size", "payload exceeds frame limit");
    const auto n = static_cast<std::uint32_t>(body.size());
    std::string out;
    out.reserve(4 + body.size());
    out.push_back(static_cast<char>((n >> 24) & 0xff));
    out.push_back(static_cast<char>((n >> 16) & 0xff));
    out.push_back(static_cast<char>((n >> 8) & 0xff));
    out.push_back(static_cast<char>(n & 0xff));
    out += body;
    return out;
}

std::optional<Json> FrameDecoder::next() {
    if (buf_.size() < 4) return std::nullopt;
    const auto b = [&](std::size_t i) { return static_cast<std::uint32_t>(static_cast<unsigned char>(buf_[i])); };
    const std::uint32_t n = (b(0) << 24) | (b(1) << 16) | (b(2) << 8) | b(3);
    if (n > kMaxFrameBytes) throw MalformedRecord(consumed_, "frame length " + std::to_string(n) + " exceeds limit");
    if (buf_.size() < 4 + static_cast<std::size_t>(n)) return std::nullopt;
    Json j;
    try {
        j = Json::parse(buf_.begin() + 4, buf_.begin() + 4 + n);
    } catch (const Json::parse_error& e) {
        throw MalformedRecord(consumed_ + 4 + (e.byte > 0 ? e.byte - 1 : 0), e.what());
    }
    buf_.erase(0, 4 + n);
    consumed_ += 4 + n;
    return j;
}

Json make_list_request(std::int64_t id) { return {{"id", id}, {"method", "tools/list"}, {"params", Json::object()}}; }

Json make_call_request(std::int64_t id, const ValidatedCall& call) {
    const auto& r = call.request();
    return {{"id", id},
            {"method", "tools/call"},
            {"params",
             {{"name", r.tool_name},
              {"arguments", r.arguments},
              {"call_id", r.call_id},
              {"confirmation", call.confirmed()}}}};
}

Json make_error(const Json& id, int code, std::string_view message, std::optional<ErrorClass> cls) {
    Json err{{"code", code}, {"message", std::string(message)}};
    err["class"] = cls ? Json(std::string(to_string(*cls))) : Json(nullptr);
    return {{"id", id}, {"error", std::move(err)}};
}

Json handle_request(const ToolHost& host, const Json& req) {
    const Json id = req.is_object() && req.contains("id") ? req["id"] : Json(nullptr);
    if (!req.is_object() || !req.contains("method") || !req["method"].is_string())
        return make_error(id, code::invalid_request, "request needs a string method", std::nullopt);
    const auto method = req["method"].get<std::string>();
    const Json params = req.value("params", Json::object());

    if (method == "tools/list") {
        Json tools = Json::array();
        for (const auto& s : host.list_tools()) tools.push_back(to_json(s));
        return {{"id", id}, {"result", {{"tools", std::move(tools)}}}};
    }
    if (method != "tools/call") return make_error(id, code::method_not_found, "unknown method: " + method, std::nullopt);

    if (!params.is_object() || !params.contains("name") || !params["name"].is_string())
        return make_error(id, code::invalid_params, "tools/call needs params.name", ErrorClass::invalid_arguments);
    ToolCallRequest call;
    call.tool_name = params["name"].get<std::string>();
    call.arguments = params.value("arguments", Json::object());
    call.call_id = params.value("call_id", "");
    if (!call.arguments.is_object())
        return make_error(id, code::invalid_params, "arguments must be an object", ErrorClass::invalid_arguments);

    // Error content is counted like in-process results so both transports agree.
    auto counted = [&](Json e) {
        e["error"]["content_tokens"] = host.tokenizer().count(e["error"]["message"].get<std::string>());
        return e;
    };
    auto v = host.validate(call);
    if (auto* rej = std::get_if<ValidationResult>(&v)) {
        if (!host.find(call.tool_name))
            return counted(make_error(id, code::tool_not_found, rej->reason, ErrorClass::tool_not_found));
        return counted(make_error(id, code::invalid_params, rej->reason, ErrorClass::invalid_arguments));
    }
    ValidatedCall vc = std::get<ValidatedCall>(std::move(v));
    if (params.value("confirmation", false)) vc = vc.with_confirmation();
    const ToolResult r = host.invoke(vc);
    if (!r.ok()) return counted(make_error(id, code::tool_error, r.content, *r.error));
    return {{"id", id}, {"result", {{"call_id", r.call_id}, {"content", r.content}, {"content_tokens", r.content_tokens}}}};
}

// --- Sockets -------------------------------------------------------------

namespace {

class Fd {
public:
    explicit Fd(int fd = -1) : fd_(fd) {}
    ~Fd() {
        if (fd_ >= 0) ::close(fd_);
    }
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    int get() const noexcept { return fd_; }

private:
    int fd_;
};

void set_timeouts(int fd, std::chrono::milliseconds t) {
    timeval tv{};
    tv.tv_sec = static_cast<time_t>(t.count() / 1000);
    tv.tv_usec = static_cast<suseconds_t>((t.count() % 1000) * 1000);
    ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
}

// False on EOF or error; errno is left for the caller.
bool write_all(int fd, std::string_view data) {
    while (!data.empty()) {
        const auto n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) return false;
        data.remove_prefix(static_cast<std::size_t>(n));
    }
    return true;
}

enum class ReadStatus { frame, eof, timeout, error };

ReadStatus read_frame(int fd, FrameDecoder& dec, Json& out) {
    char buf[4096];
    while (true) {
        if (auto j = dec.next()) {
            out = std::move(*j);
            return ReadStatus::frame;
        }
        const auto n = ::recv(fd, buf, sizeof buf, 0);
        if (n < 0 && errno == EINTR) continue;
        if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) return ReadStatus::timeout;
        if (n < 0) return ReadStatus::error;
        if (n == 0) return ReadStatus::eof;
        dec.feed(std::string_view(buf, static_cast<std::size_t>(n)));
    }
}

}  // namespace

WireServer::WireServer(const ToolHost& host, std::uint16_t port) : host_(host) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw IoError(std::string("socket: ") + std::strerror(errno));
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(port);
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(listen_fd_, 16) < 0) {
        const std::string why = std::strerror(errno);
        ::close(listen_fd_);
        throw IoError("cannot listen on 127.0.0.1:" + std::to_string(port) + ": " + why);
    }
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
}

WireServer::~WireServer() {
    stop();
    if (listen_fd_ >= 0) ::close(listen_fd_);
}

void WireServer::start() {
    if (running_.exchange(true)) return;
    thread_ = std::thread([this] { serve(); });
}

void WireServer::stop() {
    running_ = false;
    if (thread_.joinable()) thread_.join();
}

void WireServer::serve() {
    while (running_) {
        pollfd p{listen_fd_, POLLIN, 0};
        const int rc = ::poll(&p, 1, 50);
        if (rc <= 0) continue;
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) continue;
        handle_connection(fd);
    }
}

void WireServer::handle_connection(int raw) {
    Fd fd(raw);
    set_timeouts(fd.get(), std::chrono::milliseconds(2000));
    FrameDecoder dec;
    while (running_) {
        Json req;
        ReadStatus st;
        try {
            st = read_frame(fd.get(), dec, req);
        } catch (const MalformedRecord& e) {
            write_all(fd.get(), encode_frame(make_error(nullptr, code::parse_error, e.what(), std::nullopt)));
            return;
        }
        if (st != ReadStatus::frame) return;
        if (!write_all(fd.get(), encode_frame(handle_request(host_, req)))) return;
    }
}

WireClient::WireClient(std::string host, std::uint16_t port, std::chrono::milliseconds timeout)
    : host_(std::move(host)), port_(port), timeout_(timeout) {}

Json WireClient::roundtrip(const Json& request) {
    Fd fd(::socket(AF_INET, SOCK_STREAM, 0));
    if (fd.get() < 0) throw ToolFailure(ErrorClass::transient_network, std::string("socket: ") + std::strerror(errno));
    set_timeouts(fd.get(), timeout_);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port_);
    if (::inet_pton(AF_INET, host_.c_str(), &addr.sin_addr) != 1)
        throw ToolFailure(ErrorClass::transient_network, "bad IPv4 address: " + host_);
    if (::connect(fd.get(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
        const std::string why = std::strerror(errno);
        throw ToolFailure(errno == EINPROGRESS || errno == ETIMEDOUT ? ErrorClass::timeout : ErrorClass::transient_network,
                          "connect " + host_ + ":" + std::to_string(port_) + ": " + why);
    }
    if (!write_all(fd.get(), encode_frame(request))) {
        if (errno == EAGAIN || errno == EWOULDBLOCK) throw ToolFailure(ErrorClass::timeout, "send timed out");
        throw ToolFailure(ErrorClass::transient_network, std::string("send: ") + std::strerror(errno));
    }
    FrameDecoder dec;
    Json resp;
    ReadStatus st;
    try {
        st = read_frame(fd.get(), dec, resp);
    } catch (const MalformedRecord& e) {
        throw ToolFailure(ErrorClass::transient_network, std::string("bad response frame: ") + e.what());
    }
    switch (st) {
        case ReadStatus::frame: return resp;
        case ReadStatus::timeout:
            throw ToolFailure(ErrorClass::timeout, "no response within " + std::to_string(timeout_.count()) + " ms");
        case ReadStatus::eof: throw ToolFailure(ErrorClass::transient_network, "connection closed before response");
        case ReadStatus::error: break;
    }
    throw ToolFailure(ErrorClass::transient_network, std::string("recv: ") + std::strerror(errno));
}

std::vector<ToolSchema> WireClient::list_tools() {
    const Json resp = roundtrip(make_list_request(next_id_++));
    if (resp.contains("error"))
        throw ToolFailure(ErrorClass::transient_network, resp["error"].value("message", "tools/list failed"));
    std::vector<ToolSchema> out;
    try {
        for (const auto& t : resp.at("result").at("tools")) out.push_back(schema_from_json(t));
    } catch (const std::exception& e) {
        throw ToolFailure(ErrorClass::transient_network, std::string("bad tools/list response: ") + e.what());
    }
    return out;
}

ToolResult WireClient::call(const ValidatedCall& call) {
    ToolResult r;
    r.call_id = call.request().call_id;
    const auto start = std::chrono::steady_clock::now();
    try {
        const Json resp = roundtrip(make_call_request(next_id_++, call));
        if (auto it = resp.find("error"); it != resp.end()) {
            r.content = it->value("message", "tool error");
            const auto cls = it->contains("class") && (*it)["class"].is_string()
                                 ? error_class_from_string((*it)["class"].get<std::string>())
                                 : std::nullopt;
            r.error = cls.value_or(ErrorClass::tool_crash);
            r.content_tokens = it->value("content_tokens", std::size_t{0});
        } else {
            const auto& res = resp.at("result");
            r.content = res.at("content").get<std::string>();
            r.content_tokens = res.value("content_tokens", std::size_t{0});
        }
    } catch (const ToolFailure& f) {
        r.error = f.error_class();
        r.content = f.what();
    } catch (const std::exception& e) {
        r.error = ErrorClass::transient_network;
        r.content = std::string("bad tools/call response: ") + e.what();
    }
    r.duration = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start);
    return r;
}

}  // namespace agentkit::wire
