#include <gtest/gtest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include "support.hpp"

using namespace agentkit;
using namespace agentkit::testing;
namespace w = agentkit::wire;

namespace {

std::shared_ptr<ToolHost> bundled_host() { return host_from(load_registry(bundled("registry.jsonl"))); }

ValidatedCall validated(const ToolHost& h, ToolCallRequest r) { return std::get<ValidatedCall>(h.validate(r)); }

int error_code(const Json& response) { return response.at("error").at("code").get<int>(); }

// Accepts connections and never answers.
class SilentListener {
public:
    SilentListener() {
        fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        sockaddr_in a{};
        a.sin_family = AF_INET;
        a.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        ::bind(fd_, reinterpret_cast<sockaddr*>(&a), sizeof a);
        ::listen(fd_, 4);
        socklen_t len = sizeof a;
        ::getsockname(fd_, reinterpret_cast<sockaddr*>(&a), &len);
        port_ = ntohs(a.sin_port);
    }
    ~SilentListener() { ::close(fd_); }
    std::uint16_t port() const { return port_; }

private:
    int fd_ = -1;
    std::uint16_t port_ = 0;
};

}  // namespace

TEST(Frames, LengthPrefixIsBigEndian) {
    const auto f = w::encode_frame(Json{{"a", 1}});
    ASSERT_EQ(f.size(), 4u + 7u);
    EXPECT_EQ(f.substr(0, 4), std::string("\0\0\0\x07", 4));
    EXPECT_EQ(f.substr(4), R"({"a":1})");
}

TEST(Frames, DecoderHandlesPartialAndBackToBackFrames) {
    std::string stream;
    for (int i = 0; i < 5; ++i) stream += w::encode_frame(Json{{"i", i}, {"s", std::string(static_cast<std::size_t>(i) * 100, 'x')}});
    w::FrameDecoder d;
    std::vector<int> seen;
    for (char c : stream) {
        d.feed(std::string_view(&c, 1));
        while (auto j = d.next()) seen.push_back((*j)["i"].get<int>());
    }
    EXPECT_EQ(seen, (std::vector<int>{0, 1, 2, 3, 4}));
    EXPECT_EQ(d.buffered(), 0u);
    EXPECT_FALSE(d.next().has_value());
}

TEST(Frames, OversizeAndInvalidPayloadsAreRejected) {
    w::FrameDecoder big;
    big.feed(std::string("\x7f\xff\xff\xff", 4));
    EXPECT_THROW(big.next(), MalformedRecord);
    w::FrameDecoder bad;
    bad.feed(std::string("\0\0\0\x03", 4) + "{x}");
    EXPECT_THROW(bad.next(), MalformedRecord);
}

TEST(Dispatch, ErrorCodes) {
    const auto h = bundled_host();
    EXPECT_EQ(error_code(w::handle_request(*h, Json::array())), w::code::invalid_request);
    EXPECT_EQ(error_code(w::handle_request(*h, Json{{"id", 1}})), w::code::invalid_request);
    EXPECT_EQ(error_code(w::handle_request(*h, Json{{"id", 1}, {"method", "tools/nap"}})), w::code::method_not_found);
    const auto unknown = w::handle_request(
        *h, Json{{"id", 2}, {"method", "tools/call"}, {"params", {{"name", "nope"}, {"arguments", Json::object()}}}});
    EXPECT_EQ(error_code(unknown), w::code::tool_not_found);
    EXPECT_EQ(unknown["error"]["class"], "tool_not_found");
    EXPECT_EQ(unknown["id"], 2);
    const auto invalid = w::handle_request(
        *h, Json{{"id", 3}, {"method", "tools/call"}, {"params", {{"name", "web_search"}, {"arguments", {{"q", 1}}}}}});
    EXPECT_EQ(error_code(invalid), w::code::invalid_params);
    EXPECT_EQ(invalid["error"]["class"], "invalid_arguments");
    const auto unconfirmed = w::handle_request(
        *h, Json{{"id", 4}, {"method", "tools/call"}, {"params", {{"name", "generate_ppt"}, {"arguments", {{"topic", "x"}}}}}});
    EXPECT_EQ(error_code(unconfirmed), w::code::tool_error);
    EXPECT_GT(unconfirmed["error"]["content_tokens"].get<std::size_t>(), 0u);
    const auto list = w::handle_request(*h, w::make_list_request(5));
    EXPECT_EQ(list["result"]["tools"].size(), h->size());
}

TEST(Dispatch, MalformedFrameOnSocketGetsParseError) {
    const auto h = bundled_host();
    w::WireServer server(*h);
    server.start();
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in a{};
    a.sin_family = AF_INET;
    a.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    a.sin_port = htons(server.port());
    ASSERT_EQ(::connect(fd, reinterpret_cast<sockaddr*>(&a), sizeof a), 0);
    const std::string frame = std::string("\0\0\0\x04", 4) + "{{{{";
    ASSERT_EQ(::send(fd, frame.data(), frame.size(), 0), static_cast<ssize_t>(frame.size()));
    w::FrameDecoder d;
    std::optional<Json> reply;
    char buf[4096];
    while (!reply) {
        const auto n = ::recv(fd, buf, sizeof buf, 0);
        ASSERT_GT(n, 0);
        d.feed(std::string_view(buf, static_cast<std::size_t>(n)));
        reply = d.next();
    }
    ::close(fd);
    EXPECT_EQ(error_code(*reply), w::code::parse_error);
    server.stop();
}

TEST(Client, MatchesInProcessTransport) {
    const auto h = bundled_host();
    w::WireServer server(*h);
    server.start();
    w::WireClient client("127.0.0.1", server.port());
    InProcessTransport local(*h);
    EXPECT_EQ(client.list_tools(), local.list_tools());
    const std::vector<ToolCallRequest> calls{
        call_of("a", "get_weather", Json{{"city", "Oslo"}}),
        call_of("b", "convert_currency", Json{{"amount", 3}, {"from_currency", "USD"}, {"to_currency", "EUR"}}),
        call_of("c", "generate_ppt", Json{{"topic", "owls"}}),
    };
    for (const auto& c : calls) {
        const auto v = validated(*h, c);
        for (const auto& vc : {v, v.with_confirmation()}) {
            const auto remote = client.call(vc);
            const auto inproc = local.call(vc);
            EXPECT_EQ(remote.call_id, inproc.call_id);
            EXPECT_EQ(remote.error, inproc.error) << c.tool_name;
            EXPECT_EQ(remote.content, inproc.content);
            EXPECT_EQ(remote.content_tokens, inproc.content_tokens);
        }
    }
    server.stop();
}

TEST(Client, RefusedConnectionIsTransient) {
    const auto h = bundled_host();
    std::uint16_t port = 0;
    {
        w::WireServer server(*h);
        server.start();
        port = server.port();
        server.stop();
    }
    w::WireClient client("127.0.0.1", port, std::chrono::milliseconds(200));
    const auto r = client.call(validated(*h, call_of("a", "web_search", Json{{"query", "x"}})));
    EXPECT_EQ(r.error, ErrorClass::transient_network);
    try {
        client.list_tools();
        FAIL() << "expected ToolFailure";
    } catch (const ToolFailure& e) {
        EXPECT_EQ(e.error_class(), ErrorClass::transient_network);
    }
}

TEST(Client, SilentServerTimesOut) {
    const auto h = bundled_host();
    SilentListener silent;
    w::WireClient client("127.0.0.1", silent.port(), std::chrono::milliseconds(100));
    const auto r = client.call(validated(*h, call_of("a", "web_search", Json{{"query", "x"}})));
    EXPECT_EQ(r.error, ErrorClass::timeout);
}
