#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>

#include "agentkit/engine.hpp"
#include "agentkit/tool_index.hpp"

// OpenAI-compatible HTTP endpoints (chat completions and embeddings). Plain
// http only; this build links no TLS library.
namespace agentkit {

struct Endpoint {
    std::string host;
    std::uint16_t port = 80;
    std::string base_path;  // without trailing slash, e.g. "/v1"
};

// Throws ConfigError for anything but http://host[:port][/path].
Endpoint parse_endpoint(std::string_view url);

struct RemoteSettings {
    std::string url;
    std::string api_key;
    std::string model;
    std::chrono::milliseconds timeout{60000};
};

class RemoteModel final : public ModelProvider {
public:
    explicit RemoteModel(RemoteSettings s, std::shared_ptr<const Tokenizer> tokenizer);
    ModelReply complete(const ModelRequest& request) const override;
    std::string name() const override { return "remote:" + settings_.model; }

    // Request body for the chat completions endpoint.
    Json request_body(const ModelRequest& request) const;
    // Throws ProviderError on unexpected shapes.
    ModelReply parse_response(const Json& body, const ModelRequest& request) const;

private:
    RemoteSettings settings_;
    Endpoint endpoint_;
    std::shared_ptr<const Tokenizer> tokenizer_;
};

class RemoteEmbedder final : public Embedder {
public:
    RemoteEmbedder(RemoteSettings s, std::size_t dimension);
    EmbeddingVector embed(std::string_view text) const override;
    std::size_t dimension() const noexcept override { return dimension_; }
    std::string name() const override { return "remote:" + settings_.model; }

private:
    RemoteSettings settings_;
    Endpoint endpoint_;
    std::size_t dimension_;
};

// JSON Schema object for a tool's parameters.
Json parameters_json_schema(const ToolSchema& schema);

}  // namespace agentkit
