#include "agentkit/remote_providers.hpp"

#include <cmath>

#include "httplib.h"

#include "agentkit/errors.hpp"

namespace agentkit {

Endpoint parse_endpoint(std::string_view url) {
    constexpr std::string_view scheme = "http://";
    if (url.starts_with("https://"))
        throw ConfigError("https endpoints are not supported by this build; use a plain http proxy: " +
                          std::string(url));
    if (!url.starts_with(scheme)) throw ConfigError("endpoint must start with http://: " + std::string(url));
    url.remove_prefix(scheme.size());
    Endpoint e;
    const auto slash = url.find('/');
    const auto authority = url.substr(0, slash);
    if (slash != std::string_view::npos) e.base_path = std::string(url.substr(slash));
    while (!e.base_path.empty() && e.base_path.back() == '/') e.base_path.pop_back();
    const auto colon = authority.rfind(':');
    e.host = std::string(authority.substr(0, colon));
    if (colon != std::string_view::npos) {
        const auto port = authority.substr(colon + 1);
        int p = 0;
        for (char c : port) {
            if (c < '0' || c > '9') throw ConfigError("bad port in endpoint: " + std::string(port));
            p = p * 10 + (c - '0');
            if (p > 65535) throw ConfigError("bad port in endpoint: " + std::string(port));
        }
        if (p == 0) throw ConfigError("bad port in endpoint: " + std::string(port));
        e.port = static_cast<std::uint16_t>(p);
    }
    if (e.host.empty()) throw ConfigError("endpoint has no host: http://" + std::string(authority));
    return e;
}

namespace {

Json post_json(const Endpoint& e, const RemoteSettings& s, const std::string& path, const Json& body) {
    httplib::Client cli(e.host, e.port);
    const auto secs = s.timeout.count() / 1000;
    const auto usecs = (s.timeout.count() % 1000) * 1000;
    cli.set_connection_timeout(secs, usecs);
    cli.set_read_timeout(secs, usecs);
    cli.set_write_timeout(secs, usecs);
    httplib::Headers headers;
    if (!s.api_key.empty()) headers.emplace("Authorization", "Bearer " + s.api_key);
    auto res = cli.Post(e.base_path + path, headers, body.dump(), "application/json");
    if (!res) throw ProviderUnavailable("POST " + e.host + e.base_path + path + ": " + httplib::to_string(res.error()));
    if (res->status != 200)
        throw ProviderError("POST " + e.base_path + path + " returned HTTP " + std::to_string(res->status));
    try {
        return Json::parse(res->body);
    } catch (const Json::parse_error& ex) {
        throw ProviderError(std::string("response is not JSON: ") + ex.what());
    }
}

std::string_view json_type(ParamType t) {
    switch (t) {
        case ParamType::integer: return "integer";
        case ParamType::number: return "number";
        case ParamType::boolean: return "boolean";
        case ParamType::object: return "object";
        case ParamType::array: return "array";
        case ParamType::string:
        case ParamType::url:
        case ParamType::date: return "string";
    }
    return "string";
}

}  // namespace

Json parameters_json_schema(const ToolSchema& schema) {
    Json props = Json::object();
    Json required = Json::array();
    for (const auto& p : schema.canonical_parameters()) {
        Json prop{{"type", std::string(json_type(p.type))}};
        if (p.type == ParamType::url) prop["format"] = "uri";
        if (p.type == ParamType::date) prop["format"] = "date";
        if (!p.constraint.empty()) prop["description"] = p.constraint;
        props[p.name] = std::move(prop);
        if (p.required) required.push_back(p.name);
    }
    return {{"type", "object"}, {"properties", std::move(props)}, {"required", std::move(required)},
            {"additionalProperties", false}};
}

RemoteModel::RemoteModel(RemoteSettings s, std::shared_ptr<const Tokenizer> tokenizer)
    : settings_(std::move(s)), endpoint_(parse_endpoint(settings_.url)), tokenizer_(std::move(tokenizer)) {
    if (settings_.model.empty()) throw ConfigError("model.name is required for the remote model provider");
}

Json RemoteModel::request_body(const ModelRequest& req) const {
    Json messages = Json::array();
    if (!req.system_prompt.empty()) messages.push_back({{"role", "system"}, {"content", req.system_prompt}});
    for (const auto& m : req.messages) {
        switch (m.role) {
            case Role::system: messages.push_back({{"role", "system"}, {"content", m.content}}); break;
            case Role::human: messages.push_back({{"role", "user"}, {"content", m.content}}); break;
            case Role::tool:
                messages.push_back({{"role", "tool"}, {"tool_call_id", *m.tool_call_id}, {"content", m.content}});
                break;
            case Role::ai: {
                Json a{{"role", "assistant"}, {"content", m.content}};
                if (!m.tool_calls.empty()) {
                    Json calls = Json::array();
                    for (const auto& c : m.tool_calls)
                        calls.push_back({{"id", c.call_id},
                                         {"type", "function"},
                                         {"function", {{"name", c.tool_name}, {"arguments", c.arguments.dump()}}}});
                    a["tool_calls"] = std::move(calls);
                }
                messages.push_back(std::move(a));
                break;
            }
        }
    }
    Json body{{"model", settings_.model}, {"messages", std::move(messages)}};
    if (!req.tools.empty()) {
        Json tools = Json::array();
        for (const auto& t : req.tools)
            tools.push_back({{"type", "function"},
                             {"function",
                              {{"name", t.tool_name},
                               {"description", t.enriched_description.empty() ? t.description : t.enriched_description},
                               {"parameters", parameters_json_schema(t)}}}});
        body["tools"] = std::move(tools);
    }
    return body;
}

ModelReply RemoteModel::parse_response(const Json& body, const ModelRequest& req) const {
    ModelReply r;
    try {
        const auto& msg = body.at("choices").at(0).at("message");
        const std::string content = msg.contains("content") && msg["content"].is_string() ? msg["content"].get<std::string>() : "";
        if (auto it = msg.find("tool_calls"); it != msg.end() && it->is_array() && !it->empty()) {
            std::size_t j = 0;
            for (const auto& c : *it) {
                ToolCallRequest call;
                call.call_id = c.value("id", req.task_id + "-remote-" + std::to_string(j));
                call.tool_name = c.at("function").at("name").get<std::string>();
                const auto& args = c.at("function").at("arguments");
                call.arguments = args.is_string() ? Json::parse(args.get<std::string>()) : args;
                if (!call.arguments.is_object()) call.arguments = Json::object();
                r.tool_calls.push_back(std::move(call));
                ++j;
            }
            r.reasoning = content;
        } else {
            r.final_answer = content;
        }
        if (auto u = body.find("usage"); u != body.end() && u->contains("completion_tokens")) {
            r.output_tokens = (*u)["completion_tokens"].get<std::size_t>();
        } else {
            r.output_tokens = tokenizer_->count(content);
        }
    } catch (const Json::exception& e) {
        throw ProviderError(std::string("unexpected chat completion shape: ") + e.what());
    }
    return r;
}

ModelReply RemoteModel::complete(const ModelRequest& req) const {
    return parse_response(post_json(endpoint_, settings_, "/chat/completions", request_body(req)), req);
}

RemoteEmbedder::RemoteEmbedder(RemoteSettings s, std::size_t dimension)
    : settings_(std::move(s)), endpoint_(parse_endpoint(settings_.url)), dimension_(dimension) {
    if (dimension_ == 0) throw ConfigError("embedding.dimension must be positive");
}

EmbeddingVector RemoteEmbedder::embed(std::string_view input) const {
    if (input.empty()) throw EmptyInput("cannot embed empty text");
    const Json body{{"model", settings_.model}, {"input", std::string(input)}};
    const Json resp = post_json(endpoint_, settings_, "/embeddings", body);
    EmbeddingVector v;
    try {
        v.values = resp.at("data").at(0).at("embedding").get<std::vector<double>>();
    } catch (const Json::exception& e) {
        throw ProviderError(std::string("unexpected embedding shape: ") + e.what());
    }
    if (v.dimension() != dimension_)
        throw DimensionMismatch("embedding endpoint returned dimension " + std::to_string(v.dimension()) +
                                ", configured " + std::to_string(dimension_));
    const double n = v.norm();
    if (n == 0.0) throw ZeroVector("embedding endpoint returned a zero vector");
    for (auto& x : v.values) x /= n;
    return v;
}

}  // namespace agentkit
