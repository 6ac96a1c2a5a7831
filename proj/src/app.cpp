#include "agentkit/app.hpp"

#include <set>

#include "agentkit/errors.hpp"
#include "agentkit/remote_providers.hpp"

#ifndef AGENTKIT_DATA_DIR
#define AGENTKIT_DATA_DIR "data"
#endif

namespace agentkit {

std::filesystem::path default_data_dir() {
    if (const char* d = std::getenv("AGENTKIT_DATA_DIR")) return d;
    return AGENTKIT_DATA_DIR;
}

EngineConfig engine_config_from(const Config& cfg) {
    EngineConfig e;
    e.max_iterations = static_cast<std::size_t>(cfg.get_int("engine.max_iterations"));
    e.retry_limits.clear();
    for (auto c : kAllErrorClasses) {
        const auto n = cfg.get_int("engine.retry." + std::string(to_string(c)));
        if (n > 0) e.retry_limits[c] = static_cast<std::size_t>(n);
    }
    e.ablation = {cfg.get_bool("engine.ablation.prompt"), cfg.get_bool("engine.ablation.retrieval"),
                  cfg.get_bool("engine.ablation.memory")};
    e.auto_confirm = cfg.get_bool("engine.auto_confirm");
    e.tokenizer = make_tokenizer(cfg.get_text("tokenizer.provider"));
    e.retrieval.top_m = static_cast<std::size_t>(cfg.get_int("retrieval.top_m"));
    e.retrieval.min_retained = static_cast<std::size_t>(cfg.get_int("retrieval.min_retained"));
    e.retrieval.jump_min_gap = cfg.get_real("retrieval.jump_min_gap");
    e.memory.summarize_threshold = static_cast<std::size_t>(cfg.get_int("memory.summarize_threshold"));
    e.memory.compression_target = cfg.get_real("memory.compression_target");
    check_engine_config(e);
    return e;
}

namespace {

std::filesystem::path or_default(const std::string& configured, const std::filesystem::path& fallback) {
    return configured.empty() ? fallback : std::filesystem::path(configured);
}

std::pair<std::string, std::uint16_t> split_host_port(const std::string& s) {
    const auto colon = s.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == s.size())
        throw ConfigError("tools.server must be host:port, got '" + s + "'");
    int port = 0;
    for (char c : s.substr(colon + 1)) {
        if (c < '0' || c > '9') throw ConfigError("tools.server has a bad port: '" + s + "'");
        port = port * 10 + (c - '0');
        if (port > 65535) throw ConfigError("tools.server has a bad port: '" + s + "'");
    }
    std::string host = s.substr(0, colon);
    if (host == "localhost") host = "127.0.0.1";
    return {host, static_cast<std::uint16_t>(port)};
}

RemoteSettings remote_settings(const Config& cfg, const std::string& url, const std::string& key,
                               const std::string& model) {
    RemoteSettings s;
    s.url = url;
    s.api_key = key;
    s.model = model;
    s.timeout = std::chrono::milliseconds(cfg.get_int("model.timeout_ms"));
    return s;
}

}  // namespace

std::unique_ptr<App> App::build(const Config& cfg) {
    std::unique_ptr<App> app(new App());
    app->engine_ = engine_config_from(cfg);
    const auto& tok = app->engine_.tokenizer;
    const auto data = default_data_dir();
    std::string desc;

    // Model.
    const auto model_provider = cfg.get_text("model.provider");
    const auto model_url = cfg.get_text("model.url");
    std::shared_ptr<const ModelProvider> remote_model;
    if (model_provider == "remote" || (model_provider == "auto" && !model_url.empty())) {
        if (model_url.empty()) throw ProviderUnavailable("model.provider=remote needs model.url (AGENTKIT_MODEL_URL)");
        remote_model = std::make_shared<RemoteModel>(
            remote_settings(cfg, model_url, cfg.get_text("model.api_key"), cfg.get_text("model.name")), tok);
        app->env_.model = remote_model;
    } else if (model_provider == "auto" || model_provider == "double") {
        app->env_.model = std::make_shared<DoubleModel>(tok);
    } else {
        throw ConfigError("model.provider must be auto, double or remote, got '" + model_provider + "'");
    }
    desc += "model=" + app->env_.model->name();

    // Embedding.
    const auto emb_provider = cfg.get_text("embedding.provider");
    const auto emb_url = cfg.get_text("embedding.url");
    const auto dim = static_cast<std::size_t>(cfg.get_int("embedding.dimension"));
    std::shared_ptr<const Embedder> embedder;
    if (emb_provider == "remote" || (emb_provider == "auto" && !emb_url.empty())) {
        if (emb_url.empty()) throw ProviderUnavailable("embedding.provider=remote needs embedding.url");
        embedder = std::make_shared<RemoteEmbedder>(
            remote_settings(cfg, emb_url, cfg.get_text("embedding.api_key"), cfg.get_text("embedding.model")), dim);
    } else if (emb_provider == "auto" || emb_provider == "hashing") {
        embedder = std::make_shared<HashingEmbedder>(dim);
    } else {
        throw ConfigError("embedding.provider must be auto, hashing or remote, got '" + emb_provider + "'");
    }
    desc += " embedding=" + embedder->name() + "(" + std::to_string(dim) + ")";

    // Tools.
    std::vector<ToolSchema> schemas;
    const auto server = cfg.get_text("tools.server");
    if (!server.empty()) {
        const auto [host, port] = split_host_port(server);
        app->remote_ = std::make_unique<wire::WireClient>(host, port);
        try {
            schemas = app->remote_->list_tools();
        } catch (const ToolFailure& f) {
            throw ProviderUnavailable(std::string("tool server unreachable: ") + f.what());
        }
        app->env_.transport = app->remote_.get();
        desc += " tools=wire(" + server + ")";
    } else {
        const auto registry = or_default(cfg.get_text("tools.registry"), data / "registry.jsonl");
        app->host_ = std::make_unique<ToolHost>(tok);
        app->host_->set_timeout(std::chrono::milliseconds(cfg.get_int("tools.timeout_ms")));
        populate_mock_host(*app->host_, load_registry(registry));
        schemas = app->host_->list_tools();
        app->local_ = std::make_unique<InProcessTransport>(*app->host_);
        app->env_.transport = app->local_.get();
        desc += " tools=in-process(" + registry.string() + ")";
    }
    app->env_.index = std::make_shared<ToolIndex>(std::move(schemas), embedder);
    desc += " registry_size=" + std::to_string(app->env_.index->tools().size());

    // Summarizer.
    const auto summ = cfg.get_text("memory.summarizer.provider");
    if (summ == "extractive") {
        app->env_.summarizer = std::make_shared<ExtractiveSummarizer>(tok);
    } else if (summ == "model") {
        app->env_.summarizer = std::make_shared<ModelSummarizer>(app->env_.model, tok);
    } else {
        throw ConfigError("memory.summarizer.provider must be extractive or model, got '" + summ + "'");
    }
    desc += " summarizer=" + app->env_.summarizer->name();

    // Prompt profile and templates.
    const auto profile_path = cfg.get_text("prompt.profile");
    if (!profile_path.empty()) {
        app->env_.profile = AgentProfile::load(profile_path);
    } else if (std::filesystem::exists(data / "profile.json")) {
        app->env_.profile = AgentProfile::load(data / "profile.json");
    }
    const auto tdir = or_default(cfg.get_text("prompt.template_dir"), app->env_.profile.template_dir);
    if (!tdir.empty()) app->env_.templates = PromptTemplates::load(tdir);

    // Judge.
    const auto judge = cfg.get_text("judge.provider");
    if (judge == "stub") {
        app->judge_ = std::make_shared<StubJudge>();
    } else if (judge == "remote") {
        if (!remote_model) throw ProviderUnavailable("judge.provider=remote needs a remote model (AGENTKIT_MODEL_URL)");
        app->judge_ = std::make_shared<ModelJudge>(remote_model);
    } else if (judge != "none") {
        throw ConfigError("judge.provider must be stub, remote or none, got '" + judge + "'");
    }
    desc += " judge=" + (app->judge_ ? app->judge_->name() : std::string("none"));
    app->description_ = std::move(desc);
    return app;
}

std::string App::describe() const { return description_; }

std::vector<std::string> fixture_registry_problems(const std::vector<TaskFixture>& fixtures,
                                                   const std::vector<ToolSchema>& tools) {
    std::set<std::string> names;
    for (const auto& t : tools) names.insert(t.tool_name);
    std::vector<std::string> out;
    for (const auto& f : fixtures) {
        for (const auto& c : f.candidate_tools) {
            if (!names.count(c)) {
                out.push_back(f.task_id + " (unknown tool '" + c + "')");
                break;
            }
        }
    }
    return out;
}

}  // namespace agentkit
