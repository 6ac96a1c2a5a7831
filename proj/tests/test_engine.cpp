#include <gtest/gtest.h>

#include <atomic>

#include "support.hpp"

using namespace agentkit;
using namespace agentkit::testing;

namespace {

struct Rig {
    std::shared_ptr<ToolHost> host = host_from(load_registry(bundled("registry.jsonl")));
    InProcessTransport transport{*host};
    Environment env;

    explicit Rig(std::shared_ptr<const ModelProvider> model = std::make_shared<ScriptedModel>()) {
        env.model = std::move(model);
        env.index = std::make_shared<ToolIndex>(host->list_tools(), std::make_shared<HashingEmbedder>(1024));
        env.transport = &transport;
        env.summarizer = std::make_shared<ExtractiveSummarizer>();
    }
};

TaskFixture scripted(std::string id, std::string utterance, Json script, std::vector<std::string> candidates = {}) {
    TaskFixture f;
    f.task_id = std::move(id);
    f.turns = {std::move(utterance)};
    if (candidates.empty())
        for (const auto& e : load_registry(bundled("registry.jsonl"))) candidates.push_back(e.schema.tool_name);
    f.candidate_tools = std::move(candidates);
    f.reference_sequence = {f.candidate_tools.front()};
    f.metadata = Json{{"script", std::move(script)}};
    return f;
}

EngineConfig base_config() {
    EngineConfig cfg;
    cfg.ablation = kBase;
    return cfg;
}

// Counts calls and fails the first `fail_first` with the given class.
class CountingTransport final : public ToolTransport {
public:
    CountingTransport(ToolHost& h, ErrorClass c, std::size_t fail_first) : h_(h), c_(c), fail_(fail_first) {}
    std::vector<ToolSchema> list_tools() override { return h_.list_tools(); }
    ToolResult call(const ValidatedCall& v) override {
        ++calls;
        if (calls <= fail_) return ToolResult{v.request().call_id, c_, "injected", {}, 1};
        return h_.invoke(v);
    }
    std::size_t calls = 0;

private:
    ToolHost& h_;
    ErrorClass c_;
    std::size_t fail_;
};

ValidatedCall valid_search(const ToolHost& h) {
    auto v = h.validate(call_of("c1", "web_search", Json{{"query", "x"}}));
    return std::get<ValidatedCall>(v);
}

}  // namespace

TEST(Ablation, ParseAndLabels) {
    EXPECT_EQ(ablation_from_string("base"), kBase);
    EXPECT_EQ(ablation_from_string("bp"), kBaseP);
    EXPECT_EQ(ablation_from_string("B-PT"), kBasePT);
    EXPECT_EQ(ablation_from_string("full"), kJenius);
    EXPECT_EQ(ablation_from_string("jenius"), kJenius);
    EXPECT_THROW(ablation_from_string("everything"), ConfigError);
    EXPECT_EQ(kBase.label(), "Base");
    EXPECT_EQ(kBaseP.label(), "B-P");
    EXPECT_EQ(kBasePT.label(), "B-PT");
    EXPECT_EQ(kJenius.label(), "Jenius");
    EXPECT_EQ((AblationFlags{false, true, true}).label(), "custom(0,1,1)");
}

TEST(Reply, MustActOrConclude) {
    ModelReply neither;
    EXPECT_THROW(check_reply(neither), ProviderError);
    ModelReply both;
    both.final_answer = "x";
    both.tool_calls.push_back(call_of("a", "t"));
    EXPECT_THROW(check_reply(both), ProviderError);
    ModelReply ok;
    ok.final_answer = "";
    EXPECT_NO_THROW(check_reply(ok));
}

TEST(Retry, OnlyTransientClassesAreRetried) {
    const auto owned = host_from(load_registry(bundled("registry.jsonl")));
    ToolHost& h = *owned;
    EngineConfig cfg;
    struct Case {
        ErrorClass c;
        std::size_t fail_first;
        std::size_t want_attempts;
        bool want_ok;
    };
    const std::vector<Case> cases{
        {ErrorClass::transient_network, 2, 3, true}, {ErrorClass::transient_network, 3, 3, false},
        {ErrorClass::timeout, 1, 2, true},           {ErrorClass::timeout, 5, 3, false},
        {ErrorClass::tool_crash, 1, 1, false},       {ErrorClass::invalid_arguments, 1, 1, false},
        {ErrorClass::tool_not_found, 1, 1, false},
    };
    for (const auto& c : cases) {
        CountingTransport t(h, c.c, c.fail_first);
        const auto out = execute_with_retry(valid_search(h), cfg, t);
        EXPECT_EQ(out.attempts, c.want_attempts) << to_string(c.c);
        EXPECT_EQ(t.calls, c.want_attempts);
        EXPECT_EQ(out.result.ok(), c.want_ok) << to_string(c.c);
    }
    cfg.retry_limits[ErrorClass::timeout] = 0;
    CountingTransport t(h, ErrorClass::timeout, 1);
    EXPECT_EQ(execute_with_retry(valid_search(h), cfg, t).attempts, 1u);
}

TEST(Urls, ExtractedWithoutTrailingPunctuation) {
    EXPECT_EQ(extract_url("see https://example.org/a?b=1."), "https://example.org/a?b=1");
    EXPECT_EQ(extract_url("(http://x.org/y), ok"), "http://x.org/y");
    EXPECT_EQ(extract_url("no link here"), std::nullopt);
}

TEST(Engine, RunsScriptAndRecordsTrace) {
    Rig rig;
    const auto f = scripted("w", "Search the web for cheese",
                            Json::array({Json::array({Json{{"call", "web_search"}, {"args", {{"query", "cheese"}}}},
                                                      Json{{"answer", "done"}}})}));
    const auto r = run_task(f, base_config(), rig.env);
    ASSERT_EQ(r.trace.invoked.size(), 1u);
    EXPECT_EQ(r.trace.invoked[0].tool_name, "web_search");
    EXPECT_EQ(r.trace.invoked[0].outcome, Outcome::ok);
    EXPECT_EQ(r.trace.final_answer, "done");
    EXPECT_TRUE(r.trace.error_events.empty());
    EXPECT_TRUE(session_is_canonical(r.session));
    EXPECT_EQ(r.calls.size(), 2u);
    EXPECT_GT(r.trace.input_tokens, 0u);
    // Input counts exactly what each call saw.
    std::uint64_t in = 0;
    for (const auto& c : r.calls) in += c.system_tokens + c.history_tokens;
    EXPECT_EQ(in, r.trace.input_tokens);
    EXPECT_GE(r.calls[1].history_tokens, r.calls[0].history_tokens);
}

TEST(Engine, RecursionLimitCapsModelCalls) {
    Rig rig;
    auto cfg = base_config();
    cfg.max_iterations = 5;
    const auto f = scripted("loop", "Search the web forever",
                            Json::array({Json::array({Json{{"call", "web_search"}, {"args", {{"query", "x"}}}, {"repeat", true}}})}));
    const auto r = run_task(f, cfg, rig.env);
    EXPECT_EQ(r.calls.size(), 5u);
    EXPECT_LE(r.trace.invoked.size(), 5u);
    ASSERT_FALSE(r.trace.error_events.empty());
    EXPECT_EQ(r.trace.error_events.back().error_class, ErrorClass::recursion_limit);
    EXPECT_FALSE(r.trace.final_answer.has_value());
    EXPECT_EQ(r.session.messages.back().content, "[halted] recursion limit reached");
    EXPECT_TRUE(session_is_canonical(r.session));
}

TEST(Engine, UnofferedAndInvalidCallsAreClassified) {
    Rig rig;
    const auto f = scripted(
        "bad", "Search the web",
        Json::array({Json::array({Json{{"call", "get_weather"}, {"args", {{"city", "Oslo"}}}},
                                  Json{{"call", "web_search"}, {"args", {{"q", "x"}}}},
                                  Json{{"answer", "gave up"}}})}),
        {"web_search"});
    const auto r = run_task(f, base_config(), rig.env);
    ASSERT_EQ(r.trace.error_events.size(), 2u);
    EXPECT_EQ(r.trace.error_events[0].error_class, ErrorClass::tool_not_found);
    EXPECT_EQ(r.trace.error_events[1].error_class, ErrorClass::invalid_arguments);
    EXPECT_EQ(r.trace.invoked[1].outcome, Outcome::error);
    EXPECT_EQ(r.session.messages[4].content.rfind("error[invalid_arguments]: ", 0), 0u);
}

TEST(Engine, NormalizesUrlArguments) {
    Rig rig;
    const auto f = scripted("u", "Read https://example.org/p",
                            Json::array({Json::array({Json{{"call", "url_reader"}, {"args", {{"url", "at https://example.org/p!"}}}},
                                                      Json{{"answer", "ok"}}})}));
    const auto r = run_task(f, base_config(), rig.env);
    ASSERT_EQ(r.trace.invoked.size(), 1u);
    EXPECT_EQ(r.trace.invoked[0].arguments["url"], "https://example.org/p");
    EXPECT_EQ(r.trace.invoked[0].outcome, Outcome::ok);
}

TEST(Engine, ExpensiveToolsNeedKeywordOrConfirmation) {
    Rig rig;
    auto script = Json::array({Json::array({Json{{"call", "generate_ppt"}, {"args", {{"topic", "owls"}}}},
                                            Json{{"answer", "ok"}}})});
    const auto named = run_task(scripted("d1", "Make a slide deck about owls", script), base_config(), rig.env);
    EXPECT_EQ(named.trace.invoked.at(0).outcome, Outcome::ok);
    const auto unnamed = run_task(scripted("d2", "Tell me about owls", script), base_config(), rig.env);
    EXPECT_EQ(unnamed.trace.invoked.at(0).outcome, Outcome::error);
    auto cfg = base_config();
    cfg.auto_confirm = false;
    const auto off = run_task(scripted("d3", "Make a slide deck about owls", script), cfg, rig.env);
    EXPECT_EQ(off.trace.invoked.at(0).outcome, Outcome::error);
}

TEST(Engine, MultiCallStepsBecomeSeparateMessages) {
    Rig rig;
    const auto f = scripted(
        "m", "Search twice",
        Json::array({Json::array({Json{{"calls", Json::array({Json{{"call", "web_search"}, {"args", {{"query", "a"}}}},
                                                               Json{{"call", "web_search"}, {"args", {{"query", "b"}}}}})}},
                                  Json{{"answer", "both"}}})}));
    const auto r = run_task(f, base_config(), rig.env);
    EXPECT_EQ(r.trace.invoked.size(), 2u);
    EXPECT_EQ(r.calls.size(), 2u);
    EXPECT_EQ(r.session.messages.size(), 6u);  // H, AI, T, AI, T, AI
    EXPECT_TRUE(session_is_canonical(r.session));
    for (const auto& m : r.session.messages)
        if (!m.tool_calls.empty()) EXPECT_GT(m.token_count, 0u);
}

TEST(Engine, ProviderErrorHaltsTask) {
    Rig rig;
    const auto f = scripted("p", "Search", Json::array({Json::array({Json{{"fail", "upstream 500"}}})}));
    const auto r = run_task(f, base_config(), rig.env);
    ASSERT_EQ(r.trace.error_events.size(), 1u);
    EXPECT_EQ(r.trace.error_events[0].error_class, ErrorClass::provider_error);
    EXPECT_NE(r.trace.error_events[0].detail.find("upstream 500"), std::string::npos);
    EXPECT_EQ(r.session.messages.back().content, "[halted] model provider error");
    EXPECT_TRUE(r.session.messages.back().synthetic);

    Rig throwing(std::make_shared<CallbackModel>([](const ModelRequest&) -> ModelReply { throw std::runtime_error("boom"); }));
    EXPECT_EQ(run_task(f, base_config(), throwing.env).trace.error_events.at(0).error_class, ErrorClass::provider_error);
}

TEST(Engine, FaultsMetadataIsReplayed) {
    Rig rig;
    auto f = scripted("f", "Search the web for owls",
                      Json::array({Json::array({Json{{"call", "web_search"}, {"args", {{"query", "owls"}}}},
                                                Json{{"answer", "ok"}}})}));
    f.metadata["faults"] = Json{{"web_search", {"timeout", "ok"}}};
    const auto recovered = run_task(f, base_config(), rig.env);
    EXPECT_EQ(recovered.trace.invoked.at(0).outcome, Outcome::ok);
    EXPECT_TRUE(recovered.trace.error_events.empty());
    f.metadata["faults"] = Json{{"web_search", {"tool_crash"}}};
    const auto crashed = run_task(f, base_config(), rig.env);
    EXPECT_EQ(crashed.trace.error_events.at(0).error_class, ErrorClass::tool_crash);
}

TEST(Engine, SummarizerFailureIsAWarning) {
    class Broken final : public Summarizer {
    public:
        std::string summarize(std::span<const Message>, const std::optional<std::string>&, std::size_t) const override {
            throw ProviderError("no summaries today");
        }
        std::string name() const override { return "broken"; }
    };
    Rig rig;
    rig.env.summarizer = std::make_shared<Broken>();
    auto cfg = EngineConfig{};
    cfg.memory.summarize_threshold = 4;
    TaskFixture f;
    f.task_id = "long";
    Json script = Json::array();
    for (int t = 0; t < 4; ++t) {
        f.turns.push_back("Search the web for topic " + std::to_string(t));
        script.push_back(Json::array({Json{{"call", "web_search"}, {"args", {{"query", "t"}}}}, Json{{"answer", "ok"}}}));
    }
    for (const auto& e : load_registry(bundled("registry.jsonl"))) f.candidate_tools.push_back(e.schema.tool_name);
    f.reference_sequence = {"web_search"};
    f.metadata = Json{{"script", script}};
    const auto r = run_task(f, cfg, rig.env);
    EXPECT_FALSE(r.warnings.empty());
    EXPECT_EQ(r.summarizations, 0u);
    EXPECT_TRUE(r.trace.error_events.empty());
    EXPECT_EQ(r.trace.final_answer, "ok");

    Rig good;
    const auto ok = run_task(f, cfg, good.env);
    EXPECT_GT(ok.summarizations, 0u);
    EXPECT_TRUE(ok.warnings.empty());
}

TEST(Engine, RetrievalNarrowsOfferedTools) {
    std::atomic<std::size_t> offered{0};
    Rig rig(std::make_shared<CallbackModel>([&](const ModelRequest& r) {
        offered = r.tools.size();
        ModelReply m;
        m.final_answer = "fine";
        return m;
    }));
    auto f = scripted("r", "What is the weather in Oslo tomorrow?", Json::array());
    run_task(f, base_config(), rig.env);
    EXPECT_EQ(offered.load(), rig.host->size());
    auto cfg = EngineConfig{};
    cfg.ablation = kBasePT;
    const auto r = run_task(f, cfg, rig.env);
    EXPECT_LT(offered.load(), rig.host->size());
    EXPECT_GE(offered.load(), 10u);
    EXPECT_EQ(r.calls.at(0).intent.empty(), false);
}

TEST(Engine, SetupProblemsThrow) {
    Rig rig;
    auto f = scripted("s", "x", Json::array(), {"no_such_tool"});
    f.reference_sequence.clear();
    EXPECT_THROW(run_task(f, base_config(), rig.env), FixtureError);
    Environment empty;
    EXPECT_THROW(run_task(scripted("s", "x", Json::array()), base_config(), empty), ProviderUnavailable);
    auto cfg = base_config();
    cfg.max_iterations = 0;
    EXPECT_THROW(run_task(scripted("s", "x", Json::array()), cfg, rig.env), ConfigError);
}
