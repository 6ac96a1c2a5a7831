#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "agentkit/memory_manager.hpp"
#include "agentkit/prompt_composer.hpp"
#include "agentkit/tool_index.hpp"
#include "agentkit/toolhost.hpp"

// The observe-think-act loop: prompt, model call, validated tool execution
// with per-class retry, and token accounting.
namespace agentkit {

struct AblationFlags {
    bool adaptive_prompt = false;
    bool tool_retrieval = false;
    bool memory_management = false;

    friend bool operator==(const AblationFlags&, const AblationFlags&) = default;
    // "Base", "B-P", "B-PT", "Jenius", or "custom(P,T,M)" with 0/1 digits.
    std::string label() const;
};

inline constexpr AblationFlags kBase{false, false, false};
inline constexpr AblationFlags kBaseP{true, false, false};
inline constexpr AblationFlags kBasePT{true, true, false};
inline constexpr AblationFlags kJenius{true, true, true};

// "base", "bp", "bpt", "full" (also the labels, case-insensitive). Throws ConfigError.
AblationFlags ablation_from_string(std::string_view s);

struct ModelRequest {
    std::string task_id;
    std::size_t turn_index = 0;  // which user turn
    std::size_t step_index = 0;  // model call within the turn
    std::string system_prompt;
    std::vector<Message> messages;
    std::vector<ToolSchema> tools;  // offered this step
    Json metadata = Json::object(); // fixture metadata, read by scripted doubles
};

struct ModelReply {
    std::string reasoning;
    std::vector<ToolCallRequest> tool_calls;
    std::optional<std::string> final_answer;
    std::size_t output_tokens = 0;
};

// A reply either acts or concludes. Throws ProviderError otherwise.
void check_reply(const ModelReply& r);

class ModelProvider {
public:
    virtual ~ModelProvider() = default;
    // Must tolerate concurrent calls. Throws ProviderError / ProviderUnavailable.
    virtual ModelReply complete(const ModelRequest& request) const = 0;
    virtual std::string name() const = 0;
};

// Replays metadata["script"]: one array of steps per turn. A step is
//   {"call": name, "args": {...}, "reasoning": "..."}
//   {"calls": [{"call": name, "args": {...}}, ...]}
//   {"answer": "..."}
//   {"fail": "message"}                (provider error)
// and may carry "repeat": true to replay it for every later step of the turn.
// Missing turns or steps past the end conclude with a fixed answer.
class ScriptedModel final : public ModelProvider {
public:
    explicit ScriptedModel(std::shared_ptr<const Tokenizer> tokenizer = std::make_shared<DefaultTokenizer>())
        : tokenizer_(std::move(tokenizer)) {}
    ModelReply complete(const ModelRequest& request) const override;
    std::string name() const override { return "scripted"; }

private:
    std::shared_ptr<const Tokenizer> tokenizer_;
};

// Script-free double for ad hoc queries: calls the first offered tool whose
// name words match the utterance, filling arguments from it, then reports the
// tool output.
class HeuristicModel final : public ModelProvider {
public:
    explicit HeuristicModel(std::shared_ptr<const Tokenizer> tokenizer = std::make_shared<DefaultTokenizer>())
        : tokenizer_(std::move(tokenizer)) {}
    ModelReply complete(const ModelRequest& request) const override;
    std::string name() const override { return "heuristic"; }

private:
    std::shared_ptr<const Tokenizer> tokenizer_;
};

// Scripts when the request carries one, heuristics otherwise.
class DoubleModel final : public ModelProvider {
public:
    explicit DoubleModel(std::shared_ptr<const Tokenizer> tokenizer = std::make_shared<DefaultTokenizer>())
        : scripted_(tokenizer), heuristic_(tokenizer) {}
    ModelReply complete(const ModelRequest& request) const override;
    std::string name() const override { return "double"; }

private:
    ScriptedModel scripted_;
    HeuristicModel heuristic_;
};

class CallbackModel final : public ModelProvider {
public:
    using Fn = std::function<ModelReply(const ModelRequest&)>;
    explicit CallbackModel(Fn fn, std::string name = "callback") : fn_(std::move(fn)), name_(std::move(name)) {}
    ModelReply complete(const ModelRequest& request) const override { return fn_(request); }
    std::string name() const override { return name_; }

private:
    Fn fn_;
    std::string name_;
};

// Summaries produced by a model provider, cut to the token budget.
class ModelSummarizer final : public Summarizer {
public:
    ModelSummarizer(std::shared_ptr<const ModelProvider> model, std::shared_ptr<const Tokenizer> tokenizer)
        : model_(std::move(model)), tokenizer_(std::move(tokenizer)) {}
    std::string summarize(std::span<const Message> segment, const std::optional<std::string>& previous_summary,
                          std::size_t token_budget) const override;
    std::string name() const override { return "model:" + model_->name(); }

private:
    std::shared_ptr<const ModelProvider> model_;
    std::shared_ptr<const Tokenizer> tokenizer_;
};

struct EngineConfig {
    std::size_t max_iterations = 12;  // model calls per task
    std::map<ErrorClass, std::size_t> retry_limits{{ErrorClass::transient_network, 2}, {ErrorClass::timeout, 2}};
    AblationFlags ablation = kJenius;
    std::shared_ptr<const Tokenizer> tokenizer = std::make_shared<DefaultTokenizer>();
    RetrievalConfig retrieval;
    MemoryConfig memory;
    // Batch runs confirm expensive tools when the utterance names one of their intent keywords.
    bool auto_confirm = true;
};

// Throws ConfigError.
void check_engine_config(const EngineConfig& cfg);

// Everything a run needs besides the fixture. The index holds the registry
// schemas and their embeddings; tool calls go through the transport.
struct Environment {
    std::shared_ptr<const ModelProvider> model;
    std::shared_ptr<const ToolIndex> index;
    ToolTransport* transport = nullptr;
    std::shared_ptr<const Summarizer> summarizer;
    AgentProfile profile = AgentProfile::defaults();
    PromptTemplates templates = PromptTemplates::builtin();
};

struct RetryOutcome {
    ToolResult result;
    std::size_t attempts = 0;
};

// Retries transient_network and timeout failures up to retry_limits[class]
// times each; every other class is attempted once.
RetryOutcome execute_with_retry(const ValidatedCall& call, const EngineConfig& cfg, ToolTransport& transport);

// First http(s) URL in the text with trailing punctuation stripped.
std::optional<std::string> extract_url(std::string_view text);

struct ModelCallRecord {
    std::size_t turn_index = 0;
    std::size_t step_index = 0;
    std::string intent;             // empty without adaptive prompts
    std::size_t tools_offered = 0;
    std::size_t system_tokens = 0;  // prompt text
    std::size_t history_tokens = 0; // stored token counts of the messages sent
    std::size_t output_tokens = 0;
};

struct RunResult {
    ExecutionTrace trace;
    Session session;
    std::vector<ModelCallRecord> calls;
    std::size_t summarizations = 0;
    std::vector<std::string> warnings;  // e.g. summarizer failures, which do not fail the task
};

// Runs every turn of the fixture. Failures land in the trace; only setup
// problems (missing providers, unknown candidate tools) throw.
RunResult run_task(const TaskFixture& fixture, const EngineConfig& cfg, const Environment& env);

}  // namespace agentkit
