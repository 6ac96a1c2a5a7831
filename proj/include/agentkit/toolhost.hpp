#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "agentkit/error_class.hpp"
#include "agentkit/errors.hpp"
#include "agentkit/tokenizer.hpp"
#include "agentkit/trace_model.hpp"

namespace agentkit {

enum class ToolCategory { file_management, information_retrieval, image_generation, data_analysis, other };
enum class CostClass { cheap, expensive };
enum class ParamType { string, integer, number, boolean, url, date, object, array };

std::string_view to_string(ToolCategory c) noexcept;
std::optional<ToolCategory> tool_category_from_string(std::string_view s) noexcept;
std::string_view to_string(ParamType t) noexcept;
std::optional<ParamType> param_type_from_string(std::string_view s) noexcept;

// Constraint text is a ';'-separated list of clauses:
//   nonempty | min=<n> | max=<n> | max_length=<n> | one_of=a|b|c | pattern=<regex>
// `pattern=` must be the last clause; it consumes the rest of the text.
struct ParameterSpec {
    std::string name;
    ParamType type = ParamType::string;
    bool required = true;
    std::string constraint;

    friend bool operator==(const ParameterSpec&, const ParameterSpec&) = default;
};

struct ToolSchema {
    std::string tool_name;
    ToolCategory category = ToolCategory::other;
    std::string description;
    std::string enriched_description;  // operator-edited repackaging of `description`
    std::vector<ParameterSpec> parameters;
    std::string output_description;
    CostClass cost_class = CostClass::cheap;
    std::string preconditions;
    std::string confirmation_prompt;           // required for expensive tools
    std::vector<std::string> intent_keywords;  // disambiguation words for expensive tools

    friend bool operator==(const ToolSchema&, const ToolSchema&) = default;

    // Required parameters first, each group in declaration order.
    std::vector<ParameterSpec> canonical_parameters() const;
    const ParameterSpec* find_parameter(std::string_view name) const;
};

// Throws InvalidSchema.
void check_schema(const ToolSchema& schema);

// Text the tool index embeds: name, enriched description, category label.
std::string embedding_text(const ToolSchema& schema);

Json to_json(const ToolSchema& schema);
ToolSchema schema_from_json(const Json& j);

// --- Validation ----------------------------------------------------------

struct ValidationResult {
    bool ok = true;
    std::string reason;  // "missing: q", "unknown: zz", "invalid: n (...)"

    static ValidationResult accept() { return {}; }
    static ValidationResult reject(std::string why) { return {false, std::move(why)}; }
};

ValidationResult validate_arguments(const ToolSchema& schema, const Arguments& arguments);

class ToolHost;

// Proof that a call passed validation. Only validate_call can make one, and
// every dispatch path takes one, so nothing runs unvalidated.
class ValidatedCall {
public:
    const ToolCallRequest& request() const noexcept { return request_; }
    bool confirmed() const noexcept { return confirmed_; }
    // Grants the confirmation an expensive tool needs.
    ValidatedCall with_confirmation() const {
        ValidatedCall c = *this;
        c.confirmed_ = true;
        return c;
    }

private:
    friend std::variant<ValidatedCall, ValidationResult> validate_call(const ToolSchema&, const ToolCallRequest&);
    explicit ValidatedCall(ToolCallRequest r) : request_(std::move(r)) {}
    ToolCallRequest request_;
    bool confirmed_ = false;
};

// ValidationResult alternative is always a rejection.
std::variant<ValidatedCall, ValidationResult> validate_call(const ToolSchema& schema, const ToolCallRequest& call);

// --- Execution -----------------------------------------------------------

struct ToolResult {
    std::string call_id;
    std::optional<ErrorClass> error;  // nullopt = ok
    std::string content;              // result text, or the error message
    std::chrono::microseconds duration{0};
    std::size_t content_tokens = 0;

    bool ok() const noexcept { return !error.has_value(); }
};

// Raised by executors and transports to report a classified failure. Any other
// exception escaping an executor is classified as tool_crash.
class ToolFailure : public Error {
public:
    ToolFailure(ErrorClass c, const std::string& what) : Error(what), class_(c) {}
    ErrorClass error_class() const noexcept { return class_; }

private:
    ErrorClass class_;
};

class ToolExecutor {
public:
    virtual ~ToolExecutor() = default;
    virtual std::string execute(const Arguments& arguments) = 0;
    // Executors that return false are serialized by the host.
    virtual bool concurrency_safe() const { return true; }
};

// Canned-response executor: replaces {{param}} in the template with the argument
// value (strings verbatim, other JSON values in compact form).
class TemplateExecutor final : public ToolExecutor {
public:
    explicit TemplateExecutor(std::string response_template) : template_(std::move(response_template)) {}
    std::string execute(const Arguments& arguments) override;

private:
    std::string template_;
};

class ToolHost {
public:
    explicit ToolHost(std::shared_ptr<const Tokenizer> tokenizer = std::make_shared<DefaultTokenizer>());

    ToolHost(const ToolHost&) = delete;
    ToolHost& operator=(const ToolHost&) = delete;

    // Throws DuplicateName or InvalidSchema and leaves the registry unchanged.
    void register_tool(ToolSchema schema, std::shared_ptr<ToolExecutor> executor);

    std::size_t size() const noexcept { return entries_.size(); }
    const ToolSchema* find(std::string_view name) const;
    std::vector<ToolSchema> list_tools() const;  // registration order

    // Unknown tool -> tool_not_found rejection with reason "unknown tool: <name>".
    std::variant<ValidatedCall, ValidationResult> validate(const ToolCallRequest& call) const;

    // Executes in process. Never throws; failures come back classified.
    ToolResult invoke(const ValidatedCall& call) const;

    // Calls slower than this are reported as timeouts. Zero disables the check.
    void set_timeout(std::chrono::milliseconds t) noexcept { timeout_ = t; }
    const Tokenizer& tokenizer() const noexcept { return *tokenizer_; }

private:
    struct Entry {
        ToolSchema schema;
        std::shared_ptr<ToolExecutor> executor;
        std::unique_ptr<std::mutex> serial;  // set for non-concurrency-safe executors
    };
    std::vector<Entry> entries_;
    std::map<std::string, std::size_t, std::less<>> by_name_;
    std::shared_ptr<const Tokenizer> tokenizer_;
    std::chrono::milliseconds timeout_{0};
};

// Uniform access to a tool host, in process or across the wire.
class ToolTransport {
public:
    virtual ~ToolTransport() = default;
    // Throws ToolFailure(transient_network) when the transport is unreachable.
    virtual std::vector<ToolSchema> list_tools() = 0;
    // Never throws; failures come back classified.
    virtual ToolResult call(const ValidatedCall& call) = 0;
};

class InProcessTransport final : public ToolTransport {
public:
    explicit InProcessTransport(const ToolHost& host) : host_(host) {}
    std::vector<ToolSchema> list_tools() override { return host_.list_tools(); }
    ToolResult call(const ValidatedCall& call) override { return host_.invoke(call); }

private:
    const ToolHost& host_;
};

// Replays a scripted sequence of outcomes per tool before delegating. Each
// entry is an ErrorClass name or "ok"; once a tool's script is exhausted calls
// pass through. Script: {"tool_name": ["timeout", "ok", ...], ...}.
class FaultInjectingTransport final : public ToolTransport {
public:
    FaultInjectingTransport(ToolTransport& inner, const Json& script);
    std::vector<ToolSchema> list_tools() override { return inner_.list_tools(); }
    ToolResult call(const ValidatedCall& call) override;

private:
    ToolTransport& inner_;
    std::mutex mu_;
    std::map<std::string, std::vector<std::optional<ErrorClass>>> script_;
    std::map<std::string, std::size_t> cursor_;
};

// --- Registry file -------------------------------------------------------

// One JSON record per line: a ToolSchema plus an optional "mock" object
// {"response": "<template>"} used to build an in-process executor.
struct RegistryEntry {
    ToolSchema schema;
    std::optional<std::string> mock_response;
};

std::vector<RegistryEntry> parse_registry(std::string_view bytes);
std::vector<RegistryEntry> load_registry(const std::filesystem::path& path);

// Registers every entry with a TemplateExecutor (default template when none given).
void populate_mock_host(ToolHost& host, const std::vector<RegistryEntry>& entries);

}  // namespace agentkit
