#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "agentkit/toolhost.hpp"

// Per-turn system prompt assembly: fixed behavioral constraints, intent- and
// tool-dependent guidance, and the injected conversation summary.
namespace agentkit {

enum class Intent { social_interaction, creative_generation, factual_recall, tool_augmented };
enum class ToolMode { single_tool, multi_tool };

std::string_view to_string(Intent i) noexcept;
std::string_view to_string(ToolMode m) noexcept;

struct IntentCategory {
    Intent category = Intent::social_interaction;
    std::optional<ToolMode> tool_mode;  // present iff category == tool_augmented

    friend bool operator==(const IntentCategory&, const IntentCategory&) = default;
    std::string label() const;  // "tool_augmented/multi_tool", "factual_recall", ...
};

class IntentClassifier {
public:
    virtual ~IntentClassifier() = default;
    virtual IntentCategory classify(std::string_view utterance, std::span<const ToolSchema> tools) const = 0;
};

// Keyword rules. A tool applies when one of its distinctive name words (or one
// of its intent keywords) occurs in the utterance; two or more applicable tools,
// or one plus a sequencing word ("then", "after that", ...), means multi_tool.
// Precedence: tool_augmented > creative_generation > factual_recall > social_interaction.
class RuleBasedIntentClassifier final : public IntentClassifier {
public:
    IntentCategory classify(std::string_view utterance, std::span<const ToolSchema> tools) const override;
};

IntentCategory classify_intent(std::string_view utterance, std::span<const ToolSchema> tools);

// Tools whose name words or intent keywords occur in the utterance, in input order.
std::vector<std::string> matching_tools(std::string_view utterance, std::span<const ToolSchema> tools);

enum class FormattingPolicy { structured, free_text, automatic };

struct LanguagePolicy {
    bool mirror_user = true;
    std::string fixed_tag;  // used when mirror_user is false
};

struct SafetyRule {
    std::string id;
    std::string pattern;  // ECMAScript regex, matched case-insensitively
    std::regex compiled;
};

struct AgentProfile {
    std::string role_text;
    LanguagePolicy language;
    FormattingPolicy formatting = FormattingPolicy::automatic;
    std::vector<SafetyRule> safety_rules;
    std::string tool_policy_text;
    std::string default_language = "en";
    std::filesystem::path template_dir;  // empty: built-in templates

    // Throws ConfigError when a rule pattern does not compile or a key is bad.
    static AgentProfile from_json(const Json& j, const std::filesystem::path& base_dir = {});
    static AgentProfile load(const std::filesystem::path& path);
    static AgentProfile defaults();
};

// Section templates keyed by section id, with optional variants looked up as
// "<id>.<variant>" before falling back to "<id>". Files in a template directory
// are named "<key>.txt" and override the built-in text.
class PromptTemplates {
public:
    static PromptTemplates builtin();
    static PromptTemplates load(const std::filesystem::path& dir);

    std::string get(std::string_view id, std::string_view variant = {}) const;
    void set(std::string key, std::string text) { templates_[std::move(key)] = std::move(text); }

private:
    std::map<std::string, std::string, std::less<>> templates_;
};

// Replaces {{name}} placeholders; unknown names are left verbatim.
std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& vars);

struct PromptSection {
    std::string id;
    std::string text;
    friend bool operator==(const PromptSection&, const PromptSection&) = default;
};

struct PromptBundle {
    std::string system_prompt;  // concatenation of sections
    std::vector<PromptSection> sections;
    std::optional<std::string> injected_summary;

    const PromptSection* section(std::string_view id) const;
    friend bool operator==(const PromptBundle&, const PromptBundle&) = default;
};

// Fixed section order.
inline constexpr std::array<std::string_view, 7> kSectionOrder{"role",   "intent", "tool_policy", "tools",
                                                               "format", "safety", "summary"};

std::string render_tool_list(std::span<const ToolSchema> tools);

// Pure: identical inputs give identical bundles. "tools" is present iff the
// intent is tool_augmented; "summary" iff a summary is given.
PromptBundle compose_prompt(const AgentProfile& profile, const PromptTemplates& templates, const IntentCategory& intent,
                            std::span<const ToolSchema> tools, const std::optional<std::string>& summary,
                            std::string_view user_language);

// The non-adaptive prompt of the baseline agent: one fixed template listing every tool.
std::string compose_static_prompt(const PromptTemplates& templates, std::span<const ToolSchema> tools);

struct SafetyVerdict {
    bool blocked = false;
    std::string rule_id;
    friend bool operator==(const SafetyVerdict&, const SafetyVerdict&) = default;
};

SafetyVerdict apply_safety_filter(std::string_view candidate_output, const AgentProfile& profile);

// Majority writing system of the letters in the text. Falls back to
// `default_tag` when the text has no letters.
std::string detect_user_language(std::string_view utterance, std::string_view default_tag = "en");

}  // namespace agentkit
