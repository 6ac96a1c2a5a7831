#include "agentkit/prompt_composer.hpp"

#include <algorithm>
#include <array>
#include <set>

#include "agentkit/text.hpp"

namespace agentkit {

std::string_view to_string(Intent i) noexcept {
    switch (i) {
        case Intent::social_interaction: return "social_interaction";
        case Intent::creative_generation: return "creative_generation";
        case Intent::factual_recall: return "factual_recall";
        case Intent::tool_augmented: return "tool_augmented";
    }
    return "?";
}

std::string_view to_string(ToolMode m) noexcept { return m == ToolMode::single_tool ? "single_tool" : "multi_tool"; }

std::string IntentCategory::label() const {
    std::string out(to_string(category));
    if (tool_mode) out += "/" + std::string(to_string(*tool_mode));
    return out;
}

// --- Intent rules --------------------------------------------------------

namespace {

// Name words too generic to tie an utterance to a particular tool.
constexpr std::array<std::string_view, 22> kGenericNameWords{
    "get", "set", "list", "run", "make", "do", "tool", "api", "create", "update", "delete",
    "query", "fetch", "info", "data", "new", "write", "generate", "add", "check", "find", "use"};

constexpr std::array<std::string_view, 17> kCreativeWords{
    "write", "story", "stories", "poem", "poetry", "compose", "draft", "essay", "imagine",
    "lyrics", "song", "joke", "novel", "fiction", "tale", "haiku", "slogan"};

constexpr std::array<std::string_view, 12> kFactualWords{"what", "who", "when", "where", "which", "why",
                                                         "how", "define", "definition", "explain", "meaning",
                                                         "whats"};

constexpr std::array<std::string_view, 10> kGreetingWords{"hi",     "hello",   "hey",  "thanks", "thank",
                                                           "bye",    "goodbye", "morning", "evening", "cheers"};
constexpr std::size_t kMaxGreetingWords = 6;

constexpr std::array<std::string_view, 6> kSequenceWords{"then", "afterwards", "after", "next", "followed", "also"};

constexpr std::array<std::string_view, 5> kCjkCreative{"写", "故事", "诗", "创作", "作文"};
constexpr std::array<std::string_view, 7> kCjkFactual{"什么", "谁", "为什么", "怎么", "哪", "吗", "？"};
constexpr std::array<std::string_view, 5> kCjkGreeting{"你好", "谢谢", "こんにちは", "ありがとう", "안녕"};
constexpr std::array<std::string_view, 4> kCjkSequence{"然后", "之后", "接着", "再"};

template <std::size_t N>
bool contains_any_word(const std::set<std::string>& words, const std::array<std::string_view, N>& list) {
    return std::any_of(list.begin(), list.end(), [&](std::string_view w) { return words.count(std::string(w)) > 0; });
}

template <std::size_t N>
bool contains_any_substring(std::string_view s, const std::array<std::string_view, N>& list) {
    return std::any_of(list.begin(), list.end(), [&](std::string_view w) { return s.find(w) != std::string_view::npos; });
}

bool word_present(const std::set<std::string>& words, const std::string& w) {
    if (words.count(w)) return true;
    if (words.count(w + "s")) return true;
    if (w.size() > 3 && w.back() == 's' && words.count(w.substr(0, w.size() - 1))) return true;
    return false;
}

bool tool_applies(const ToolSchema& tool, const std::set<std::string>& words, std::string_view lowered) {
    for (const auto& kw : tool.intent_keywords) {
        const auto k = text::to_lower_ascii(kw);
        const auto kw_words = text::words(k);
        if (kw_words.size() == 1 ? word_present(words, kw_words.front()) : lowered.find(k) != std::string_view::npos)
            return true;
    }
    // Expensive tools with disambiguation keywords match only through them.
    if (tool.cost_class == CostClass::expensive && !tool.intent_keywords.empty()) return false;
    for (const auto& w : text::words(tool.tool_name)) {
        if (w.size() < 3 || text::is_stopword(w)) continue;
        if (std::find(kGenericNameWords.begin(), kGenericNameWords.end(), w) != kGenericNameWords.end()) continue;
        if (word_present(words, w)) return true;
    }
    return false;
}

}  // namespace

std::vector<std::string> matching_tools(std::string_view utterance, std::span<const ToolSchema> tools) {
    const auto ws = text::words(utterance);
    const std::set<std::string> words(ws.begin(), ws.end());
    const auto lowered = text::to_lower_ascii(utterance);
    std::vector<std::string> out;
    for (const auto& t : tools) {
        if (tool_applies(t, words, lowered)) out.push_back(t.tool_name);
    }
    return out;
}

IntentCategory RuleBasedIntentClassifier::classify(std::string_view utterance, std::span<const ToolSchema> tools) const {
    const auto ws = text::words(utterance);
    const std::set<std::string> words(ws.begin(), ws.end());
    const auto matched = matching_tools(utterance, tools);
    if (!matched.empty()) {
        const bool sequenced = contains_any_word(words, kSequenceWords) || contains_any_substring(utterance, kCjkSequence);
        const bool multi = matched.size() >= 2 || sequenced;
        return {Intent::tool_augmented, multi ? ToolMode::multi_tool : ToolMode::single_tool};
    }
    // Short pleasantries like "hello, how are you?" are chat even though they ask something.
    if (ws.size() <= kMaxGreetingWords &&
        (contains_any_word(words, kGreetingWords) || contains_any_substring(utterance, kCjkGreeting)))
        return {Intent::social_interaction, std::nullopt};
    if (contains_any_word(words, kCreativeWords) || contains_any_substring(utterance, kCjkCreative))
        return {Intent::creative_generation, std::nullopt};
    if (contains_any_word(words, kFactualWords) || utterance.find('?') != std::string_view::npos ||
        contains_any_substring(utterance, kCjkFactual))
        return {Intent::factual_recall, std::nullopt};
    return {Intent::social_interaction, std::nullopt};
}

IntentCategory classify_intent(std::string_view utterance, std::span<const ToolSchema> tools) {
    return RuleBasedIntentClassifier{}.classify(utterance, tools);
}

// --- Profile -------------------------------------------------------------

AgentProfile AgentProfile::defaults() {
    AgentProfile p;
    p.role_text = "You are a reliable task assistant that plans carefully and uses tools only when they are needed.";
    p.tool_policy_text = "Use only the tools listed below.";
    return p;
}

AgentProfile AgentProfile::from_json(const Json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw ConfigError("profile must be an object");
    AgentProfile p = defaults();
    try {
        p.role_text = j.value("role_text", p.role_text);
        p.tool_policy_text = j.value("tool_policy_text", p.tool_policy_text);
        p.default_language = j.value("default_language", p.default_language);
        if (auto it = j.find("response_language_policy"); it != j.end()) {
            if (it->is_string() && it->get<std::string>() == "mirror_user") {
                p.language = {true, {}};
            } else if (it->is_object() && it->contains("fixed")) {
                p.language = {false, (*it)["fixed"].get<std::string>()};
            } else {
                throw ConfigError("response_language_policy must be \"mirror_user\" or {\"fixed\": tag}");
            }
        }
        if (auto it = j.find("formatting_policy"); it != j.end()) {
            const auto f = it->get<std::string>();
            if (f == "structured") {
                p.formatting = FormattingPolicy::structured;
            } else if (f == "free_text") {
                p.formatting = FormattingPolicy::free_text;
            } else if (f == "auto") {
                p.formatting = FormattingPolicy::automatic;
            } else {
                throw ConfigError("unknown formatting_policy '" + f + "'");
            }
        }
        if (auto it = j.find("safety_rules"); it != j.end()) {
            std::set<std::string> ids;
            for (const auto& r : *it) {
                SafetyRule rule;
                rule.id = r.at("id").get<std::string>();
                rule.pattern = r.at("pattern").get<std::string>();
                if (!ids.insert(rule.id).second) throw ConfigError("duplicate safety rule id '" + rule.id + "'");
                try {
                    rule.compiled = std::regex(rule.pattern, std::regex::ECMAScript | std::regex::icase);
                } catch (const std::regex_error& e) {
                    throw ConfigError("safety rule " + rule.id + " does not compile: " + e.what());
                }
                p.safety_rules.push_back(std::move(rule));
            }
        }
        if (auto it = j.find("template_dir"); it != j.end() && !it->get<std::string>().empty()) {
            std::filesystem::path dir = it->get<std::string>();
            p.template_dir = dir.is_relative() && !base_dir.empty() ? base_dir / dir : dir;
        }
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("bad profile: ") + e.what());
    }
    return p;
}

AgentProfile AgentProfile::load(const std::filesystem::path& path) {
    Json j;
    try {
        j = Json::parse(read_file(path));
    } catch (const Json::parse_error& e) {
        throw ConfigError("profile " + path.string() + ": " + e.what());
    }
    return from_json(j, path.parent_path());
}

// --- Templates -----------------------------------------------------------

PromptTemplates PromptTemplates::builtin() {
    PromptTemplates t;
    t.set("role", "{{role}}\nAlways respond in the user's language ({{language}}); do not mix languages.\n\n");
    t.set("intent.social_interaction",
          "The user is making small talk. Reply briefly and warmly. Do not call tools.\n\n");
    t.set("intent.creative_generation",
          "The user wants original content. Focus on quality writing that follows the requested form and tone.\n\n");
    t.set("intent.factual_recall",
          "The user asks for knowledge you already have. Answer accurately and concisely from your own knowledge.\n\n");
    t.set("intent.tool_augmented.single_tool",
          "The request needs one tool. Pick the single best tool, call it once with arguments taken from the "
          "user's words, then answer from its result.\n\n");
    t.set("intent.tool_augmented.multi_tool",
          "The request needs several steps. Plan the order of tool calls, call one tool at a time, and use each "
          "result before deciding the next call. Explain each step briefly.\n\n");
    t.set("tool_policy.with_tools",
          "{{tool_policy}} Before every call, check that the tool fits the request and that every argument is "
          "grounded in what the user said. Never invent tools, dates, names or locations. Do not repeat a call "
          "that already succeeded.\n\n");
    t.set("tool_policy.no_tools", "Answer directly from your own knowledge without calling any tools.\n\n");
    t.set("tools", "Available tools:\n{{tool_list}}\n");
    t.set("format.structured", "Format the answer as structured output (tables, lists, JSON or code) where it helps.\n\n");
    t.set("format.free_text", "Answer in plain, natural prose.\n\n");
    t.set("format.auto", "Choose structured output for data and steps, prose otherwise.\n\n");
    t.set("safety",
          "Refuse unsafe, unethical or privacy-violating requests. Avoid biased or manipulative language and do "
          "not state unverified facts.\n\n");
    t.set("summary", "Summary of the earlier conversation:\n{{summary}}\n\n");
    t.set("static",
          "You are a helpful assistant that can use tools. Think step by step. At each step either call one of "
          "the tools below or give the final answer.\nAvailable tools:\n{{tool_list}}\n");
    return t;
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& dir) {
    PromptTemplates t = builtin();
    if (!std::filesystem::is_directory(dir)) throw ConfigError("template directory not found: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) t.set(f.stem().string(), read_file(f));
    return t;
}

std::string PromptTemplates::get(std::string_view id, std::string_view variant) const {
    if (!variant.empty()) {
        std::string key(id);
        key += '.';
        key += variant;
        if (auto it = templates_.find(key); it != templates_.end()) return it->second;
    }
    if (auto it = templates_.find(id); it != templates_.end()) return it->second;
    return {};
}

std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& vars) {
    std::string out;
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        const auto open = tmpl.find("{{", pos);
        if (open == std::string_view::npos) break;
        const auto close = tmpl.find("}}", open + 2);
        if (close == std::string_view::npos) break;
        out.append(tmpl.substr(pos, open - pos));
        const std::string key(tmpl.substr(open + 2, close - open - 2));
        if (auto it = vars.find(key); it != vars.end()) {
            out += it->second;
        } else {
            out.append(tmpl.substr(open, close + 2 - open));
        }
        pos = close + 2;
    }
    out.append(tmpl.substr(std::min(pos, tmpl.size())));
    return out;
}

// --- Composition ---------------------------------------------------------

const PromptSection* PromptBundle::section(std::string_view id) const {
    for (const auto& s : sections)
        if (s.id == id) return &s;
    return nullptr;
}

namespace {

std::string describe_parameter(const ParameterSpec& p) {
    std::string out = p.name + " (" + std::string(to_string(p.type)) + (p.required ? ", required" : ", optional");
    if (!p.constraint.empty()) out += "; " + p.constraint;
    return out + ")";
}

}  // namespace

std::string render_tool_list(std::span<const ToolSchema> tools) {
    std::string out;
    for (const auto& t : tools) {
        out += "- " + t.tool_name + " [" + std::string(to_string(t.category)) + "]: ";
        out += t.enriched_description.empty() ? t.description : t.enriched_description;
        const auto params = t.canonical_parameters();
        if (!params.empty()) {
            out += " Parameters: ";
            for (std::size_t i = 0; i < params.size(); ++i) {
                if (i) out += ", ";
                out += describe_parameter(params[i]);
            }
            out += ".";
        }
        if (!t.output_description.empty()) out += " Returns: " + t.output_description;
        if (!t.preconditions.empty()) out += " Preconditions: " + t.preconditions;
        if (t.cost_class == CostClass::expensive) {
            out += " Expensive: ask first (\"" + t.confirmation_prompt + "\")";
            if (!t.intent_keywords.empty()) {
                out += " and only call when the user explicitly asks for";
                for (std::size_t i = 0; i < t.intent_keywords.size(); ++i)
                    out += (i ? ", " : " ") + t.intent_keywords[i];
            }
            out += ".";
        }
        out += "\n";
    }
    return out;
}

PromptBundle compose_prompt(const AgentProfile& profile, const PromptTemplates& templates, const IntentCategory& intent,
                            std::span<const ToolSchema> tools, const std::optional<std::string>& summary,
                            std::string_view user_language) {
    const bool with_tools = intent.category == Intent::tool_augmented;
    const std::string language = profile.language.mirror_user ? std::string(user_language) : profile.language.fixed_tag;
    std::map<std::string, std::string> vars{{"role", profile.role_text},
                                            {"language", language},
                                            {"tool_policy", profile.tool_policy_text}};
    PromptBundle b;
    auto add = [&](std::string id, std::string_view tmpl) {
        b.sections.push_back({std::move(id), render_template(tmpl, vars)});
    };

    add("role", templates.get("role"));
    std::string intent_variant(to_string(intent.category));
    if (intent.tool_mode) intent_variant += "." + std::string(to_string(*intent.tool_mode));
    std::string intent_tmpl = templates.get("intent", intent_variant);
    if (intent_tmpl.empty()) intent_tmpl = templates.get("intent", to_string(intent.category));
    add("intent", intent_tmpl);
    add("tool_policy", templates.get("tool_policy", with_tools ? "with_tools" : "no_tools"));
    if (with_tools) {
        vars["tool_list"] = render_tool_list(tools);
        add("tools", templates.get("tools"));
    }
    const std::string_view format_variant = profile.formatting == FormattingPolicy::structured  ? "structured"
                                            : profile.formatting == FormattingPolicy::free_text ? "free_text"
                                                                                                : "auto";
    add("format", templates.get("format", format_variant));
    add("safety", templates.get("safety"));
    if (summary) {
        vars["summary"] = *summary;
        add("summary", templates.get("summary"));
        b.injected_summary = summary;
    }
    for (const auto& s : b.sections) b.system_prompt += s.text;
    return b;
}

std::string compose_static_prompt(const PromptTemplates& templates, std::span<const ToolSchema> tools) {
    return render_template(templates.get("static"), {{"tool_list", render_tool_list(tools)}});
}

SafetyVerdict apply_safety_filter(std::string_view candidate_output, const AgentProfile& profile) {
    const std::string s(candidate_output);
    for (const auto& r : profile.safety_rules) {
        if (std::regex_search(s, r.compiled)) return {true, r.id};
    }
    return {};
}

// --- Language ------------------------------------------------------------

std::string detect_user_language(std::string_view utterance, std::string_view default_tag) {
    using text::Script;
    std::map<Script, std::size_t> counts;
    for (const auto& cp : text::decode_utf8(utterance)) {
        if (!cp.valid) continue;
        const auto sc = text::script_of(cp.value);
        if (sc != Script::other) ++counts[sc];
    }
    if (counts.empty()) return std::string(default_tag);
    // Japanese mixes kanji with kana; any kana claims the Han characters too.
    if (counts.count(Script::kana)) {
        counts[Script::kana] += counts[Script::han];
        counts.erase(Script::han);
    }
    Script best = counts.begin()->first;
    std::size_t best_n = 0;
    for (const auto& [sc, n] : counts) {
        if (n > best_n) {
            best = sc;
            best_n = n;
        }
    }
    switch (best) {
        case Script::latin: return "en";
        case Script::han: return "zh";
        case Script::kana: return "ja";
        case Script::hangul: return "ko";
        case Script::cyrillic: return "ru";
        case Script::greek: return "el";
        case Script::arabic: return "ar";
        case Script::hebrew: return "he";
        case Script::devanagari: return "hi";
        case Script::thai: return "th";
        case Script::other: break;
    }
    return std::string(default_tag);
}

}  // namespace agentkit
