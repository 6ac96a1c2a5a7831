#include "agentkit/memory_manager.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "agentkit/errors.hpp"
#include "agentkit/text.hpp"

namespace agentkit {

void check_memory_config(const MemoryConfig& cfg) {
    if (cfg.summarize_threshold < 4) throw ConfigError("memory.summarize_threshold must be at least 4");
    if (!(cfg.compression_target > 0.0 && cfg.compression_target <= 1.0))
        throw ConfigError("memory.compression_target must lie in (0, 1]");
}

// --- Turn grammar --------------------------------------------------------

namespace {

std::string slot_of(const Message& m) {
    switch (m.role) {
        case Role::human: return "human";
        case Role::system: return "system";
        case Role::tool: return "tool";
        case Role::ai:
            if (m.tool_calls.empty()) return "ai";
            return m.tool_calls.size() == 1 ? "ai_call" : "ai_multi_call";
    }
    return "?";
}

}  // namespace

TurnCheck validate_turn_structure(std::span<const Message> turn) {
    const std::size_t n = turn.size();
    if (n == 0) return TurnViolation{0, "human", "end"};
    if (turn[0].role != Role::human) return TurnViolation{0, "human", slot_of(turn[0])};
    std::size_t k = 0;
    std::size_t i = 1;
    while (true) {
        if (i == n) return TurnViolation{i, "ai", "end"};
        const Message& m = turn[i];
        if (m.role != Role::ai) return TurnViolation{i, "ai", slot_of(m)};
        if (m.tool_calls.empty()) {
            if (i + 1 != n) return TurnViolation{i + 1, "end", slot_of(turn[i + 1])};
            return TurnCanonical{k};
        }
        if (m.tool_calls.size() > 1) return TurnViolation{i, "ai_call", slot_of(m)};
        if (i + 1 == n) return TurnViolation{i + 1, "tool", "end"};
        const Message& t = turn[i + 1];
        if (t.role != Role::tool) return TurnViolation{i + 1, "tool", slot_of(t)};
        if (t.tool_call_id != m.tool_calls.front().call_id)
            return TurnViolation{i + 1, "tool", "tool(call_id=" + t.tool_call_id.value_or("") + ")"};
        ++k;
        i += 2;
    }
}

std::vector<std::pair<std::size_t, std::size_t>> split_turns(const Session& s) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < s.messages.size(); ++i) {
        if (s.messages[i].role != Role::human) continue;
        if (!out.empty()) out.back().second = i;
        out.emplace_back(i, s.messages.size());
    }
    return out;
}

bool session_is_canonical(const Session& s) {
    const auto turns = split_turns(s);
    const std::size_t first = turns.empty() ? s.messages.size() : turns.front().first;
    for (std::size_t i = 0; i < first; ++i)
        if (s.messages[i].role != Role::system) return false;
    for (const auto& [b, e] : turns) {
        const auto r = validate_turn_structure(std::span<const Message>(s.messages).subspan(b, e - b));
        if (!std::holds_alternative<TurnCanonical>(r)) return false;
    }
    return true;
}

// --- Alignment -----------------------------------------------------------

std::string_view to_string(RepairKind k) noexcept {
    switch (k) {
        case RepairKind::inserted_placeholder_tool: return "inserted_placeholder_tool";
        case RepairKind::inserted_placeholder_ai: return "inserted_placeholder_ai";
        case RepairKind::inserted_placeholder_human: return "inserted_placeholder_human";
        case RepairKind::backfilled_content: return "backfilled_content";
    }
    return "?";
}

std::string_view to_string(PlaceholderReason r) noexcept {
    switch (r) {
        case PlaceholderReason::cancelled: return "cancelled";
        case PlaceholderReason::api_failure: return "api_failure";
        case PlaceholderReason::output_error: return "output_error";
        case PlaceholderReason::truncated: return "truncated";
    }
    return "?";
}

std::string placeholder_tool_content(std::string_view tool_name, std::string_view call_id, PlaceholderReason reason) {
    std::string out = "[placeholder] tool=";
    out += tool_name;
    out += " call_id=";
    out += call_id;
    out += " reason=";
    out += to_string(reason);
    return out;
}

bool is_placeholder_content(std::string_view content) noexcept { return content.starts_with("[placeholder]"); }

namespace {

class Aligner {
public:
    Aligner(const ExecutionLog& log, const Tokenizer& tok) : log_(log), tok_(tok) {}

    std::pair<Session, AlignmentReport> run(Session in) {
        out_.summary = std::move(in.summary);
        out_.state = std::move(in.state);
        auto& msgs = in.messages;
        for (std::size_t i = 0; i < msgs.size(); ++i) {
            const Role next = msgs[i].role;
            switch (next) {
                case Role::system:
                    if (seen_human_) report_.canonical = false;
                    out_.messages.push_back(std::move(msgs[i]));
                    break;
                case Role::human:
                    if (state_ == State::tools) flush_pending(PlaceholderReason::cancelled);
                    if (state_ == State::ai) terminal_ai(PlaceholderReason::cancelled);
                    out_.messages.push_back(std::move(msgs[i]));
                    seen_human_ = true;
                    state_ = State::ai;
                    break;
                case Role::ai: on_ai(std::move(msgs[i])); break;
                case Role::tool: on_tool(std::move(msgs[i])); break;
            }
        }
        if (state_ == State::tools) flush_pending(PlaceholderReason::truncated);
        if (state_ == State::ai) terminal_ai(PlaceholderReason::truncated);
        return {std::move(out_), std::move(report_)};
    }

private:
    enum class State { human, ai, tools };

    void on_ai(Message m) {
        if (state_ == State::tools) flush_pending(PlaceholderReason::api_failure);
        if (state_ == State::human) placeholder_human();
        for (const auto& c : m.tool_calls) seen_calls_.insert(c.call_id);
        if (m.tool_calls.size() > 1) report_.canonical = false;
        pending_ = m.tool_calls;
        state_ = pending_.empty() ? State::human : State::tools;
        out_.messages.push_back(std::move(m));
    }

    void on_tool(Message m) {
        const std::string id = m.tool_call_id.value_or("");
        if (state_ == State::tools) {
            auto it = std::find_if(pending_.begin(), pending_.end(),
                                   [&](const ToolCallRequest& c) { return c.call_id == id; });
            if (it != pending_.end()) {
                pending_.erase(it);
                push_tool(std::move(m));
                if (pending_.empty()) state_ = State::ai;
                return;
            }
            flush_pending(PlaceholderReason::api_failure);
        }
        if (state_ == State::human) placeholder_human();
        if (seen_calls_.count(id)) {
            // Answers a call that already has a reply; a wrapping ai would repeat its call_id.
            report_.canonical = false;
            out_.messages.push_back(std::move(m));
            return;
        }
        // Orphan output: restore the ai message that must have requested it.
        ToolCallRequest call;
        call.call_id = id;
        auto log_it = log_.find(id);
        call.tool_name = log_it != log_.end() && !log_it->second.tool_name.empty() ? log_it->second.tool_name : "unknown";
        seen_calls_.insert(id);
        Message ai = Message::ai("[placeholder] ai call_id=" + id, {call});
        insert_synthetic(std::move(ai), RepairKind::inserted_placeholder_ai, "orphan tool output");
        push_tool(std::move(m));
        state_ = State::ai;
    }

    void push_tool(Message m) {
        const auto id = m.tool_call_id.value_or("");
        if (auto it = log_.find(id); it != log_.end()) {
            const auto& logged = it->second.content;
            const bool truncated = m.content.size() < logged.size() && logged.starts_with(m.content);
            if (truncated) {
                Message b = Message::tool(id, logged);
                insert_synthetic(std::move(b), RepairKind::backfilled_content,
                                 m.content.empty() ? "empty content" : "truncated content");
                return;
            }
        }
        out_.messages.push_back(std::move(m));
    }

    void flush_pending(PlaceholderReason reason) {
        for (const auto& c : pending_) {
            if (auto it = log_.find(c.call_id); it != log_.end()) {
                insert_synthetic(Message::tool(c.call_id, it->second.content), RepairKind::backfilled_content,
                                 "missing tool output recovered from log");
            } else {
                insert_synthetic(Message::tool(c.call_id, placeholder_tool_content(c.tool_name, c.call_id, reason)),
                                 RepairKind::inserted_placeholder_tool, std::string(to_string(reason)));
            }
        }
        pending_.clear();
        state_ = State::ai;
    }

    void terminal_ai(PlaceholderReason reason) {
        insert_synthetic(Message::ai("[placeholder] ai reason=" + std::string(to_string(reason))),
                         RepairKind::inserted_placeholder_ai, std::string(to_string(reason)));
        state_ = State::human;
    }

    void placeholder_human() {
        insert_synthetic(Message::human("[placeholder] human"), RepairKind::inserted_placeholder_human,
                         "missing human message");
        seen_human_ = true;
        state_ = State::ai;
    }

    void insert_synthetic(Message m, RepairKind kind, std::string reason) {
        m.synthetic = true;
        m.token_count = tok_.count(m.content);
        report_.repairs.push_back({out_.messages.size(), kind, std::move(reason)});
        out_.messages.push_back(std::move(m));
    }

    const ExecutionLog& log_;
    const Tokenizer& tok_;
    Session out_;
    AlignmentReport report_;
    State state_ = State::human;
    bool seen_human_ = false;
    std::vector<ToolCallRequest> pending_;
    std::set<std::string> seen_calls_;
};

}  // namespace

std::pair<Session, AlignmentReport> align_history(Session session, const ExecutionLog& log, const Tokenizer& tokenizer) {
    auto result = Aligner(log, tokenizer).run(std::move(session));
    if (result.second.canonical) result.second.canonical = session_is_canonical(result.first);
    return result;
}

// --- Summarization -------------------------------------------------------

bool should_summarize(const Session& s, const MemoryConfig& cfg) noexcept {
    const auto n = std::count_if(s.messages.begin(), s.messages.end(),
                                 [](const Message& m) { return m.role != Role::system; });
    return static_cast<std::size_t>(n) > cfg.summarize_threshold;
}

std::pair<std::size_t, std::size_t> select_summary_segment(const Session& s) {
    std::vector<std::size_t> humans;
    for (std::size_t i = 0; i < s.messages.size(); ++i)
        if (s.messages[i].role == Role::human) humans.push_back(i);
    if (humans.size() < 3)
        throw InsufficientHistory("summarization needs at least 3 human messages, found " +
                                  std::to_string(humans.size()));
    return {humans.front(), humans[humans.size() - 2]};
}

namespace {

std::string first_sentence(std::string_view raw) {
    const std::string trimmed = text::trim(raw);
    const std::string_view s = trimmed;
    std::size_t cut = s.size();
    for (std::string_view end : {".", "!", "?", "\n", "。", "！", "？"}) {
        const auto p = s.find(end);
        if (p != std::string_view::npos) cut = std::min(cut, p + (end == "\n" ? 0 : end.size()));
    }
    return text::trim(s.substr(0, cut));
}

bool tool_output_failed(std::string_view content) {
    return content.starts_with("error[") || is_placeholder_content(content);
}

}  // namespace

std::string truncate_to_tokens(std::string_view input, std::size_t budget, const Tokenizer& tokenizer) {
    if (tokenizer.count(input) <= budget) return std::string(input);
    std::vector<std::size_t> cuts;
    for (const auto& cp : text::decode_utf8(input)) cuts.push_back(cp.offset);
    cuts.push_back(input.size());
    // Token counts of prefixes never decrease, so the cut is found by bisection.
    std::size_t lo = 0;
    std::size_t hi = cuts.size() - 1;
    while (lo < hi) {
        const std::size_t mid = (lo + hi + 1) / 2;
        if (tokenizer.count(input.substr(0, cuts[mid])) <= budget) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    return text::trim(input.substr(0, cuts[lo]));
}

std::string ExtractiveSummarizer::summarize(std::span<const Message> segment,
                                            const std::optional<std::string>& previous_summary,
                                            std::size_t token_budget) const {
    std::string out;
    if (previous_summary && !previous_summary->empty()) out += "Earlier: " + *previous_summary + " ";
    std::vector<std::string> asks;
    std::map<std::string, std::string, std::less<>> call_tool;
    std::vector<std::string> tools;
    for (const auto& m : segment) {
        if (m.role == Role::human && !m.synthetic) {
            auto s = first_sentence(m.content);
            if (!s.empty()) asks.push_back(std::move(s));
        }
        for (const auto& c : m.tool_calls) call_tool[c.call_id] = c.tool_name;
        if (m.role == Role::tool) {
            auto it = call_tool.find(m.tool_call_id.value_or(""));
            const std::string name = it != call_tool.end() ? it->second : "unknown";
            tools.push_back(name + (tool_output_failed(m.content) ? " (error)" : " (ok)"));
        }
    }
    out += "User asked:";
    for (std::size_t i = 0; i < asks.size(); ++i) out += (i ? " | " : " ") + asks[i];
    if (!tools.empty()) {
        out += " Tools:";
        for (std::size_t i = 0; i < tools.size(); ++i) out += (i ? ", " : " ") + tools[i];
        out += ".";
    }
    return truncate_to_tokens(out, token_budget, *tokenizer_);
}

SummarizeResult summarize_and_replace(const Session& session, std::pair<std::size_t, std::size_t> segment,
                                      const MemoryConfig& cfg, const Summarizer& summarizer,
                                      const Tokenizer& tokenizer) {
    const auto [begin, end] = segment;
    if (!(begin < end && end <= session.messages.size() && session.messages[begin].role == Role::human))
        throw InvariantViolation("summary-segment", "segment [" + std::to_string(begin) + ", " + std::to_string(end) +
                                                        ") does not start at a human message");
    SummarizeResult r;
    r.session = session;
    const auto seg = std::span<const Message>(session.messages).subspan(begin, end - begin);
    for (const auto& m : seg) r.source_tokens += tokenizer.count(m.content);
    if (session.summary) r.source_tokens += tokenizer.count(*session.summary);
    const auto budget = std::max<std::size_t>(
        static_cast<std::size_t>(std::floor(cfg.compression_target * static_cast<double>(r.source_tokens))), 8);

    std::string summary;
    try {
        summary = summarizer.summarize(seg, session.summary, budget);
    } catch (const std::exception& e) {
        r.error = summarizer.name() + " summarizer failed: " + e.what();
        return r;
    }

    Session out;
    out.state = session.state;
    out.summary = summary;
    Message sys = Message::system(summary, tokenizer.count(summary));
    out.messages.push_back(std::move(sys));
    for (std::size_t i = 0; i < begin; ++i) {
        const auto& m = session.messages[i];
        if (m.role == Role::system && session.summary && m.content == *session.summary) continue;
        out.messages.push_back(m);
    }
    out.messages.insert(out.messages.end(), session.messages.begin() + static_cast<std::ptrdiff_t>(end),
                        session.messages.end());
    r.summary_tokens = out.messages.front().token_count;
    r.session = std::move(out);
    r.replaced = true;
    return r;
}

SummarizeResult maybe_summarize(const Session& session, const MemoryConfig& cfg, const Summarizer& summarizer,
                                const Tokenizer& tokenizer) {
    SummarizeResult unchanged;
    unchanged.session = session;
    if (!should_summarize(session, cfg)) return unchanged;
    const auto humans = std::count_if(session.messages.begin(), session.messages.end(),
                                      [](const Message& m) { return m.role == Role::human; });
    if (humans < 3) return unchanged;
    return summarize_and_replace(session, select_summary_segment(session), cfg, summarizer, tokenizer);
}

}  // namespace agentkit
