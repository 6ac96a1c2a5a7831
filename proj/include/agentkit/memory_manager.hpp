#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "agentkit/tokenizer.hpp"
#include "agentkit/trace_model.hpp"

// Dialogue-history integrity (alignment, placeholders, backfill) and
// session-level summarization.
namespace agentkit {

struct MemoryConfig {
    std::size_t summarize_threshold = 30;  // K: summarize when non-system messages exceed this
    double compression_target = 0.40;      // summary budget as a fraction of source tokens
};

// Throws ConfigError.
void check_memory_config(const MemoryConfig& cfg);

// --- Turn grammar --------------------------------------------------------

// Slot names used in violations: "human", "ai", "ai_call" (ai with exactly one
// call), "tool", "end" (no further message allowed / list exhausted).
struct TurnCanonical {
    std::size_t k = 0;  // tool round trips; the turn has 2 + 2k messages
    friend bool operator==(const TurnCanonical&, const TurnCanonical&) = default;
};

struct TurnViolation {
    std::size_t position = 0;
    std::string expected;
    std::string found;
    friend bool operator==(const TurnViolation&, const TurnViolation&) = default;
};

using TurnCheck = std::variant<TurnCanonical, TurnViolation>;

// Human, (AI with one call, matching Tool)^k, AI without calls.
TurnCheck validate_turn_structure(std::span<const Message> turn);

// Index ranges [begin, end) of each turn: a human message up to the next one.
// Leading system messages belong to no turn.
std::vector<std::pair<std::size_t, std::size_t>> split_turns(const Session& s);

// True when every turn of the session is canonical.
bool session_is_canonical(const Session& s);

// --- Alignment -----------------------------------------------------------

enum class RepairKind { inserted_placeholder_tool, inserted_placeholder_ai, inserted_placeholder_human, backfilled_content };
std::string_view to_string(RepairKind k) noexcept;

enum class PlaceholderReason { cancelled, api_failure, output_error, truncated };
std::string_view to_string(PlaceholderReason r) noexcept;

struct Repair {
    std::size_t position = 0;  // index in the repaired session
    RepairKind kind = RepairKind::inserted_placeholder_tool;
    std::string reason;
    friend bool operator==(const Repair&, const Repair&) = default;
};

struct AlignmentReport {
    std::vector<Repair> repairs;
    bool canonical = true;
};

// Tool outputs as recorded by the executor, keyed by call_id.
struct ExecutionLogEntry {
    std::string tool_name;
    std::string content;
};
using ExecutionLog = std::map<std::string, ExecutionLogEntry, std::less<>>;

// "[placeholder] tool=<name> call_id=<id> reason=<reason>"
std::string placeholder_tool_content(std::string_view tool_name, std::string_view call_id, PlaceholderReason reason);
bool is_placeholder_content(std::string_view content) noexcept;

// Inserts synthetic messages until every turn is canonical and backfills empty
// or truncated tool outputs from the log. Original messages keep their order
// and are never dropped; a backfilled message is replaced by a synthetic copy.
// An ai message with several calls stays as is and makes the report non-canonical.
std::pair<Session, AlignmentReport> align_history(Session session, const ExecutionLog& log = {},
                                                  const Tokenizer& tokenizer = DefaultTokenizer{});

// --- Summarization -------------------------------------------------------

bool should_summarize(const Session& s, const MemoryConfig& cfg) noexcept;

// [index of the first human, index of the second-to-last human).
// Throws InsufficientHistory below three human messages.
std::pair<std::size_t, std::size_t> select_summary_segment(const Session& s);

class Summarizer {
public:
    virtual ~Summarizer() = default;
    // Throws ProviderError (or ProviderUnavailable) on failure.
    virtual std::string summarize(std::span<const Message> segment, const std::optional<std::string>& previous_summary,
                                  std::size_t token_budget) const = 0;
    virtual std::string name() const = 0;
};

// First sentence of every human message plus each tool used and whether it
// succeeded, truncated to the token budget.
class ExtractiveSummarizer final : public Summarizer {
public:
    explicit ExtractiveSummarizer(std::shared_ptr<const Tokenizer> tokenizer = std::make_shared<DefaultTokenizer>())
        : tokenizer_(std::move(tokenizer)) {}
    std::string summarize(std::span<const Message> segment, const std::optional<std::string>& previous_summary,
                          std::size_t token_budget) const override;
    std::string name() const override { return "extractive"; }

private:
    std::shared_ptr<const Tokenizer> tokenizer_;
};

// Longest prefix of `text` (cut at a code point boundary) with at most `budget` tokens.
std::string truncate_to_tokens(std::string_view text, std::size_t budget, const Tokenizer& tokenizer);

struct SummarizeResult {
    Session session;
    bool replaced = false;
    std::optional<std::string> error;  // set when the summarizer failed; session is then the input
    std::size_t source_tokens = 0;
    std::size_t summary_tokens = 0;
};

// Replaces the segment (and any previous summary message) with one system
// message at index 0 and records the text in session.summary.
SummarizeResult summarize_and_replace(const Session& session, std::pair<std::size_t, std::size_t> segment,
                                      const MemoryConfig& cfg, const Summarizer& summarizer,
                                      const Tokenizer& tokenizer = DefaultTokenizer{});

// should_summarize + select_summary_segment + summarize_and_replace. No-op when
// not triggered or when the history has fewer than three human messages.
SummarizeResult maybe_summarize(const Session& session, const MemoryConfig& cfg, const Summarizer& summarizer,
                                const Tokenizer& tokenizer = DefaultTokenizer{});

}  // namespace agentkit
