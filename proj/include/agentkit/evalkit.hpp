#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "agentkit/engine.hpp"

// Execution-fidelity metrics (completion / failure / incompletion rates and the
// performance score), judge scoring, and ablation sweeps.
namespace agentkit {

enum class Classification { completed, failed, incomplete };
std::string_view to_string(Classification c) noexcept;

struct TaskOutcome {
    std::string task_id;
    Classification classification = Classification::failed;
    std::size_t c_count = 0;  // correct: longest in-order match of R within L
    std::size_t w_count = 0;  // wrong: |L| - C
    std::size_t m_count = 0;  // missing: |R| - C
    double tps = 0.0;
    bool degenerate = false;  // C = W = M = 0, scored 1.0

    friend bool operator==(const TaskOutcome&, const TaskOutcome&) = default;
};

bool is_subsequence(std::span<const std::string> reference, std::span<const std::string> actual);
std::size_t longest_in_order_match(std::span<const std::string> reference, std::span<const std::string> actual);

// Failed if nothing was invoked or any error occurred, else completed if R is a
// subsequence of L, else incomplete. Throws TaskMismatch when the ids differ.
TaskOutcome classify_task(const TaskFixture& fixture, const ExecutionTrace& trace, double lambda_w = 1.0,
                          double lambda_m = 1.0);

// C / (C + lambda_w W + lambda_m M); 1.0 when all three are zero.
double task_performance_score(const TaskOutcome& outcome, double lambda_w = 1.0, double lambda_m = 1.0);

inline constexpr std::array<std::string_view, 5> kJudgeDimensions{"correctness", "relevance", "completeness",
                                                                   "fluency", "faithfulness"};

struct JudgeScore {
    int correctness = 0;
    int relevance = 0;
    int completeness = 0;
    int fluency = 0;
    int faithfulness = 0;
    std::string rationale;

    friend bool operator==(const JudgeScore&, const JudgeScore&) = default;
    int get(std::string_view dimension) const;
};

struct JudgeContext {
    std::string task_id;
    std::string query;  // every user turn, newline-joined
    Json metadata = Json::object();
};

class Judge {
public:
    virtual ~Judge() = default;
    // Throws ProviderError / ProviderUnavailable.
    virtual JudgeScore judge(std::string_view response, std::string_view reference, const JudgeContext& ctx) const = 0;
    virtual std::string name() const = 0;
};

// Word-overlap rubric for offline runs. Scores are rounded to 0..10:
//   correctness  = 2 * LCS / (|response| + |reference|)
//   faithfulness = LCS / |response|
//   completeness = share of distinct reference terms found in the response
//   relevance    = share of query terms that also occur in the reference and
//                  are found in the response (completeness when there are none)
//   fluency      = 10 for nonempty, valid UTF-8 text containing a word
// where LCS is the longest common word subsequence.
class StubJudge final : public Judge {
public:
    JudgeScore judge(std::string_view response, std::string_view reference, const JudgeContext& ctx) const override;
    std::string name() const override { return "stub"; }
};

// Asks a model for a JSON object with the five dimension scores.
class ModelJudge final : public Judge {
public:
    explicit ModelJudge(std::shared_ptr<const ModelProvider> model) : model_(std::move(model)) {}
    JudgeScore judge(std::string_view response, std::string_view reference, const JudgeContext& ctx) const override;
    std::string name() const override { return "model:" + model_->name(); }

private:
    std::shared_ptr<const ModelProvider> model_;
};

JudgeContext judge_context(const TaskFixture& fixture);

struct MetricsReport {
    std::string variant;
    std::size_t n_tasks = 0;
    std::size_t n_completed = 0;
    std::size_t n_failed = 0;
    std::size_t n_incomplete = 0;
    double tcr = 0.0;
    double tfr = 0.0;
    double tir = 0.0;
    double tps_avg = 0.0;
    double lambda_w = 1.0;
    double lambda_m = 1.0;
    std::map<std::string, double> crcff;  // mean judge score / 10
    std::size_t n_judged = 0;
    std::vector<std::string> degenerate_tasks;  // TPS defined as 1.0 by convention
    std::vector<std::string> unjudged_tasks;
    std::uint64_t input_tokens_total = 0;
    std::uint64_t output_tokens_total = 0;

    // (completed + failed + incomplete) / n_tasks, from counts.
    double partition_sum() const noexcept;
};

struct TokenTotals {
    std::uint64_t input = 0;
    std::uint64_t output = 0;
};

// `scores` is empty or parallel to `outcomes` (nullopt = unjudged).
// Throws EmptyInput for no outcomes.
MetricsReport aggregate(std::span<const TaskOutcome> outcomes, std::span<const std::optional<JudgeScore>> scores,
                        TokenTotals tokens, double lambda_w = 1.0, double lambda_m = 1.0);

Json to_json(const MetricsReport& r);
Json to_json(const TaskOutcome& o);

// Markdown table, one row per report in the given order.
std::string comparison_table(std::span<const MetricsReport> reports);

std::vector<AblationFlags> standard_variants();
// Comma-separated list, e.g. "base,bp,bpt,full". Throws ConfigError.
std::vector<AblationFlags> parse_variants(std::string_view list);

struct AblationOptions {
    double lambda_w = 1.0;
    double lambda_m = 1.0;
    std::size_t jobs = 1;
    std::shared_ptr<const Judge> judge;  // null: no CRCFF scoring
};

struct VariantResult {
    AblationFlags flags;
    MetricsReport report;
    std::vector<TaskOutcome> outcomes;
    std::vector<ExecutionTrace> traces;  // fixture order
};

// Runs every fixture under every variant. Task failures land in the traces;
// the sweep itself never stops early.
std::vector<VariantResult> run_ablation(std::span<const TaskFixture> fixtures, std::span<const AblationFlags> variants,
                                        const EngineConfig& base, const Environment& env, const AblationOptions& opts);

}  // namespace agentkit
