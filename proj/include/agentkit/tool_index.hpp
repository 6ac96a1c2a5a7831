#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "agentkit/toolhost.hpp"

// Embedding-based tool retrieval with the hybrid similarity-jump / Kneedle cutoff.
namespace agentkit {

struct EmbeddingVector {
    std::vector<double> values;

    std::size_t dimension() const noexcept { return values.size(); }
    double norm() const noexcept;
    friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

class Embedder {
public:
    virtual ~Embedder() = default;
    // Unit-norm vector of dimension(). Throws ProviderUnavailable for remote failures.
    virtual EmbeddingVector embed(std::string_view text) const = 0;
    virtual std::size_t dimension() const noexcept = 0;
    virtual std::string name() const = 0;
};

// Deterministic bag-of-words embedder: each lowercased word is feature-hashed
// (FNV-1a) into a signed bucket, counts are accumulated and the vector is
// normalized. Word order is irrelevant by construction. Text without any word
// is hashed as a single token so every nonempty text gets a nonzero vector.
class HashingEmbedder final : public Embedder {
public:
    explicit HashingEmbedder(std::size_t dimension = 1024);
    EmbeddingVector embed(std::string_view text) const override;
    std::size_t dimension() const noexcept override { return dimension_; }
    std::string name() const override { return "hashing"; }

private:
    std::size_t dimension_;
};

// Throws DimensionMismatch or ZeroVector.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

struct RetrievalConfig {
    std::size_t top_m = 50;
    std::size_t min_retained = 10;
    double jump_min_gap = 0.05;
};

// Throws ConfigError when the config is out of range.
void check_retrieval_config(const RetrievalConfig& cfg);

struct ScoredTool {
    std::string tool_name;
    double score = 0.0;
    friend bool operator==(const ScoredTool&, const ScoredTool&) = default;
};

// Sorted by score descending, ties by tool_name ascending; min(top_m, |tools|) entries.
// Scores are cosines rounded to 12 decimals so every SIMD kernel ranks alike.
std::vector<ScoredTool> rank_top_m(const EmbeddingVector& query,
                                   std::span<const std::pair<std::string, EmbeddingVector>> tools,
                                   const RetrievalConfig& cfg);

// Largest consecutive drop in a descending list. Returns the count of entries
// before the drop (earliest on ties), or scores.size() when no drop reaches
// `min_gap`. Throws TooFewScores below two entries.
std::size_t detect_jump(std::span<const double> scores, double min_gap);

// Knee of the cumulative similarity curve: cumulative sums min-max normalized
// against the index diagonal; returns 1 + the index of maximum deviation above
// the diagonal (earliest on ties), or scores.size() when the curve is flat.
// Negative scores count as zero. Throws TooFewScores below three entries.
std::size_t detect_kneedle(std::span<const double> scores);

// max(min(n_jump, n_kneedle), min(min_retained, candidates)), capped at candidates.
std::size_t final_cutoff(std::size_t n_jump, std::size_t n_kneedle, std::size_t min_retained,
                         std::size_t candidates) noexcept;

struct CutoffResult {
    std::size_t n_jump = 0;
    std::size_t n_kneedle = 0;
    std::size_t n_final = 0;
    std::vector<ScoredTool> retained;
};

// Runs both detectors over an already ranked list and keeps the top n_final.
// Lists too short for a detector use the full length for that detector.
CutoffResult apply_cutoff(std::vector<ScoredTool> ranked, const RetrievalConfig& cfg);

// Embeddings for a fixed tool set, built once and queried read-only.
class ToolIndex {
public:
    ToolIndex(std::vector<ToolSchema> tools, std::shared_ptr<const Embedder> embedder);

    const std::vector<ToolSchema>& tools() const noexcept { return tools_; }
    const Embedder& embedder() const noexcept { return *embedder_; }
    const ToolSchema* find(std::string_view name) const;

    // Hook applied to the utterance before embedding; identity by default.
    void set_query_rewriter(std::function<std::string(std::string_view)> fn) { rewriter_ = std::move(fn); }

    // Scores every indexed tool (restricted to `allowed` when given) against the
    // query and ranks with rank_top_m semantics.
    std::vector<ScoredTool> rank(std::string_view query, const RetrievalConfig& cfg,
                                 const std::vector<std::string>* allowed = nullptr) const;

    CutoffResult select(std::string_view query, const RetrievalConfig& cfg,
                        const std::vector<std::string>* allowed = nullptr) const;

    std::span<const std::pair<std::string, EmbeddingVector>> embeddings() const noexcept { return named_; }

private:
    std::vector<ToolSchema> tools_;
    std::shared_ptr<const Embedder> embedder_;
    std::vector<std::pair<std::string, EmbeddingVector>> named_;
    std::vector<double> matrix_;  // row-major, one unit vector per tool
    std::function<std::string(std::string_view)> rewriter_;
};

// Convenience wrapper over ToolIndex::select. Throws EmptyInput for an empty index.
CutoffResult select_tools(std::string_view query, const ToolIndex& index, const RetrievalConfig& cfg);

}  // namespace agentkit
