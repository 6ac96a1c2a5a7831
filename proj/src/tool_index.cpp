#include "agentkit/tool_index.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "agentkit/simd/similarity_kernels.hpp"
#include "agentkit/text.hpp"

namespace agentkit {

double EmbeddingVector::norm() const noexcept { return std::sqrt(simd::dot(values, values)); }

HashingEmbedder::HashingEmbedder(std::size_t dimension) : dimension_(dimension) {
    if (dimension_ == 0) throw ConfigError("embedding.dimension must be positive");
}

EmbeddingVector HashingEmbedder::embed(std::string_view input) const {
    if (input.empty()) throw EmptyInput("cannot embed empty text");
    std::vector<std::string> toks;
    for (auto& w : text::words(input)) {
        if (!text::is_stopword(w)) toks.push_back(std::move(w));
    }
    if (toks.empty()) toks = text::words(input);
    if (toks.empty()) toks.emplace_back(input);

    EmbeddingVector v;
    v.values.assign(dimension_, 0.0);
    for (const auto& t : toks) {
        const auto h = text::fnv1a64(t);
        const double sign = (h >> 63) != 0 ? -1.0 : 1.0;
        v.values[h % dimension_] += sign;
    }
    double n = v.norm();
    if (n == 0.0) {
        // Every token cancelled out in one bucket; fall back to an unsigned hash.
        for (const auto& t : toks) v.values[text::fnv1a64(t) % dimension_] += 1.0;
        n = v.norm();
    }
    for (auto& x : v.values) x /= n;
    return v;
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dimension() != b.dimension())
        throw DimensionMismatch("cosine_similarity: dimensions " + std::to_string(a.dimension()) + " and " +
                                std::to_string(b.dimension()));
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) throw ZeroVector("cosine_similarity: zero vector");
    const double c = simd::dot(a.values, b.values) / (na * nb);
    return std::clamp(c, -1.0, 1.0);
}

void check_retrieval_config(const RetrievalConfig& cfg) {
    if (cfg.top_m == 0) throw ConfigError("retrieval.top_m must be positive");
    if (cfg.min_retained == 0) throw ConfigError("retrieval.min_retained must be positive");
    if (cfg.min_retained > cfg.top_m) throw ConfigError("retrieval.min_retained must not exceed retrieval.top_m");
    if (!(cfg.jump_min_gap > 0.0 && cfg.jump_min_gap <= 1.0))
        throw ConfigError("retrieval.jump_min_gap must lie in (0, 1]");
}

namespace {

// Vector kernels reassociate sums, so exact ties can differ in the last bits.
// Rounding keeps the ranking identical whichever kernel ran.
double ranking_score(double cosine) { return std::round(cosine * 1e12) / 1e12; }

void sort_and_truncate(std::vector<ScoredTool>& ranked, std::size_t top_m) {
    std::sort(ranked.begin(), ranked.end(), [](const ScoredTool& a, const ScoredTool& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.tool_name < b.tool_name;
    });
    if (ranked.size() > top_m) ranked.resize(top_m);
}

}  // namespace

std::vector<ScoredTool> rank_top_m(const EmbeddingVector& query,
                                   std::span<const std::pair<std::string, EmbeddingVector>> tools,
                                   const RetrievalConfig& cfg) {
    std::vector<ScoredTool> ranked;
    ranked.reserve(tools.size());
    for (const auto& [name, vec] : tools) ranked.push_back({name, ranking_score(cosine_similarity(query, vec))});
    sort_and_truncate(ranked, cfg.top_m);
    return ranked;
}

std::size_t detect_jump(std::span<const double> scores, double min_gap) {
    if (scores.size() < 2) throw TooFewScores("detect_jump needs at least 2 scores");
    std::size_t best = 0;
    double best_gap = scores[0] - scores[1];
    for (std::size_t i = 1; i + 1 < scores.size(); ++i) {
        const double gap = scores[i] - scores[i + 1];
        if (gap > best_gap) {
            best_gap = gap;
            best = i;
        }
    }
    if (best_gap < min_gap) return scores.size();
    return best + 1;
}

std::size_t detect_kneedle(std::span<const double> scores) {
    const std::size_t n = scores.size();
    if (n < 3) throw TooFewScores("detect_kneedle needs at least 3 scores");
    std::vector<double> cum(n);
    double run = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        run += std::max(scores[i], 0.0);
        cum[i] = run;
    }
    if (cum.back() <= 0.0) return n;
    const double range = cum.back() - cum.front();
    if (range <= 0.0) return 1;  // all similarity mass sits on the first tool

    std::size_t best = 0;
    double best_dev = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = static_cast<double>(i) / static_cast<double>(n - 1);
        const double y = (cum[i] - cum.front()) / range;
        const double dev = y - x;
        if (dev > best_dev) {
            best_dev = dev;
            best = i;
        }
    }
    if (best_dev <= 1e-12) return n;
    return best + 1;
}

std::size_t final_cutoff(std::size_t n_jump, std::size_t n_kneedle, std::size_t min_retained,
                         std::size_t candidates) noexcept {
    std::size_t n = std::min(n_jump, n_kneedle);
    n = std::max(n, std::min(min_retained, candidates));
    return std::min(n, candidates);
}

CutoffResult apply_cutoff(std::vector<ScoredTool> ranked, const RetrievalConfig& cfg) {
    CutoffResult r;
    const std::size_t len = ranked.size();
    std::vector<double> scores(len);
    std::transform(ranked.begin(), ranked.end(), scores.begin(), [](const ScoredTool& t) { return t.score; });
    r.n_jump = len >= 2 ? detect_jump(scores, cfg.jump_min_gap) : len;
    r.n_kneedle = len >= 3 ? detect_kneedle(scores) : len;
    r.n_final = final_cutoff(r.n_jump, r.n_kneedle, cfg.min_retained, len);
    ranked.resize(r.n_final);
    r.retained = std::move(ranked);
    return r;
}

ToolIndex::ToolIndex(std::vector<ToolSchema> tools, std::shared_ptr<const Embedder> embedder)
    : tools_(std::move(tools)), embedder_(std::move(embedder)) {
    const std::size_t dim = embedder_->dimension();
    matrix_.reserve(tools_.size() * dim);
    named_.reserve(tools_.size());
    for (const auto& t : tools_) {
        auto v = embedder_->embed(embedding_text(t));
        if (v.dimension() != dim) throw DimensionMismatch("embedder returned wrong dimension for " + t.tool_name);
        matrix_.insert(matrix_.end(), v.values.begin(), v.values.end());
        named_.emplace_back(t.tool_name, std::move(v));
    }
}

const ToolSchema* ToolIndex::find(std::string_view name) const {
    for (const auto& t : tools_)
        if (t.tool_name == name) return &t;
    return nullptr;
}

std::vector<ScoredTool> ToolIndex::rank(std::string_view query, const RetrievalConfig& cfg,
                                        const std::vector<std::string>* allowed) const {
    const auto q = embedder_->embed(rewriter_ ? rewriter_(query) : std::string(query));
    const double qn = q.norm();
    if (qn == 0.0) throw ZeroVector("query embedded to a zero vector");
    const std::size_t dim = q.dimension();
    std::vector<double> dots(named_.size());
    simd::dot_rows(q.values, matrix_, dots);

    std::set<std::string_view> allow;
    if (allowed) allow.insert(allowed->begin(), allowed->end());
    std::vector<ScoredTool> ranked;
    ranked.reserve(named_.size());
    for (std::size_t i = 0; i < named_.size(); ++i) {
        if (allowed && !allow.count(named_[i].first)) continue;
        const double rn = std::sqrt(simd::dot(std::span<const double>(matrix_).subspan(i * dim, dim),
                                              std::span<const double>(matrix_).subspan(i * dim, dim)));
        ranked.push_back({named_[i].first, ranking_score(std::clamp(dots[i] / (qn * rn), -1.0, 1.0))});
    }
    sort_and_truncate(ranked, cfg.top_m);
    return ranked;
}

CutoffResult ToolIndex::select(std::string_view query, const RetrievalConfig& cfg,
                               const std::vector<std::string>* allowed) const {
    return apply_cutoff(rank(query, cfg, allowed), cfg);
}

CutoffResult select_tools(std::string_view query, const ToolIndex& index, const RetrievalConfig& cfg) {
    if (index.tools().empty()) throw EmptyInput("select_tools: empty tool registry");
    return index.select(query, cfg);
}

}  // namespace agentkit
