#include "agentkit/evalkit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <set>
#include <thread>

#include "agentkit/errors.hpp"
#include "agentkit/text.hpp"

namespace agentkit {

std::string_view to_string(Classification c) noexcept {
    switch (c) {
        case Classification::completed: return "completed";
        case Classification::failed: return "failed";
        case Classification::incomplete: return "incomplete";
    }
    return "?";
}

bool is_subsequence(std::span<const std::string> reference, std::span<const std::string> actual) {
    std::size_t i = 0;
    for (const auto& a : actual) {
        if (i == reference.size()) break;
        if (a == reference[i]) ++i;
    }
    return i == reference.size();
}

namespace {

template <class T>
std::size_t lcs(std::span<const T> a, std::span<const T> b) {
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

}  // namespace

std::size_t longest_in_order_match(std::span<const std::string> reference, std::span<const std::string> actual) {
    return lcs(reference, actual);
}

double task_performance_score(const TaskOutcome& o, double lambda_w, double lambda_m) {
    const double c = static_cast<double>(o.c_count);
    const double denom = c + lambda_w * static_cast<double>(o.w_count) + lambda_m * static_cast<double>(o.m_count);
    if (denom == 0.0) return 1.0;
    return c / denom;
}

TaskOutcome classify_task(const TaskFixture& fixture, const ExecutionTrace& trace, double lambda_w, double lambda_m) {
    if (fixture.task_id != trace.task_id)
        throw TaskMismatch("trace '" + trace.task_id + "' does not belong to fixture '" + fixture.task_id + "'");
    std::vector<std::string> invoked;
    invoked.reserve(trace.invoked.size());
    for (const auto& inv : trace.invoked) invoked.push_back(inv.tool_name);
    const auto& ref = fixture.reference_sequence;

    TaskOutcome o;
    o.task_id = fixture.task_id;
    if (invoked.empty() || trace.failed_by_error()) {
        o.classification = Classification::failed;
    } else if (is_subsequence(ref, invoked)) {
        o.classification = Classification::completed;
    } else {
        o.classification = Classification::incomplete;
    }
    o.c_count = longest_in_order_match(ref, invoked);
    o.m_count = ref.size() - o.c_count;
    o.w_count = invoked.size() - o.c_count;
    o.degenerate = o.c_count == 0 && o.w_count == 0 && o.m_count == 0;
    o.tps = task_performance_score(o, lambda_w, lambda_m);
    return o;
}

// --- Judges --------------------------------------------------------------

int JudgeScore::get(std::string_view d) const {
    if (d == "correctness") return correctness;
    if (d == "relevance") return relevance;
    if (d == "completeness") return completeness;
    if (d == "fluency") return fluency;
    if (d == "faithfulness") return faithfulness;
    throw std::out_of_range("unknown judge dimension " + std::string(d));
}

namespace {

int to_score(double fraction) { return static_cast<int>(std::lround(std::clamp(fraction, 0.0, 1.0) * 10.0)); }

std::set<std::string> content_terms(const std::vector<std::string>& words) {
    std::set<std::string> out;
    for (const auto& w : words)
        if (!text::is_stopword(w)) out.insert(w);
    if (out.empty()) out.insert(words.begin(), words.end());
    return out;
}

double coverage(const std::set<std::string>& wanted, const std::set<std::string>& have) {
    if (wanted.empty()) return 0.0;
    const auto hit = std::count_if(wanted.begin(), wanted.end(), [&](const std::string& w) { return have.count(w) > 0; });
    return static_cast<double>(hit) / static_cast<double>(wanted.size());
}

}  // namespace

JudgeScore StubJudge::judge(std::string_view response, std::string_view reference, const JudgeContext& ctx) const {
    JudgeScore s;
    const auto resp = text::words(response);
    if (resp.empty()) {
        s.rationale = "empty response";
        return s;
    }
    const auto ref = text::words(reference);
    const std::size_t common = lcs<std::string>(resp, ref);
    s.correctness = to_score(2.0 * static_cast<double>(common) / static_cast<double>(resp.size() + ref.size()));
    s.faithfulness = to_score(static_cast<double>(common) / static_cast<double>(resp.size()));

    const std::set<std::string> resp_terms(resp.begin(), resp.end());
    const auto ref_terms = ref.empty() ? std::set<std::string>{} : content_terms(ref);
    const double completeness = coverage(ref_terms, resp_terms);
    s.completeness = to_score(completeness);

    std::set<std::string> query_terms;
    for (const auto& w : content_terms(text::words(ctx.query)))
        if (ref_terms.count(w)) query_terms.insert(w);
    s.relevance = query_terms.empty() ? s.completeness : to_score(coverage(query_terms, resp_terms));
    s.fluency = text::is_valid_utf8(response) ? 10 : 0;

    char buf[160];
    std::snprintf(buf, sizeof buf, "lcs=%zu response_words=%zu reference_words=%zu", common, resp.size(), ref.size());
    s.rationale = buf;
    return s;
}

JudgeScore ModelJudge::judge(std::string_view response, std::string_view reference, const JudgeContext& ctx) const {
    ModelRequest req;
    req.task_id = ctx.task_id;
    req.system_prompt =
        "Rate the response against the reference on correctness, relevance, completeness, fluency and "
        "faithfulness, each an integer from 0 to 10. Reply with only a JSON object with those five keys and a "
        "\"rationale\" string.";
    req.messages.push_back(Message::human("Query:\n" + ctx.query + "\n\nReference:\n" + std::string(reference) +
                                          "\n\nResponse:\n" + std::string(response)));
    const auto reply = model_->complete(req);
    if (!reply.final_answer) throw ProviderError("judge replied with tool calls");
    Json j;
    try {
        const auto& a = *reply.final_answer;
        const auto open = a.find('{');
        const auto close = a.rfind('}');
        if (open == std::string::npos || close == std::string::npos || close < open) throw ProviderError("no JSON");
        j = Json::parse(a.substr(open, close - open + 1));
    } catch (const std::exception& e) {
        throw ProviderError(std::string("judge reply is not a JSON score object: ") + e.what());
    }
    JudgeScore s;
    auto dim = [&](const char* key) {
        if (!j.contains(key) || !j[key].is_number()) throw ProviderError(std::string("judge reply lacks ") + key);
        return std::clamp(static_cast<int>(std::lround(j[key].get<double>())), 0, 10);
    };
    s.correctness = dim("correctness");
    s.relevance = dim("relevance");
    s.completeness = dim("completeness");
    s.fluency = dim("fluency");
    s.faithfulness = dim("faithfulness");
    s.rationale = j.value("rationale", "");
    return s;
}

JudgeContext judge_context(const TaskFixture& f) {
    JudgeContext ctx;
    ctx.task_id = f.task_id;
    for (std::size_t i = 0; i < f.turns.size(); ++i) ctx.query += (i ? "\n" : "") + f.turns[i];
    ctx.metadata = f.metadata;
    return ctx;
}

// --- Aggregation ---------------------------------------------------------

double MetricsReport::partition_sum() const noexcept {
    if (n_tasks == 0) return 0.0;
    return static_cast<double>(n_completed + n_failed + n_incomplete) / static_cast<double>(n_tasks);
}

MetricsReport aggregate(std::span<const TaskOutcome> outcomes, std::span<const std::optional<JudgeScore>> scores,
                        TokenTotals tokens, double lambda_w, double lambda_m) {
    if (outcomes.empty()) throw EmptyInput("aggregate: no task outcomes");
    if (!scores.empty() && scores.size() != outcomes.size())
        throw InvariantViolation("judge-scores", "judge scores are not parallel to outcomes");
    MetricsReport r;
    r.n_tasks = outcomes.size();
    r.lambda_w = lambda_w;
    r.lambda_m = lambda_m;
    double tps_sum = 0.0;
    for (const auto& o : outcomes) {
        switch (o.classification) {
            case Classification::completed: ++r.n_completed; break;
            case Classification::failed: ++r.n_failed; break;
            case Classification::incomplete: ++r.n_incomplete; break;
        }
        tps_sum += o.tps;
        if (o.degenerate) r.degenerate_tasks.push_back(o.task_id);
    }
    const double n = static_cast<double>(r.n_tasks);
    r.tcr = static_cast<double>(r.n_completed) / n;
    r.tfr = static_cast<double>(r.n_failed) / n;
    r.tir = static_cast<double>(r.n_incomplete) / n;
    r.tps_avg = tps_sum / n;

    std::map<std::string, double> sums;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!scores[i]) {
            r.unjudged_tasks.push_back(outcomes[i].task_id);
            continue;
        }
        ++r.n_judged;
        for (auto d : kJudgeDimensions) sums[std::string(d)] += scores[i]->get(d);
    }
    if (r.n_judged > 0)
        for (auto d : kJudgeDimensions)
            r.crcff[std::string(d)] = sums[std::string(d)] / (10.0 * static_cast<double>(r.n_judged));
    r.input_tokens_total = tokens.input;
    r.output_tokens_total = tokens.output;
    return r;
}

Json to_json(const TaskOutcome& o) {
    return {{"task_id", o.task_id}, {"classification", std::string(to_string(o.classification))},
            {"c", o.c_count},       {"w", o.w_count},
            {"m", o.m_count},       {"tps", o.tps},
            {"degenerate", o.degenerate}};
}

Json to_json(const MetricsReport& r) {
    Json crcff = Json::object();
    for (const auto& [k, v] : r.crcff) crcff[k] = v;
    return {{"variant", r.variant},
            {"n_tasks", r.n_tasks},
            {"counts", {{"completed", r.n_completed}, {"failed", r.n_failed}, {"incomplete", r.n_incomplete}}},
            {"tcr", r.tcr},
            {"tfr", r.tfr},
            {"tir", r.tir},
            {"tps_avg", r.tps_avg},
            {"lambda_w", r.lambda_w},
            {"lambda_m", r.lambda_m},
            {"crcff", crcff},
            {"n_judged", r.n_judged},
            {"unjudged_tasks", r.unjudged_tasks},
            {"degenerate_tps_tasks", r.degenerate_tasks},
            {"input_tokens_total", r.input_tokens_total},
            {"output_tokens_total", r.output_tokens_total},
            {"partition_sum", r.partition_sum()}};
}

std::string comparison_table(std::span<const MetricsReport> reports) {
    std::string out =
        "| Variant | Tasks | TCR | TFR | TIR | TPS | Correctness | Relevance | Completeness | Fluency | Faithfulness "
        "| Input tokens | Output tokens | Partition |\n"
        "|---|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|\n";
    char buf[96];
    for (const auto& r : reports) {
        out += "| " + r.variant + " | " + std::to_string(r.n_tasks);
        for (double v : {r.tcr, r.tfr, r.tir, r.tps_avg}) {
            std::snprintf(buf, sizeof buf, " | %.4f", v);
            out += buf;
        }
        for (auto d : kJudgeDimensions) {
            auto it = r.crcff.find(std::string(d));
            if (it == r.crcff.end()) {
                out += " | -";
            } else {
                std::snprintf(buf, sizeof buf, " | %.4f", it->second);
                out += buf;
            }
        }
        std::snprintf(buf, sizeof buf, " | %llu | %llu | %.9f |\n", static_cast<unsigned long long>(r.input_tokens_total),
                      static_cast<unsigned long long>(r.output_tokens_total), r.partition_sum());
        out += buf;
    }
    return out;
}

// --- Ablation ------------------------------------------------------------

std::vector<AblationFlags> standard_variants() { return {kBase, kBaseP, kBasePT, kJenius}; }

std::vector<AblationFlags> parse_variants(std::string_view list) {
    std::vector<AblationFlags> out;
    std::size_t pos = 0;
    while (pos <= list.size()) {
        auto comma = list.find(',', pos);
        if (comma == std::string_view::npos) comma = list.size();
        const auto item = text::trim(list.substr(pos, comma - pos));
        if (item.empty()) throw ConfigError(text::trim(list).empty() ? "no variants given" : "empty entry in variant list");
        const auto f = ablation_from_string(item);
        if (std::find(out.begin(), out.end(), f) != out.end())
            throw ConfigError("variant '" + item + "' listed twice");
        out.push_back(f);
        pos = comma + 1;
    }
    return out;
}

namespace {

struct TaskEval {
    ExecutionTrace trace;
    TaskOutcome outcome;
    std::optional<JudgeScore> score;
};

TaskEval evaluate_one(const TaskFixture& f, const EngineConfig& cfg, const Environment& env,
                      const AblationOptions& opts) {
    TaskEval e;
    try {
        e.trace = run_task(f, cfg, env).trace;
    } catch (const std::exception& ex) {
        // Setup problems for this task still count as a failure, not an aborted sweep.
        e.trace = ExecutionTrace{};
        e.trace.task_id = f.task_id;
        e.trace.error_events.push_back({ErrorClass::provider_error, ex.what()});
    }
    e.outcome = classify_task(f, e.trace, opts.lambda_w, opts.lambda_m);
    if (opts.judge) {
        try {
            e.score = opts.judge->judge(e.trace.final_answer.value_or(""), f.reference_answer, judge_context(f));
        } catch (const std::exception&) {
            e.score.reset();
        }
    }
    return e;
}

}  // namespace

std::vector<VariantResult> run_ablation(std::span<const TaskFixture> fixtures, std::span<const AblationFlags> variants,
                                        const EngineConfig& base, const Environment& env, const AblationOptions& opts) {
    if (fixtures.empty()) throw EmptyInput("run_ablation: no fixtures");
    std::vector<VariantResult> out;
    for (const auto& flags : variants) {
        EngineConfig cfg = base;
        cfg.ablation = flags;
        std::vector<TaskEval> evals(fixtures.size());
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i = next++; i < fixtures.size(); i = next++) evals[i] = evaluate_one(fixtures[i], cfg, env, opts);
        };
        const std::size_t jobs = std::clamp<std::size_t>(opts.jobs, 1, fixtures.size());
        if (jobs == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
            for (auto& t : pool) t.join();
        }

        VariantResult vr;
        vr.flags = flags;
        TokenTotals tokens;
        std::vector<std::optional<JudgeScore>> scores;
        for (auto& e : evals) {
            tokens.input += e.trace.input_tokens;
            tokens.output += e.trace.output_tokens;
            vr.outcomes.push_back(e.outcome);
            if (opts.judge) scores.push_back(e.score);
            vr.traces.push_back(std::move(e.trace));
        }
        vr.report = aggregate(vr.outcomes, scores, tokens, opts.lambda_w, opts.lambda_m);
        vr.report.variant = flags.label();
        out.push_back(std::move(vr));
    }
    return out;
}

}  // namespace agentkit
