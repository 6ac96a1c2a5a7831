#pragma once
// Shared fixtures and independent reference implementations for the test binaries.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "agentkit/agentkit.hpp"

namespace agentkit::testing {

// --- Oracles -------------------------------------------------------------

// Classic O(|R||L|) LCS table; R is an in-order subsequence of L iff LCS == |R|.
inline std::size_t lcs_length(const std::vector<std::string>& r, const std::vector<std::string>& l) {
    std::vector<std::vector<std::size_t>> t(r.size() + 1, std::vector<std::size_t>(l.size() + 1, 0));
    for (std::size_t i = 1; i <= r.size(); ++i)
        for (std::size_t j = 1; j <= l.size(); ++j)
            t[i][j] = r[i - 1] == l[j - 1] ? t[i - 1][j - 1] + 1 : std::max(t[i - 1][j], t[i][j - 1]);
    return t[r.size()][l.size()];
}

inline bool dp_is_subsequence(const std::vector<std::string>& r, const std::vector<std::string>& l) {
    return lcs_length(r, l) == r.size();
}

// Every cut position is tried; the one with the widest gap wins, earliest on ties.
inline std::size_t jump_oracle(const std::vector<double>& s, double min_gap) {
    std::size_t best_cut = s.size();
    double best = -1.0;
    for (std::size_t cut = 1; cut < s.size(); ++cut) {
        const double gap = s[cut - 1] - s[cut];
        if (gap > best) {
            best = gap;
            best_cut = cut;
        }
    }
    return best < min_gap ? s.size() : best_cut;
}

// Normalized deviation of the cumulative curve from the chord between its ends.
inline std::size_t kneedle_oracle(const std::vector<double>& s) {
    const std::size_t n = s.size();
    std::vector<double> clamped(n);
    std::transform(s.begin(), s.end(), clamped.begin(), [](double v) { return v < 0.0 ? 0.0 : v; });
    std::vector<double> cum(n);
    std::partial_sum(clamped.begin(), clamped.end(), cum.begin());
    if (!(cum[n - 1] > 0.0)) return n;
    if (!(cum[n - 1] > cum[0])) return 1;
    std::vector<double> dev(n);
    for (std::size_t i = 0; i < n; ++i)
        dev[i] = (cum[i] - cum[0]) / (cum[n - 1] - cum[0]) - static_cast<double>(i) / static_cast<double>(n - 1);
    const auto it = std::max_element(dev.begin(), dev.end());  // first maximum
    if (*it <= 1e-12) return n;
    return static_cast<std::size_t>(it - dev.begin()) + 1;
}

inline std::vector<double> random_descending(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(-0.2, 1.0);
    std::vector<double> s(n);
    for (auto& v : s) v = u(rng);
    // Occasional plateaus and cliffs so ties and large drops both occur.
    std::bernoulli_distribution tie(0.15);
    std::sort(s.begin(), s.end(), std::greater<>());
    for (std::size_t i = 1; i < n; ++i)
        if (tie(rng)) s[i] = s[i - 1];
    return s;
}

// --- Builders ------------------------------------------------------------

inline ToolSchema simple_tool(std::string name, std::string description,
                              ToolCategory category = ToolCategory::information_retrieval) {
    ToolSchema t;
    t.tool_name = std::move(name);
    t.category = category;
    t.description = std::move(description);
    t.enriched_description = t.description;
    t.parameters = {ParameterSpec{"query", ParamType::string, true, ""}};
    t.output_description = "text";
    return t;
}

inline ToolCallRequest call_of(std::string id, std::string tool, Json args = Json::object()) {
    return ToolCallRequest{std::move(id), std::move(tool), std::move(args)};
}

// H, (AI-call, Tool)^k, AI with ids unique within the session.
inline std::vector<Message> canonical_turn(std::size_t k, const std::string& tag = "t") {
    std::vector<Message> out;
    out.push_back(Message::human("question " + tag, 2));
    for (std::size_t i = 0; i < k; ++i) {
        const std::string id = tag + "-c" + std::to_string(i);
        out.push_back(Message::ai("", {call_of(id, "lookup", Json{{"q", i}})}, 3));
        out.push_back(Message::tool(id, "result " + std::to_string(i), 2));
    }
    out.push_back(Message::ai("answer " + tag, {}, 2));
    return out;
}

inline Session session_of(std::vector<Message> msgs) {
    Session s;
    s.messages = std::move(msgs);
    return s;
}

// Messages of `repaired` that are not synthetic, in order.
inline std::vector<Message> originals(const Session& repaired) {
    std::vector<Message> out;
    for (const auto& m : repaired.messages)
        if (!m.synthetic) out.push_back(m);
    return out;
}

inline std::shared_ptr<ToolHost> host_from(const std::vector<RegistryEntry>& entries) {
    auto h = std::make_shared<ToolHost>();
    populate_mock_host(*h, entries);
    return h;
}

inline std::filesystem::path bundled(const std::string& rel) { return default_data_dir() / rel; }

// Plausible argument values for the bundled registry, by parameter name then type.
inline Json sample_arguments(const ToolSchema& s) {
    static const std::map<std::string, Json> by_name{
        {"city", "Paris"},       {"date", "2024-05-01"},     {"check_in", "2024-05-01"},
        {"nights", 2},           {"amount", 10},             {"value", 5},
        {"path", "a.txt"},       {"url", "http://example.org/x"}, {"target_language", "fr"},
        {"kind", "bar"},         {"style", "photo"},         {"slides", 5},
        {"values", "1,2,3"},     {"to", "a@example.org"},    {"from_currency", "USD"},
        {"to_currency", "EUR"},  {"symbol", "ACME"},         {"origin", "Berlin"},
        {"destination", "Rome"}, {"from_unit", "km"},        {"to_unit", "mi"},
    };
    Json args = Json::object();
    for (const auto& p : s.parameters) {
        if (!p.required) continue;
        if (auto it = by_name.find(p.name); it != by_name.end()) {
            args[p.name] = it->second;
            continue;
        }
        switch (p.type) {
            case ParamType::integer: args[p.name] = 1; break;
            case ParamType::number: args[p.name] = 1.5; break;
            case ParamType::boolean: args[p.name] = true; break;
            case ParamType::url: args[p.name] = "http://example.org"; break;
            case ParamType::date: args[p.name] = "2024-01-02"; break;
            case ParamType::object: args[p.name] = Json::object(); break;
            case ParamType::array: args[p.name] = Json::array(); break;
            case ParamType::string: args[p.name] = "sample " + p.name; break;
        }
    }
    return args;
}

}  // namespace agentkit::testing
