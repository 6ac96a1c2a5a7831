#include <gtest/gtest.h>

#include "support.hpp"

using namespace agentkit;
using namespace agentkit::testing;

TEST(HashingEmbedder, UnitNormDeterministicOrderFree) {
    HashingEmbedder e(256);
    const auto a = e.embed("book a flight to Rome");
    EXPECT_EQ(a.dimension(), 256u);
    EXPECT_NEAR(a.norm(), 1.0, 1e-12);
    EXPECT_EQ(a, e.embed("book a flight to Rome"));
    EXPECT_EQ(a, e.embed("Rome to flight a BOOK"));
    EXPECT_NEAR(e.embed("!!!").norm(), 1.0, 1e-12);
}

TEST(Cosine, IdenticalOrthogonalAndErrors) {
    EmbeddingVector a{{1, 0, 0}}, b{{0, 2, 0}}, c{{3, 0, 0}}, z{{0, 0, 0}}, short_{{1, 0}};
    EXPECT_DOUBLE_EQ(cosine_similarity(a, c), 1.0);
    EXPECT_DOUBLE_EQ(cosine_similarity(a, b), 0.0);
    EXPECT_THROW(cosine_similarity(a, z), ZeroVector);
    EXPECT_THROW(cosine_similarity(a, short_), DimensionMismatch);
}

TEST(RankTopM, SortsByScoreThenName) {
    EmbeddingVector q{{1, 0}};
    std::vector<std::pair<std::string, EmbeddingVector>> tools{
        {"b", {{1, 0}}}, {"a", {{1, 0}}}, {"c", {{0, 1}}}, {"d", {{0.6, 0.8}}}};
    RetrievalConfig cfg;
    cfg.top_m = 3;
    const auto r = rank_top_m(q, tools, cfg);
    ASSERT_EQ(r.size(), 3u);
    EXPECT_EQ(r[0].tool_name, "a");
    EXPECT_EQ(r[1].tool_name, "b");
    EXPECT_EQ(r[2].tool_name, "d");
}

TEST(DetectJump, Examples) {
    const std::vector<double> s{0.9, 0.88, 0.5, 0.48, 0.1};
    EXPECT_EQ(detect_jump(s, 0.05), 2u);
    const std::vector<double> tie{0.9, 0.7, 0.5};
    EXPECT_EQ(detect_jump(tie, 0.05), 1u);
    const std::vector<double> flat{0.5, 0.49, 0.48};
    EXPECT_EQ(detect_jump(flat, 0.05), 3u);
    const std::vector<double> one{0.5};
    EXPECT_THROW(detect_jump(one, 0.05), TooFewScores);
}

TEST(DetectKneedle, Examples) {
    const std::vector<double> equal(8, 0.4);
    EXPECT_EQ(detect_kneedle(equal), 8u);
    const std::vector<double> elbow{0.9, 0.85, 0.8, 0.1, 0.05, 0.05, 0.04, 0.02};
    EXPECT_EQ(detect_kneedle(elbow), 3u);
    const std::vector<double> first_only{0.9, 0.0, 0.0, 0.0};
    EXPECT_EQ(detect_kneedle(first_only), 1u);
    const std::vector<double> nonpositive{-0.1, -0.2, -0.3};
    EXPECT_EQ(detect_kneedle(nonpositive), 3u);
    const std::vector<double> two{0.5, 0.4};
    EXPECT_THROW(detect_kneedle(two), TooFewScores);
}

TEST(Cutoffs, AgreeWithOraclesOnRandomLists) {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 2000; ++i) {
        const auto s = random_descending(rng, 3 + rng() % 80);
        ASSERT_EQ(detect_kneedle(s), kneedle_oracle(s));
        ASSERT_EQ(detect_jump(s, 0.05), jump_oracle(s, 0.05));
    }
}

TEST(FinalCutoff, FloorAndCap) {
    EXPECT_EQ(final_cutoff(3, 5, 10, 50), 10u);
    EXPECT_EQ(final_cutoff(30, 12, 10, 50), 12u);
    EXPECT_EQ(final_cutoff(3, 5, 10, 6), 6u);
    EXPECT_EQ(final_cutoff(2, 2, 10, 2), 2u);
}

TEST(RetrievalConfig, RejectsOutOfRange) {
    RetrievalConfig c;
    c.top_m = 0;
    EXPECT_THROW(check_retrieval_config(c), ConfigError);
    c = {};
    c.jump_min_gap = -1;
    EXPECT_THROW(check_retrieval_config(c), ConfigError);
}

TEST(ToolIndex, SelectRespectsAllowListAndFindsRelevantTool) {
    std::vector<ToolSchema> tools;
    for (int i = 0; i < 30; ++i) tools.push_back(simple_tool("filler_" + std::to_string(i), "generic helper"));
    tools.push_back(simple_tool("get_weather", "weather forecast temperature rain for a city"));
    const ToolIndex index(tools, std::make_shared<HashingEmbedder>());
    const auto cut = index.select("what is the weather forecast in Oslo", RetrievalConfig{});
    ASSERT_FALSE(cut.retained.empty());
    EXPECT_EQ(cut.retained.front().tool_name, "get_weather");
    EXPECT_GE(cut.n_final, 10u);

    const std::vector<std::string> allowed{"filler_1", "filler_2"};
    const auto only = index.select("weather", RetrievalConfig{}, &allowed);
    ASSERT_EQ(only.retained.size(), 2u);
    for (const auto& r : only.retained) EXPECT_NE(r.tool_name, "get_weather");
    EXPECT_NE(index.find("get_weather"), nullptr);
    EXPECT_EQ(index.find("nope"), nullptr);
}

TEST(ToolIndex, EmptyIndexIsAnError) {
    const ToolIndex index({}, std::make_shared<HashingEmbedder>());
    EXPECT_THROW(select_tools("anything", index, RetrievalConfig{}), EmptyInput);
}

TEST(ToolIndex, QueryRewriterIsApplied) {
    std::vector<ToolSchema> tools{simple_tool("alpha", "alpha things"), simple_tool("beta", "beta things")};
    ToolIndex index(tools, std::make_shared<HashingEmbedder>());
    index.set_query_rewriter([](std::string_view) { return std::string("beta"); });
    EXPECT_EQ(index.rank("alpha", RetrievalConfig{}).front().tool_name, "beta");
}
