#include <gtest/gtest.h>

#include <fstream>

#include "support.hpp"

using namespace agentkit;
using namespace agentkit::testing;

namespace {

std::function<const char*(const char*)> env_of(std::map<std::string, std::string> vars) {
    return [vars = std::move(vars)](const char* name) -> const char* {
        auto it = vars.find(name);
        return it == vars.end() ? nullptr : it->second.c_str();
    };
}

std::filesystem::path write_temp(const std::string& name, const std::string& body) {
    const auto p = std::filesystem::temp_directory_path() / name;
    std::ofstream(p) << body;
    return p;
}

}  // namespace

TEST(Config, EnvNames) {
    EXPECT_EQ(env_name_for("engine.max_iterations"), "AGENTKIT_ENGINE_MAX_ITERATIONS");
    EXPECT_EQ(env_name_for("memory.summarizer.provider"), "AGENTKIT_MEMORY_SUMMARIZER_PROVIDER");
}

TEST(Config, LayersApplyInPrecedenceOrder) {
    const auto file = write_temp("agentkit_cfg_layers.json",
                                 R"({"engine": {"max_iterations": 7}, "retrieval.top_m": 20, "eval": {"jobs": 2}})");
    Config c;
    EXPECT_EQ(c.get_int("engine.max_iterations"), 12);
    c.merge_file(file);
    EXPECT_EQ(c.get_int("engine.max_iterations"), 7);
    EXPECT_EQ(c.get_int("retrieval.top_m"), 20);
    c.merge_env(env_of({{"AGENTKIT_ENGINE_MAX_ITERATIONS", "9"}, {"AGENTKIT_EVAL_LAMBDA_W", "0.5"}}));
    EXPECT_EQ(c.get_int("engine.max_iterations"), 9);
    EXPECT_DOUBLE_EQ(c.get_real("eval.lambda_w"), 0.5);
    c.set("engine.max_iterations", "3");
    EXPECT_EQ(c.get_int("engine.max_iterations"), 3);
    EXPECT_EQ(c.get_int("retrieval.top_m"), 20);  // untouched by later layers
    EXPECT_EQ(c.get_int("eval.jobs"), 2);
    std::filesystem::remove(file);
}

TEST(Config, ValuesAreTypeChecked) {
    Config c;
    EXPECT_THROW(c.set("engine.max_iterations", "many"), ConfigError);
    EXPECT_THROW(c.set("engine.max_iterations", "2.5"), ConfigError);
    EXPECT_THROW(c.set("engine.auto_confirm", "maybe"), ConfigError);
    EXPECT_THROW(c.set("eval.lambda_w", "abc"), ConfigError);
    EXPECT_THROW(c.set("no.such.key", "1"), ConfigError);
    EXPECT_THROW(c.merge_json(Json{{"engine", {{"max_iterations", "12"}}}}, "test"), ConfigError);
    EXPECT_THROW(c.merge_json(Json{{"bogus", 1}}, "test"), ConfigError);
    EXPECT_THROW(c.merge_json(Json::array(), "test"), ConfigError);
    EXPECT_THROW(c.merge_env(env_of({{"AGENTKIT_MODEL_TIMEOUT_MS", "soon"}})), ConfigError);
    c.set("engine.auto_confirm", "false");
    EXPECT_FALSE(c.get_bool("engine.auto_confirm"));
    c.set("eval.lambda_m", "2");
    EXPECT_DOUBLE_EQ(c.get_real("eval.lambda_m"), 2.0);
    EXPECT_THROW(c.get("no.such.key"), ConfigError);
}

TEST(Config, BadFilesAreReported) {
    Config c;
    EXPECT_THROW(c.merge_file("/nonexistent/agentkit.json"), Error);
    const auto broken = write_temp("agentkit_cfg_broken.json", "{not json");
    EXPECT_THROW(c.merge_file(broken), Error);
    std::filesystem::remove(broken);
}

TEST(Config, SecretsAreNeverPrinted) {
    Config c;
    c.set("model.api_key", "sk-secret-value");
    EXPECT_EQ(c.get_text("model.api_key"), "sk-secret-value");
    const auto j = c.to_json();
    EXPECT_FALSE(j.contains("model.api_key"));
    EXPECT_FALSE(j.contains("embedding.api_key"));
    EXPECT_EQ(j.dump().find("sk-secret"), std::string::npos);
    for (const auto& k : known_config_keys())
        if (!k.secret) EXPECT_TRUE(j.contains(k.key)) << k.key;
}

TEST(Config, JsonRoundTrip) {
    Config a;
    a.set("retrieval.jump_min_gap", "0.125");
    a.set("tools.registry", "x.jsonl");
    Config b;
    b.merge_json(a.to_json(), "roundtrip");
    EXPECT_EQ(a.to_json(), b.to_json());
}

TEST(Config, EngineConfigMapping) {
    Config c;
    c.set("engine.max_iterations", "6");
    c.set("engine.retry.timeout", "0");
    c.set("engine.retry.tool_crash", "1");
    c.set("engine.ablation.memory", "false");
    c.set("memory.summarize_threshold", "12");
    const auto e = engine_config_from(c);
    EXPECT_EQ(e.max_iterations, 6u);
    EXPECT_EQ(e.retry_limits.count(ErrorClass::timeout), 0u);
    EXPECT_EQ(e.retry_limits.at(ErrorClass::tool_crash), 1u);
    EXPECT_EQ(e.retry_limits.at(ErrorClass::transient_network), 2u);
    EXPECT_EQ(e.ablation, kBasePT);
    EXPECT_EQ(e.memory.summarize_threshold, 12u);
    c.set("memory.compression_target", "0");
    EXPECT_THROW(engine_config_from(c), ConfigError);
}

TEST(App, DefaultsBuildOfflineProviders) {
    const auto app = App::build(Config{});
    EXPECT_EQ(app->tools().size(), load_registry(bundled("registry.jsonl")).size());
    EXPECT_NE(app->describe().find("model="), std::string::npos);
    ASSERT_NE(app->judge(), nullptr);
    EXPECT_EQ(app->judge()->name(), "stub");
    Config remote;
    remote.set("tools.server", "nohostport");
    EXPECT_THROW(App::build(remote), ConfigError);
}
