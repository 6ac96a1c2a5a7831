#include <gtest/gtest.h>

#include <thread>

#include "support.hpp"

using namespace agentkit;
using namespace agentkit::testing;

namespace {

ToolSchema booking() {
    ToolSchema s;
    s.tool_name = "reserve_hotel";
    s.description = "Reserve a hotel";
    s.category = ToolCategory::other;
    s.parameters = {{"city", ParamType::string, true, "nonempty"},
                    {"nights", ParamType::integer, true, "min=1;max=30"},
                    {"check_in", ParamType::date, true, ""},
                    {"site", ParamType::url, false, ""},
                    {"tier", ParamType::string, false, "one_of=basic|suite"},
                    {"code", ParamType::string, false, "pattern=[A-Z]{3}"}};
    return s;
}

class Throwing final : public ToolExecutor {
public:
    std::string execute(const Arguments&) override { throw std::runtime_error("boom"); }
};

class Classified final : public ToolExecutor {
public:
    std::string execute(const Arguments&) override { throw ToolFailure(ErrorClass::transient_network, "flaky"); }
};

class Slow final : public ToolExecutor {
public:
    std::string execute(const Arguments&) override {
        std::this_thread::sleep_for(std::chrono::milliseconds(30));
        return "late";
    }
};

Json good_args() { return Json{{"city", "Rome"}, {"nights", 2}, {"check_in", "2024-06-10"}}; }

}  // namespace

TEST(Validation, AcceptsWellFormedArguments) {
    EXPECT_TRUE(validate_arguments(booking(), good_args()).ok);
    auto a = good_args();
    a["site"] = "https://example.org/h?id=1";
    a["tier"] = "suite";
    a["code"] = "ABC";
    EXPECT_TRUE(validate_arguments(booking(), a).ok);
}

TEST(Validation, RejectionReasonsNameTheProblem) {
    auto a = good_args();
    a.erase("city");
    EXPECT_EQ(validate_arguments(booking(), a).reason.rfind("missing: city", 0), 0u);
    a = good_args();
    a["zz"] = 1;
    EXPECT_EQ(validate_arguments(booking(), a).reason.rfind("unknown: zz", 0), 0u);
    for (auto [key, val] : std::vector<std::pair<std::string, Json>>{{"nights", 0},
                                                                      {"nights", "two"},
                                                                      {"city", ""},
                                                                      {"check_in", "10/06/2024"},
                                                                      {"site", "not a url"},
                                                                      {"tier", "penthouse"},
                                                                      {"code", "abc"}}) {
        a = good_args();
        a[key] = val;
        const auto r = validate_arguments(booking(), a);
        EXPECT_FALSE(r.ok) << key << "=" << val.dump();
        EXPECT_EQ(r.reason.rfind("invalid: " + key, 0), 0u) << r.reason;
    }
    EXPECT_FALSE(validate_arguments(booking(), Json::array()).ok);
}

TEST(Schema, CanonicalOrderAndChecks) {
    auto s = booking();
    std::rotate(s.parameters.begin(), s.parameters.begin() + 3, s.parameters.end());
    const auto canon = s.canonical_parameters();
    EXPECT_EQ(canon[0].name, "city");
    EXPECT_EQ(canon[2].name, "check_in");
    EXPECT_EQ(canon[3].name, "site");
    EXPECT_EQ(schema_from_json(to_json(booking())), booking());

    auto e = booking();
    e.cost_class = CostClass::expensive;
    EXPECT_THROW(check_schema(e), InvalidSchema);  // expensive needs a confirmation prompt
    e.confirmation_prompt = "Sure?";
    EXPECT_NO_THROW(check_schema(e));
    auto dup = booking();
    dup.parameters.push_back(dup.parameters.front());
    EXPECT_THROW(check_schema(dup), InvalidSchema);
}

TEST(ToolHost, RegisterInvokeAndClassifyFailures) {
    ToolHost host;
    host.register_tool(booking(), std::make_shared<TemplateExecutor>("booked {{city}} x{{nights}}"));
    EXPECT_THROW(host.register_tool(booking(), std::make_shared<TemplateExecutor>("")), DuplicateName);
    host.register_tool(simple_tool("crash", "c"), std::make_shared<Throwing>());
    host.register_tool(simple_tool("flaky", "f"), std::make_shared<Classified>());
    EXPECT_EQ(host.size(), 3u);

    auto v = host.validate(call_of("1", "reserve_hotel", good_args()));
    ASSERT_TRUE(std::holds_alternative<ValidatedCall>(v));
    const auto r = host.invoke(std::get<ValidatedCall>(v));
    EXPECT_TRUE(r.ok());
    EXPECT_EQ(r.content, "booked Rome x2");
    EXPECT_EQ(r.call_id, "1");
    EXPECT_GT(r.content_tokens, 0u);

    const auto crash = host.invoke(std::get<ValidatedCall>(host.validate(call_of("2", "crash", Json{{"query", "x"}}))));
    EXPECT_EQ(crash.error, ErrorClass::tool_crash);
    const auto flaky = host.invoke(std::get<ValidatedCall>(host.validate(call_of("3", "flaky", Json{{"query", "x"}}))));
    EXPECT_EQ(flaky.error, ErrorClass::transient_network);

    const auto unknown = host.validate(call_of("4", "ghost"));
    ASSERT_TRUE(std::holds_alternative<ValidationResult>(unknown));
    EXPECT_EQ(std::get<ValidationResult>(unknown).reason, "unknown tool: ghost");
}

TEST(ToolHost, ExpensiveToolsNeedConfirmation) {
    auto s = simple_tool("generate_ppt", "slides");
    s.cost_class = CostClass::expensive;
    s.confirmation_prompt = "Costly. Proceed?";
    ToolHost host;
    host.register_tool(s, std::make_shared<TemplateExecutor>("deck"));
    const auto vc = std::get<ValidatedCall>(host.validate(call_of("1", "generate_ppt", Json{{"query", "x"}})));
    const auto refused = host.invoke(vc);
    EXPECT_EQ(refused.error, ErrorClass::invalid_arguments);
    EXPECT_NE(refused.content.find("Costly. Proceed?"), std::string::npos);
    EXPECT_TRUE(host.invoke(vc.with_confirmation()).ok());
}

TEST(ToolHost, SlowCallsTimeOut) {
    ToolHost host;
    host.register_tool(simple_tool("slow", "s"), std::make_shared<Slow>());
    host.set_timeout(std::chrono::milliseconds(5));
    const auto r = host.invoke(std::get<ValidatedCall>(host.validate(call_of("1", "slow", Json{{"query", "x"}}))));
    EXPECT_EQ(r.error, ErrorClass::timeout);
}

TEST(FaultInjection, ReplaysScriptThenPassesThrough) {
    ToolHost host;
    host.register_tool(simple_tool("probe", "p"), std::make_shared<TemplateExecutor>("pong"));
    InProcessTransport inner(host);
    FaultInjectingTransport t(inner, Json{{"probe", {"timeout", "ok", "tool_crash"}}});
    const auto vc = std::get<ValidatedCall>(host.validate(call_of("1", "probe", Json{{"query", "x"}})));
    EXPECT_EQ(t.call(vc).error, ErrorClass::timeout);
    EXPECT_TRUE(t.call(vc).ok());
    EXPECT_EQ(t.call(vc).error, ErrorClass::tool_crash);
    EXPECT_TRUE(t.call(vc).ok());
    EXPECT_THROW(FaultInjectingTransport(inner, Json{{"probe", {"meltdown"}}}), ConfigError);
}

TEST(Registry, ParsesBundledFileAndRejectsBadInput) {
    const auto entries = load_registry(bundled("registry.jsonl"));
    EXPECT_EQ(entries.size(), 120u);
    std::size_t expensive = 0;
    for (const auto& e : entries) {
        EXPECT_TRUE(e.mock_response.has_value()) << e.schema.tool_name;
        expensive += e.schema.cost_class == CostClass::expensive;
    }
    EXPECT_EQ(expensive, 1u);
    const std::string line = R"({"tool_name":"a","category":"other","description":"d","parameters":[]})";
    EXPECT_THROW(parse_registry(line + "\n" + line), DuplicateName);
    EXPECT_THROW(parse_registry(R"({"tool_name":"a","category":"weird","description":"d"})"), InvalidSchema);
    EXPECT_THROW(parse_registry("{oops"), MalformedRecord);
}
