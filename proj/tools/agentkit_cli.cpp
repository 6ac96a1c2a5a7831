// agentkit: run tasks, evaluate ablation variants, inspect traces, manage the tool registry.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "agentkit/app.hpp"
#include "agentkit/errors.hpp"

namespace ak = agentkit;

namespace {

// Documented in README.md.
enum Exit : int {
    kOk = 0,
    kUsage = 2,
    kConfig = 3,
    kInputFile = 4,
    kInvalidData = 5,
    kProviderSetup = 6,
    kRuntimeIo = 7,
};

struct Failure {
    int code;
    std::string message;
};

[[noreturn]] void fail(int code, std::string message) { throw Failure{code, std::move(message)}; }

std::string slug(std::string label) {
    for (auto& c : label) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return label;
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(kRuntimeIo, "cannot write " + path.string());
    out << bytes;
    if (!out) fail(kRuntimeIo, "write failed: " + path.string());
}

std::vector<ak::TaskFixture> read_fixtures(const std::string& path) {
    if (!std::filesystem::exists(path)) fail(kInputFile, "fixture file not found: " + path);
    try {
        return ak::load_fixtures(path);
    } catch (const ak::IoError& e) {
        fail(kInputFile, e.what());
    } catch (const ak::Error& e) {
        fail(kInvalidData, e.what());
    }
}

std::unique_ptr<ak::App> build_app(const ak::Config& cfg) {
    try {
        return ak::App::build(cfg);
    } catch (const ak::ConfigError& e) {
        fail(kConfig, e.what());
    } catch (const ak::MalformedRecord& e) {
        fail(kInvalidData, std::string("registry: ") + e.what());
    } catch (const ak::InvalidSchema& e) {
        fail(kInvalidData, std::string("registry: ") + e.what());
    } catch (const ak::DuplicateName& e) {
        fail(kInvalidData, std::string("registry: ") + e.what());
    } catch (const ak::Error& e) {
        fail(kProviderSetup, e.what());
    }
}

void check_against_registry(const std::vector<ak::TaskFixture>& fixtures, const ak::App& app) {
    const auto problems = ak::fixture_registry_problems(fixtures, app.tools());
    if (problems.empty()) return;
    std::string msg = "fixtures reference tools missing from the registry:";
    for (const auto& p : problems) msg += "\n  " + p;
    fail(kInvalidData, msg);
}

std::string clip(std::string s, std::size_t n = 96) {
    for (auto& c : s)
        if (c == '\n') c = ' ';
    if (s.size() > n) s = s.substr(0, n - 3) + "...";
    return s;
}

// --- run -----------------------------------------------------------------

struct RunOpts {
    std::string fixture;
    std::string query;
    std::string task;
    std::string trace_out = "trace.jsonl";
};

int cmd_run(const ak::Config& cfg, const RunOpts& o) {
    ak::TaskFixture fixture;
    if (!o.fixture.empty()) {
        auto all = read_fixtures(o.fixture);
        if (all.empty()) fail(kInvalidData, "no fixtures in " + o.fixture);
        if (!o.task.empty()) {
            auto it = std::find_if(all.begin(), all.end(), [&](const ak::TaskFixture& f) { return f.task_id == o.task; });
            if (it == all.end()) fail(kInvalidData, "task '" + o.task + "' not in " + o.fixture);
            fixture = *it;
        } else if (all.size() == 1) {
            fixture = all.front();
        } else {
            fail(kUsage, o.fixture + " holds " + std::to_string(all.size()) + " fixtures; pick one with --task");
        }
    } else {
        fixture.task_id = "query";
        fixture.turns = {o.query};
    }
    auto app = build_app(cfg);
    check_against_registry({fixture}, *app);

    ak::RunResult r;
    try {
        r = ak::run_task(fixture, app->engine(), app->env());
    } catch (const ak::FixtureError& e) {
        fail(kInvalidData, e.what());
    }
    write_file(o.trace_out, ak::serialize_trace(r.trace));

    const auto outcome = ak::classify_task(fixture, r.trace);
    std::cout << fixture.task_id << " [" << app->engine().ablation.label() << "] "
              << ak::to_string(outcome.classification) << " invoked=" << r.trace.invoked.size()
              << " errors=" << r.trace.error_events.size() << " input_tokens=" << r.trace.input_tokens
              << " output_tokens=" << r.trace.output_tokens << " summaries=" << r.summarizations << "\n";
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
    if (r.trace.final_answer) std::cout << "answer: " << *r.trace.final_answer << "\n";
    std::cout << "trace written to " << o.trace_out << "\n";
    return kOk;
}

// --- eval ----------------------------------------------------------------

struct EvalOpts {
    std::string fixtures;
    std::string variants = "base,bp,bpt,full";
    std::string report_dir = "reports";
};

int cmd_eval(const ak::Config& cfg, const EvalOpts& o) {
    const auto fixtures = read_fixtures(o.fixtures);
    if (fixtures.empty()) fail(kInvalidData, "no fixtures in " + o.fixtures);
    std::vector<ak::AblationFlags> variants;
    try {
        variants = ak::parse_variants(o.variants);
    } catch (const ak::ConfigError& e) {
        fail(kUsage, e.what());
    }
    auto app = build_app(cfg);
    check_against_registry(fixtures, *app);

    ak::AblationOptions opts;
    opts.lambda_w = cfg.get_real("eval.lambda_w");
    opts.lambda_m = cfg.get_real("eval.lambda_m");
    opts.jobs = static_cast<std::size_t>(std::max<long long>(1, cfg.get_int("eval.jobs")));
    opts.judge = app->judge();
    if (!(opts.lambda_w > 0.0 && opts.lambda_m > 0.0)) fail(kConfig, "eval.lambda_w and eval.lambda_m must be positive");

    const auto results = ak::run_ablation(fixtures, variants, app->engine(), app->env(), opts);

    const std::filesystem::path dir = o.report_dir;
    std::error_code ec;
    std::filesystem::create_directories(dir / "traces", ec);
    if (ec) fail(kRuntimeIo, "cannot create " + (dir / "traces").string() + ": " + ec.message());
    std::vector<ak::MetricsReport> reports;
    for (const auto& v : results) {
        ak::Json j = ak::to_json(v.report);
        ak::Json tasks = ak::Json::array();
        for (const auto& t : v.outcomes) tasks.push_back(ak::to_json(t));
        j["tasks"] = std::move(tasks);
        const auto name = slug(v.report.variant);
        write_file(dir / (name + ".json"), j.dump(2) + "\n");
        write_file(dir / "traces" / (name + ".jsonl"), ak::serialize_traces(v.traces));
        reports.push_back(v.report);

        char line[256];
        std::snprintf(line, sizeof line,
                      "%-7s tasks=%zu TCR=%.4f TFR=%.4f TIR=%.4f TPS=%.4f input_tokens=%llu partition=%.9f\n",
                      v.report.variant.c_str(), v.report.n_tasks, v.report.tcr, v.report.tfr, v.report.tir,
                      v.report.tps_avg, static_cast<unsigned long long>(v.report.input_tokens_total),
                      v.report.partition_sum());
        std::cout << line;
    }
    write_file(dir / "comparison.md", ak::comparison_table(reports));
    std::cout << "reports written to " << dir.string() << "\n";
    return kOk;
}

// --- inspect -------------------------------------------------------------

int cmd_inspect(const std::string& path) {
    if (!std::filesystem::exists(path)) fail(kInputFile, "trace file not found: " + path);
    std::vector<ak::ExecutionTrace> traces;
    try {
        traces = ak::load_traces(path);
    } catch (const ak::IoError& e) {
        fail(kInputFile, e.what());
    } catch (const ak::Error& e) {
        fail(kInvalidData, path + ": " + e.what());
    }
    for (const auto& t : traces) {
        std::string status = "FINISHED";
        if (t.invoked.empty() && t.error_events.empty()) status = "FAILED (no tool invoked)";
        if (!t.error_events.empty()) status = "FAILED (" + std::string(ak::to_string(t.error_events.front().error_class)) + ")";
        std::cout << "task " << t.task_id << "  " << status << "  input_tokens=" << t.input_tokens
                  << "  output_tokens=" << t.output_tokens << "\n";
        for (std::size_t i = 0; i < t.invoked.size(); ++i) {
            const auto& inv = t.invoked[i];
            std::cout << "  step " << i + 1 << "  " << inv.tool_name << " " << clip(inv.arguments.dump(), 72) << "  "
                      << (inv.outcome == ak::Outcome::ok ? "ok" : "error") << "\n";
        }
        for (const auto& e : t.error_events)
            std::cout << "  error  " << ak::to_string(e.error_class) << ": " << clip(e.detail) << "\n";
        if (t.final_answer) std::cout << "  answer " << clip(*t.final_answer) << "\n";
        if (t.session) {
            std::size_t repaired = 0;
            for (const auto& m : t.session->messages) repaired += m.synthetic ? 1 : 0;
            std::cout << "  session " << t.session->messages.size() << " messages, " << repaired << " repaired\n";
            for (std::size_t i = 0; i < t.session->messages.size(); ++i) {
                const auto& m = t.session->messages[i];
                std::string extra;
                for (const auto& c : m.tool_calls) extra += " -> " + c.tool_name;
                std::cout << "    [" << i << "] " << ak::to_string(m.role) << extra << "  " << clip(m.content, 64)
                          << "  (" << m.token_count << " tok)" << (m.synthetic ? "  REPAIRED (synthetic)" : "") << "\n";
            }
        }
    }
    return kOk;
}

// --- tools ---------------------------------------------------------------

int cmd_tools_list(const ak::Config& cfg, bool as_json) {
    auto app = build_app(cfg);
    for (const auto& t : app->tools()) {
        if (as_json) {
            std::cout << ak::to_json(t).dump() << "\n";
            continue;
        }
        std::cout << t.tool_name << "  [" << ak::to_string(t.category) << "]"
                  << (t.cost_class == ak::CostClass::expensive ? " [expensive]" : "") << "  " << clip(t.description, 72)
                  << "\n";
    }
    if (!as_json) std::cout << app->tools().size() << " tools\n";
    return kOk;
}

int cmd_tools_validate(const std::string& path) {
    if (!std::filesystem::exists(path)) fail(kInputFile, "registry not found: " + path);
    std::vector<ak::RegistryEntry> entries;
    try {
        entries = ak::load_registry(path);
    } catch (const ak::IoError& e) {
        fail(kInputFile, e.what());
    } catch (const ak::Error& e) {
        fail(kInvalidData, path + ": " + e.what());
    }
    std::size_t expensive = 0;
    for (const auto& e : entries) expensive += e.schema.cost_class == ak::CostClass::expensive ? 1 : 0;
    std::cout << path << ": " << entries.size() << " tools valid (" << expensive << " expensive)\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App cli{"agentkit: tool-using agent runner and evaluation harness"};
    cli.set_version_flag("--version", "agentkit 0.1.0");

    std::string config_path;
    std::vector<std::string> sets;
    bool show_config = false;
    std::string registry, profile, tool_server, ablation;
    cli.add_option("--config", config_path, "JSON config file");
    cli.add_option("--set", sets, "Override a config key: key=value (repeatable)");
    cli.add_flag("--show-config", show_config, "Print the resolved config and exit");
    cli.add_option("--registry", registry, "Tool registry file (tools.registry)");
    cli.add_option("--profile", profile, "Agent profile file (prompt.profile)");
    cli.add_option("--tool-server", tool_server, "Use a tool server at host:port (tools.server)");
    cli.add_option("--ablation", ablation, "Variant for run: base, bp, bpt, full");

    RunOpts run;
    auto* run_cmd = cli.add_subcommand("run", "Run one task and write its trace");
    auto* fix_opt = run_cmd->add_option("--fixture", run.fixture, "Fixture file");
    auto* query_opt = run_cmd->add_option("--query", run.query, "Inline single-turn query");
    fix_opt->excludes(query_opt);
    run_cmd->add_option("--task", run.task, "Task id within the fixture file");
    run_cmd->add_option("--trace-out", run.trace_out, "Trace output file")->capture_default_str();

    EvalOpts eval;
    std::optional<double> lambda_w, lambda_m;
    std::optional<long long> jobs;
    std::string judge;
    auto* eval_cmd = cli.add_subcommand("eval", "Evaluate fixtures under several variants");
    eval_cmd->add_option("--fixtures", eval.fixtures, "Fixture file")->required();
    eval_cmd->add_option("--variants", eval.variants, "Comma-separated variants")->capture_default_str();
    eval_cmd->add_option("--lambda-w", lambda_w, "Weight of wrong tool calls");
    eval_cmd->add_option("--lambda-m", lambda_m, "Weight of missing tool calls");
    eval_cmd->add_option("--judge", judge, "stub, remote or none")->check(CLI::IsMember({"stub", "remote", "none"}));
    eval_cmd->add_option("--report-dir", eval.report_dir, "Output directory")->capture_default_str();
    eval_cmd->add_option("--jobs", jobs, "Concurrent tasks")->check(CLI::PositiveNumber);

    std::string trace_path;
    auto* inspect_cmd = cli.add_subcommand("inspect", "Render a trace file");
    inspect_cmd->add_option("trace", trace_path, "Trace file")->required();

    auto* tools_cmd = cli.add_subcommand("tools", "Tool registry commands");
    bool list_json = false;
    auto* list_cmd = tools_cmd->add_subcommand("list", "List registered tools");
    list_cmd->add_flag("--json", list_json, "One JSON schema per line");
    std::string validate_path;
    auto* validate_cmd = tools_cmd->add_subcommand("validate", "Check a registry file");
    validate_cmd->add_option("path", validate_path, "Registry file (default: configured registry)");
    tools_cmd->require_subcommand(1);

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = cli.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        ak::Config cfg;
        try {
            if (!config_path.empty()) cfg.merge_file(config_path);
            cfg.merge_env([](const char* name) { return std::getenv(name); });
            for (const auto& s : sets) {
                const auto eq = s.find('=');
                if (eq == std::string::npos) fail(kUsage, "--set expects key=value, got '" + s + "'");
                cfg.set(s.substr(0, eq), s.substr(eq + 1), "--set");
            }
            if (!registry.empty()) cfg.set("tools.registry", registry, "--registry");
            if (!profile.empty()) cfg.set("prompt.profile", profile, "--profile");
            if (!tool_server.empty()) cfg.set("tools.server", tool_server, "--tool-server");
            if (!ablation.empty()) {
                const auto f = ak::ablation_from_string(ablation);
                cfg.set("engine.ablation.prompt", f.adaptive_prompt ? "true" : "false", "--ablation");
                cfg.set("engine.ablation.retrieval", f.tool_retrieval ? "true" : "false", "--ablation");
                cfg.set("engine.ablation.memory", f.memory_management ? "true" : "false", "--ablation");
            }
            if (lambda_w) cfg.set("eval.lambda_w", std::to_string(*lambda_w), "--lambda-w");
            if (lambda_m) cfg.set("eval.lambda_m", std::to_string(*lambda_m), "--lambda-m");
            if (jobs) cfg.set("eval.jobs", std::to_string(*jobs), "--jobs");
            if (!judge.empty()) cfg.set("judge.provider", judge, "--judge");
        } catch (const ak::ConfigError& e) {
            fail(kConfig, e.what());
        }

        if (show_config) {
            std::cout << cfg.to_json().dump(2) << "\n";
            return kOk;
        }
        if (*run_cmd) {
            if (run.fixture.empty() && run.query.empty()) fail(kUsage, "run needs --fixture or --query");
            return cmd_run(cfg, run);
        }
        if (*eval_cmd) return cmd_eval(cfg, eval);
        if (*inspect_cmd) return cmd_inspect(trace_path);
        if (*list_cmd) return cmd_tools_list(cfg, list_json);
        if (*validate_cmd) {
            if (validate_path.empty()) {
                const auto r = cfg.get_text("tools.registry");
                validate_path = r.empty() ? (ak::default_data_dir() / "registry.jsonl").string() : r;
            }
            return cmd_tools_validate(validate_path);
        }
        std::cerr << cli.help();
        return kUsage;
    } catch (const Failure& f) {
        std::cerr << "agentkit: " << f.message << "\n";
        return f.code;
    } catch (const std::exception& e) {
        std::cerr << "agentkit: " << e.what() << "\n";
        return kRuntimeIo;
    }
}
