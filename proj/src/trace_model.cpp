#include "agentkit/trace_model.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "agentkit/errors.hpp"

namespace agentkit {

std::string_view to_string(Role r) noexcept {
    switch (r) {
        case Role::human: return "human";
        case Role::ai: return "ai";
        case Role::tool: return "tool";
        case Role::system: return "system";
    }
    return "?";
}

std::optional<Role> role_from_string(std::string_view s) noexcept {
    for (Role r : {Role::human, Role::ai, Role::tool, Role::system}) {
        if (to_string(r) == s) return r;
    }
    return std::nullopt;
}

std::string_view to_string(ErrorClass c) noexcept {
    switch (c) {
        case ErrorClass::transient_network: return "transient_network";
        case ErrorClass::timeout: return "timeout";
        case ErrorClass::invalid_arguments: return "invalid_arguments";
        case ErrorClass::tool_not_found: return "tool_not_found";
        case ErrorClass::tool_crash: return "tool_crash";
        case ErrorClass::provider_error: return "provider_error";
        case ErrorClass::recursion_limit: return "recursion_limit";
    }
    return "?";
}

std::optional<ErrorClass> error_class_from_string(std::string_view s) noexcept {
    for (ErrorClass c : kAllErrorClasses) {
        if (to_string(c) == s) return c;
    }
    return std::nullopt;
}

Message Message::human(std::string content, std::size_t tokens) {
    Message m;
    m.role = Role::human;
    m.content = std::move(content);
    m.token_count = tokens;
    return m;
}

Message Message::ai(std::string content, std::vector<ToolCallRequest> calls, std::size_t tokens) {
    Message m;
    m.role = Role::ai;
    m.content = std::move(content);
    m.tool_calls = std::move(calls);
    m.token_count = tokens;
    return m;
}

Message Message::tool(std::string call_id, std::string content, std::size_t tokens) {
    Message m;
    m.role = Role::tool;
    m.tool_call_id = std::move(call_id);
    m.content = std::move(content);
    m.token_count = tokens;
    return m;
}

Message Message::system(std::string content, std::size_t tokens) {
    Message m;
    m.role = Role::system;
    m.content = std::move(content);
    m.token_count = tokens;
    return m;
}

void check_message(const Message& m) {
    if (!m.tool_calls.empty() && m.role != Role::ai)
        throw InvariantViolation("tool-calls-ai-only",
                                 "tool_calls on a " + std::string(to_string(m.role)) + " message");
    if (m.tool_call_id.has_value() != (m.role == Role::tool))
        throw InvariantViolation("tool-call-id-iff-tool",
                                 "tool_call_id presence does not match role " + std::string(to_string(m.role)));
    for (const auto& c : m.tool_calls) {
        if (!c.arguments.is_object())
            throw InvariantViolation("arguments-object", "arguments of call " + c.call_id + " are not an object");
    }
}

namespace {

// Incremental checker so Session::append and check_session share one definition.
struct OrderingState {
    bool seen_human = false;
    std::set<std::string> call_ids;

    void admit(const Message& m, std::size_t index) {
        check_message(m);
        if (m.role == Role::human) seen_human = true;
        if ((m.role == Role::ai || m.role == Role::tool) && !seen_human)
            throw InvariantViolation("human-first", "message " + std::to_string(index) + " (" +
                                                        std::string(to_string(m.role)) +
                                                        ") precedes the first human message");
        if (m.role == Role::tool && !call_ids.count(*m.tool_call_id))
            throw InvariantViolation("tool-call-id-known", "message " + std::to_string(index) +
                                                               " answers unknown call_id '" + *m.tool_call_id + "'");
    }

    void record(const Message& m, std::size_t index) {
        for (const auto& c : m.tool_calls) {
            if (!call_ids.insert(c.call_id).second)
                throw InvariantViolation("call-id-unique",
                                         "call_id '" + c.call_id + "' repeated at message " + std::to_string(index));
        }
    }
};

OrderingState replay(const std::vector<Message>& messages) {
    OrderingState st;
    for (std::size_t i = 0; i < messages.size(); ++i) {
        st.admit(messages[i], i);
        st.record(messages[i], i);
    }
    return st;
}

}  // namespace

void Session::append(Message m) {
    auto st = replay(messages);
    st.admit(m, messages.size());
    st.record(m, messages.size());
    messages.push_back(std::move(m));
}

void check_session(const Session& s) { replay(s.messages); }

void check_fixture(const TaskFixture& f) {
    if (f.task_id.empty()) throw FixtureError("<unnamed>", "empty task_id");
    if (f.turns.empty()) throw FixtureError(f.task_id, "turns must be nonempty");
    for (const auto& tool : f.reference_sequence) {
        if (std::find(f.candidate_tools.begin(), f.candidate_tools.end(), tool) == f.candidate_tools.end())
            throw FixtureError(f.task_id, "reference tool '" + tool + "' is not among candidate_tools");
    }
}

// --- JSON mapping --------------------------------------------------------

namespace {

const Json& require(const Json& j, const char* key) {
    if (!j.is_object()) throw std::invalid_argument("expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw std::invalid_argument(std::string("missing key '") + key + "'");
    return *it;
}

std::string require_string(const Json& j, const char* key) {
    const auto& v = require(j, key);
    if (!v.is_string()) throw std::invalid_argument(std::string("key '") + key + "' must be a string");
    return v.get<std::string>();
}

std::uint64_t require_count(const Json& j, const char* key) {
    const auto& v = require(j, key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
        throw std::invalid_argument(std::string("key '") + key + "' must be a nonnegative integer");
    return v.get<std::uint64_t>();
}

std::vector<std::string> require_strings(const Json& j, const char* key) {
    const auto& v = require(j, key);
    if (!v.is_array()) throw std::invalid_argument(std::string("key '") + key + "' must be an array");
    std::vector<std::string> out;
    for (const auto& e : v) {
        if (!e.is_string()) throw std::invalid_argument(std::string("key '") + key + "' must hold strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

Json call_to_json(const ToolCallRequest& c) {
    return Json{{"call_id", c.call_id}, {"tool_name", c.tool_name}, {"arguments", c.arguments}};
}

ToolCallRequest call_from_json(const Json& j) {
    ToolCallRequest c;
    c.call_id = require_string(j, "call_id");
    c.tool_name = require_string(j, "tool_name");
    c.arguments = require(j, "arguments");
    if (!c.arguments.is_object()) throw std::invalid_argument("arguments must be an object");
    return c;
}

}  // namespace

Json to_json(const Message& m) {
    Json j{{"role", to_string(m.role)}, {"content", m.content}, {"token_count", m.token_count},
           {"synthetic", m.synthetic}};
    Json calls = Json::array();
    for (const auto& c : m.tool_calls) calls.push_back(call_to_json(c));
    j["tool_calls"] = std::move(calls);
    if (m.tool_call_id) j["tool_call_id"] = *m.tool_call_id;
    return j;
}

Message message_from_json(const Json& j) {
    Message m;
    const auto role = role_from_string(require_string(j, "role"));
    if (!role) throw std::invalid_argument("unknown role");
    m.role = *role;
    m.content = require_string(j, "content");
    m.token_count = require_count(j, "token_count");
    if (auto it = j.find("synthetic"); it != j.end()) {
        if (!it->is_boolean()) throw std::invalid_argument("synthetic must be a boolean");
        m.synthetic = it->get<bool>();
    }
    if (auto it = j.find("tool_calls"); it != j.end()) {
        if (!it->is_array()) throw std::invalid_argument("tool_calls must be an array");
        for (const auto& c : *it) m.tool_calls.push_back(call_from_json(c));
    }
    if (auto it = j.find("tool_call_id"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) throw std::invalid_argument("tool_call_id must be a string");
        m.tool_call_id = it->get<std::string>();
    }
    return m;
}

Json to_json(const Session& s) {
    Json msgs = Json::array();
    for (const auto& m : s.messages) msgs.push_back(to_json(m));
    Json j{{"messages", std::move(msgs)}, {"state", s.state}};
    j["summary"] = s.summary ? Json(*s.summary) : Json(nullptr);
    return j;
}

Session session_from_json(const Json& j) {
    Session s;
    const auto& msgs = require(j, "messages");
    if (!msgs.is_array()) throw std::invalid_argument("messages must be an array");
    for (const auto& m : msgs) s.messages.push_back(message_from_json(m));
    if (auto it = j.find("summary"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) throw std::invalid_argument("summary must be a string");
        s.summary = it->get<std::string>();
    }
    if (auto it = j.find("state"); it != j.end()) {
        if (!it->is_object()) throw std::invalid_argument("state must be an object");
        for (const auto& [k, v] : it->items()) {
            if (!v.is_string()) throw std::invalid_argument("state values must be strings");
            s.state[k] = v.get<std::string>();
        }
    }
    return s;
}

Json to_json(const ExecutionTrace& t) {
    Json invoked = Json::array();
    for (const auto& inv : t.invoked) {
        invoked.push_back(Json{{"tool_name", inv.tool_name},
                               {"arguments", inv.arguments},
                               {"outcome", inv.outcome == Outcome::ok ? "ok" : "error"}});
    }
    Json events = Json::array();
    for (const auto& e : t.error_events) events.push_back(Json{{"class", to_string(e.error_class)}, {"detail", e.detail}});
    Json j{{"task_id", t.task_id},           {"invoked", std::move(invoked)},
           {"error_events", std::move(events)}, {"input_tokens", t.input_tokens},
           {"output_tokens", t.output_tokens}};
    j["final_answer"] = t.final_answer ? Json(*t.final_answer) : Json(nullptr);
    if (t.session) j["session"] = to_json(*t.session);
    return j;
}

ExecutionTrace trace_from_json(const Json& j) {
    ExecutionTrace t;
    t.task_id = require_string(j, "task_id");
    const auto& invoked = require(j, "invoked");
    if (!invoked.is_array()) throw std::invalid_argument("invoked must be an array");
    for (const auto& e : invoked) {
        Invocation inv;
        inv.tool_name = require_string(e, "tool_name");
        inv.arguments = require(e, "arguments");
        if (!inv.arguments.is_object()) throw std::invalid_argument("invocation arguments must be an object");
        const auto outcome = require_string(e, "outcome");
        if (outcome == "ok") {
            inv.outcome = Outcome::ok;
        } else if (outcome == "error") {
            inv.outcome = Outcome::error;
        } else {
            throw std::invalid_argument("outcome must be ok or error");
        }
        t.invoked.push_back(std::move(inv));
    }
    const auto& events = require(j, "error_events");
    if (!events.is_array()) throw std::invalid_argument("error_events must be an array");
    for (const auto& e : events) {
        const auto cls = error_class_from_string(require_string(e, "class"));
        if (!cls) throw std::invalid_argument("unknown error class");
        t.error_events.push_back({*cls, require_string(e, "detail")});
    }
    const auto& fa = require(j, "final_answer");
    if (!fa.is_null()) {
        if (!fa.is_string()) throw std::invalid_argument("final_answer must be a string or null");
        t.final_answer = fa.get<std::string>();
    }
    t.input_tokens = require_count(j, "input_tokens");
    t.output_tokens = require_count(j, "output_tokens");
    if (auto it = j.find("session"); it != j.end() && !it->is_null()) t.session = session_from_json(*it);
    return t;
}

Json to_json(const TaskFixture& f) {
    return Json{{"task_id", f.task_id},
                {"turns", f.turns},
                {"candidate_tools", f.candidate_tools},
                {"reference_sequence", f.reference_sequence},
                {"reference_answer", f.reference_answer},
                {"metadata", f.metadata}};
}

TaskFixture fixture_from_json(const Json& j) {
    TaskFixture f;
    f.task_id = require_string(j, "task_id");
    f.turns = require_strings(j, "turns");
    f.candidate_tools = require_strings(j, "candidate_tools");
    f.reference_sequence = require_strings(j, "reference_sequence");
    f.reference_answer = require_string(j, "reference_answer");
    if (auto it = j.find("metadata"); it != j.end()) {
        if (!it->is_object()) throw std::invalid_argument("metadata must be an object");
        f.metadata = *it;
    }
    return f;
}

// --- Record formats ------------------------------------------------------

namespace {

template <typename Fn>
void for_each_line(std::string_view bytes, Fn&& fn) {
    std::size_t pos = 0;
    while (pos < bytes.size()) {
        auto nl = bytes.find('\n', pos);
        const auto end = nl == std::string_view::npos ? bytes.size() : nl;
        auto line = bytes.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") != std::string_view::npos) fn(line, pos);
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
}

Json parse_line(std::string_view line, std::size_t base) {
    try {
        return Json::parse(line.begin(), line.end());
    } catch (const Json::parse_error& e) {
        const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
        throw MalformedRecord(base + std::min(at, line.size()), e.what());
    }
}

ExecutionTrace trace_from_line(std::string_view line, std::size_t base) {
    const Json j = parse_line(line, base);
    ExecutionTrace t;
    try {
        t = trace_from_json(j);
    } catch (const std::invalid_argument& e) {
        throw MalformedRecord(base, e.what());
    } catch (const Json::exception& e) {
        throw MalformedRecord(base, e.what());
    }
    if (t.session) check_session(*t.session);
    return t;
}

}  // namespace

std::string serialize_trace(const ExecutionTrace& trace) { return to_json(trace).dump() + "\n"; }

ExecutionTrace parse_trace(std::string_view bytes) {
    std::vector<ExecutionTrace> out = parse_traces(bytes);
    if (out.empty()) throw MalformedRecord(0, "empty input");
    if (out.size() > 1) {
        const auto second = bytes.find('\n');
        throw MalformedRecord(second == std::string_view::npos ? 0 : second + 1, "more than one record");
    }
    return std::move(out.front());
}

std::string serialize_traces(const std::vector<ExecutionTrace>& traces) {
    std::string out;
    for (const auto& t : traces) out += serialize_trace(t);
    return out;
}

std::vector<ExecutionTrace> parse_traces(std::string_view bytes) {
    std::vector<ExecutionTrace> out;
    for_each_line(bytes, [&](std::string_view line, std::size_t base) { out.push_back(trace_from_line(line, base)); });
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<ExecutionTrace> load_traces(const std::filesystem::path& path) { return parse_traces(read_file(path)); }

void append_trace(const std::filesystem::path& path, const ExecutionTrace& trace) {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw IoError("cannot write " + path.string());
    out << serialize_trace(trace);
    if (!out) throw IoError("write failed for " + path.string());
}

std::string serialize_fixture(const TaskFixture& fixture) { return to_json(fixture).dump() + "\n"; }

std::vector<TaskFixture> parse_fixtures(std::string_view bytes) {
    std::vector<TaskFixture> out;
    for_each_line(bytes, [&](std::string_view line, std::size_t base) {
        const Json j = parse_line(line, base);
        TaskFixture f;
        try {
            f = fixture_from_json(j);
        } catch (const std::invalid_argument& e) {
            throw MalformedRecord(base, e.what());
        } catch (const Json::exception& e) {
            throw MalformedRecord(base, e.what());
        }
        check_fixture(f);
        out.push_back(std::move(f));
    });
    return out;
}

std::vector<TaskFixture> load_fixtures(const std::filesystem::path& path) { return parse_fixtures(read_file(path)); }

}  // namespace agentkit
