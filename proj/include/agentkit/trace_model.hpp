#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "agentkit/error_class.hpp"

// Canonical data model shared by every other module, plus the newline-delimited
// record formats for traces and fixtures.
namespace agentkit {

using Json = nlohmann::json;
// Tool arguments: always a JSON object. Keys are kept sorted, which makes every
// serialization of the same arguments byte-identical.
using Arguments = Json;

enum class Role { human, ai, tool, system };

std::string_view to_string(Role r) noexcept;
std::optional<Role> role_from_string(std::string_view s) noexcept;

struct ToolCallRequest {
    std::string call_id;
    std::string tool_name;
    Arguments arguments = Json::object();

    friend bool operator==(const ToolCallRequest&, const ToolCallRequest&) = default;
};

struct Message {
    Role role = Role::human;
    std::string content;
    std::vector<ToolCallRequest> tool_calls;   // ai only
    std::optional<std::string> tool_call_id;   // tool only
    std::size_t token_count = 0;               // stored at write time, never recomputed
    bool synthetic = false;                    // placeholder or backfilled entry

    friend bool operator==(const Message&, const Message&) = default;

    static Message human(std::string content, std::size_t tokens = 0);
    static Message ai(std::string content, std::vector<ToolCallRequest> calls = {}, std::size_t tokens = 0);
    static Message tool(std::string call_id, std::string content, std::size_t tokens = 0);
    static Message system(std::string content, std::size_t tokens = 0);
};

// Throws InvariantViolation when a single message is malformed.
void check_message(const Message& m);

struct Session {
    std::vector<Message> messages;
    std::optional<std::string> summary;
    std::map<std::string, std::string> state;

    friend bool operator==(const Session&, const Session&) = default;

    // Appends after checking the message and the ordering invariants against the
    // existing history. Leaves the session untouched on failure.
    void append(Message m);
};

// Checks every Session invariant; throws InvariantViolation naming the first one broken.
void check_session(const Session& s);

enum class Outcome { ok, error };

struct Invocation {
    std::string tool_name;
    Arguments arguments = Json::object();
    Outcome outcome = Outcome::ok;

    friend bool operator==(const Invocation&, const Invocation&) = default;
};

struct ErrorEvent {
    ErrorClass error_class = ErrorClass::provider_error;
    std::string detail;

    friend bool operator==(const ErrorEvent&, const ErrorEvent&) = default;
};

struct ExecutionTrace {
    std::string task_id;
    std::vector<Invocation> invoked;  // temporal order: L(i)
    std::vector<ErrorEvent> error_events;
    std::optional<std::string> final_answer;
    std::uint64_t input_tokens = 0;
    std::uint64_t output_tokens = 0;
    // Dialogue produced alongside the trace. Optional in the file format and used
    // by `inspect` to show repaired (synthetic) entries.
    std::optional<Session> session;

    friend bool operator==(const ExecutionTrace&, const ExecutionTrace&) = default;

    bool failed_by_error() const noexcept { return !error_events.empty(); }
};

struct TaskFixture {
    std::string task_id;
    std::vector<std::string> turns;
    std::vector<std::string> candidate_tools;
    std::vector<std::string> reference_sequence;  // R(i)
    std::string reference_answer;
    Json metadata = Json::object();

    friend bool operator==(const TaskFixture&, const TaskFixture&) = default;
};

void check_fixture(const TaskFixture& f);

// --- JSON mapping --------------------------------------------------------

Json to_json(const Message& m);
Message message_from_json(const Json& j);
Json to_json(const Session& s);
Session session_from_json(const Json& j);
Json to_json(const ExecutionTrace& t);
ExecutionTrace trace_from_json(const Json& j);
Json to_json(const TaskFixture& f);
TaskFixture fixture_from_json(const Json& j);

// --- Record formats ------------------------------------------------------

// One JSON object on one line, terminated by '\n'.
std::string serialize_trace(const ExecutionTrace& trace);
// Parses exactly one record (a trailing newline is allowed). Throws
// MalformedRecord or InvariantViolation.
ExecutionTrace parse_trace(std::string_view bytes);

// Newline-delimited batches. Offsets in errors are relative to the whole input.
std::string serialize_traces(const std::vector<ExecutionTrace>& traces);
std::vector<ExecutionTrace> parse_traces(std::string_view bytes);
std::vector<ExecutionTrace> load_traces(const std::filesystem::path& path);
void append_trace(const std::filesystem::path& path, const ExecutionTrace& trace);

std::string serialize_fixture(const TaskFixture& fixture);
std::vector<TaskFixture> parse_fixtures(std::string_view bytes);
// Throws IoError when unreadable and FixtureError on a fixture invariant violation.
std::vector<TaskFixture> load_fixtures(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

}  // namespace agentkit
