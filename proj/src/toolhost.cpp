#include "agentkit/toolhost.hpp"

#include <algorithm>
#include <charconv>
#include <regex>
#include <set>

#include "agentkit/text.hpp"

namespace agentkit {

std::string_view to_string(ToolCategory c) noexcept {
    switch (c) {
        case ToolCategory::file_management: return "file_management";
        case ToolCategory::information_retrieval: return "information_retrieval";
        case ToolCategory::image_generation: return "image_generation";
        case ToolCategory::data_analysis: return "data_analysis";
        case ToolCategory::other: return "other";
    }
    return "other";
}

std::optional<ToolCategory> tool_category_from_string(std::string_view s) noexcept {
    for (auto c : {ToolCategory::file_management, ToolCategory::information_retrieval, ToolCategory::image_generation,
                   ToolCategory::data_analysis, ToolCategory::other}) {
        if (to_string(c) == s) return c;
    }
    return std::nullopt;
}

std::string_view to_string(ParamType t) noexcept {
    switch (t) {
        case ParamType::string: return "string";
        case ParamType::integer: return "integer";
        case ParamType::number: return "number";
        case ParamType::boolean: return "boolean";
        case ParamType::url: return "url";
        case ParamType::date: return "date";
        case ParamType::object: return "object";
        case ParamType::array: return "array";
    }
    return "string";
}

std::optional<ParamType> param_type_from_string(std::string_view s) noexcept {
    for (auto t : {ParamType::string, ParamType::integer, ParamType::number, ParamType::boolean, ParamType::url,
                   ParamType::date, ParamType::object, ParamType::array}) {
        if (to_string(t) == s) return t;
    }
    return std::nullopt;
}

std::vector<ParameterSpec> ToolSchema::canonical_parameters() const {
    std::vector<ParameterSpec> out;
    out.reserve(parameters.size());
    for (const auto& p : parameters)
        if (p.required) out.push_back(p);
    for (const auto& p : parameters)
        if (!p.required) out.push_back(p);
    return out;
}

const ParameterSpec* ToolSchema::find_parameter(std::string_view name) const {
    for (const auto& p : parameters)
        if (p.name == name) return &p;
    return nullptr;
}

namespace {

struct Constraint {
    bool nonempty = false;
    std::optional<double> min;
    std::optional<double> max;
    std::optional<std::size_t> max_length;
    std::vector<std::string> one_of;
    std::optional<std::regex> pattern;
};

double parse_number(std::string_view s, std::string_view clause) {
    double v = 0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end)
        throw InvalidSchema("bad number in constraint clause '" + std::string(clause) + "'");
    return v;
}

// Throws InvalidSchema on an unparseable constraint.
Constraint parse_constraint(std::string_view text) {
    Constraint c;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto rest = text.substr(pos);
        const auto trimmed_start = rest.find_first_not_of(' ');
        if (trimmed_start == std::string_view::npos) break;
        rest = rest.substr(trimmed_start);
        pos += trimmed_start;
        if (rest.starts_with("pattern=")) {
            try {
                c.pattern.emplace(std::string(rest.substr(8)), std::regex::ECMAScript);
            } catch (const std::regex_error& e) {
                throw InvalidSchema("bad pattern in constraint: " + std::string(e.what()));
            }
            break;
        }
        const auto semi = rest.find(';');
        const auto clause = text::trim(rest.substr(0, semi));
        pos = semi == std::string_view::npos ? text.size() : pos + semi + 1;
        if (clause.empty()) continue;
        const auto eq = clause.find('=');
        const std::string key = clause.substr(0, eq);
        const std::string value = eq == std::string::npos ? "" : clause.substr(eq + 1);
        if (key == "nonempty" && eq == std::string::npos) {
            c.nonempty = true;
        } else if (key == "min") {
            c.min = parse_number(value, clause);
        } else if (key == "max") {
            c.max = parse_number(value, clause);
        } else if (key == "max_length") {
            c.max_length = static_cast<std::size_t>(parse_number(value, clause));
        } else if (key == "one_of") {
            std::size_t start = 0;
            while (start <= value.size()) {
                const auto bar = value.find('|', start);
                c.one_of.push_back(value.substr(start, bar == std::string::npos ? std::string::npos : bar - start));
                if (bar == std::string::npos) break;
                start = bar + 1;
            }
        } else {
            throw InvalidSchema("unknown constraint clause '" + clause + "'");
        }
    }
    return c;
}

const std::regex& url_regex() {
    static const std::regex re(R"(^https?://[^\s/$.?#][^\s]*$)", std::regex::icase);
    return re;
}

const std::regex& date_regex() {
    static const std::regex re(R"(^\d{4}-(0[1-9]|1[0-2])-(0[1-9]|[12]\d|3[01])$)");
    return re;
}

std::optional<std::string> type_error(const ParameterSpec& p, const Json& v) {
    const auto expect = [&](bool ok) -> std::optional<std::string> {
        if (ok) return std::nullopt;
        return "expected " + std::string(to_string(p.type));
    };
    switch (p.type) {
        case ParamType::string: return expect(v.is_string());
        case ParamType::integer: return expect(v.is_number_integer());
        case ParamType::number: return expect(v.is_number());
        case ParamType::boolean: return expect(v.is_boolean());
        case ParamType::object: return expect(v.is_object());
        case ParamType::array: return expect(v.is_array());
        case ParamType::url:
            return expect(v.is_string() && std::regex_match(v.get_ref<const std::string&>(), url_regex()));
        case ParamType::date:
            return expect(v.is_string() && std::regex_match(v.get_ref<const std::string&>(), date_regex()));
    }
    return std::nullopt;
}

std::optional<std::string> constraint_error(const Constraint& c, const Json& v) {
    if (c.nonempty) {
        if ((v.is_string() && v.get_ref<const std::string&>().empty()) || (v.is_array() && v.empty()) ||
            (v.is_object() && v.empty()))
            return std::string("must be nonempty");
    }
    if (v.is_number()) {
        const double d = v.get<double>();
        if (c.min && d < *c.min) return "below min " + Json(*c.min).dump();
        if (c.max && d > *c.max) return "above max " + Json(*c.max).dump();
    }
    if (v.is_string()) {
        const auto& s = v.get_ref<const std::string&>();
        if (c.max_length && s.size() > *c.max_length) return "longer than " + std::to_string(*c.max_length);
        if (!c.one_of.empty() && std::find(c.one_of.begin(), c.one_of.end(), s) == c.one_of.end())
            return std::string("not one of the allowed values");
        if (c.pattern && !std::regex_match(s, *c.pattern)) return std::string("does not match pattern");
    } else if (!c.one_of.empty()) {
        if (std::find(c.one_of.begin(), c.one_of.end(), v.dump()) == c.one_of.end())
            return std::string("not one of the allowed values");
    }
    return std::nullopt;
}

}  // namespace

void check_schema(const ToolSchema& s) {
    static const std::regex name_re(R"(^[A-Za-z0-9_.\-]+$)");
    if (s.tool_name.empty() || !std::regex_match(s.tool_name, name_re))
        throw InvalidSchema("invalid tool_name '" + s.tool_name + "'");
    std::set<std::string> seen;
    for (const auto& p : s.parameters) {
        if (p.name.empty()) throw InvalidSchema(s.tool_name + ": parameter with empty name");
        if (!seen.insert(p.name).second) throw InvalidSchema(s.tool_name + ": duplicate parameter '" + p.name + "'");
        parse_constraint(p.constraint);
    }
    if (s.cost_class == CostClass::expensive && text::trim(s.confirmation_prompt).empty())
        throw InvalidSchema(s.tool_name + ": expensive tool needs a confirmation prompt");
}

std::string embedding_text(const ToolSchema& s) {
    const std::string& desc = s.enriched_description.empty() ? s.description : s.enriched_description;
    return s.tool_name + " " + desc + " " + std::string(to_string(s.category));
}

Json to_json(const ToolSchema& s) {
    Json params = Json::array();
    for (const auto& p : s.parameters) {
        params.push_back(
            Json{{"name", p.name}, {"type", to_string(p.type)}, {"required", p.required}, {"constraint", p.constraint}});
    }
    return Json{{"tool_name", s.tool_name},
                {"category", to_string(s.category)},
                {"description", s.description},
                {"enriched_description", s.enriched_description},
                {"parameters", std::move(params)},
                {"output_description", s.output_description},
                {"cost_class", s.cost_class == CostClass::cheap ? "cheap" : "expensive"},
                {"preconditions", s.preconditions},
                {"confirmation_prompt", s.confirmation_prompt},
                {"intent_keywords", s.intent_keywords}};
}

ToolSchema schema_from_json(const Json& j) {
    if (!j.is_object()) throw InvalidSchema("tool schema must be an object");
    const auto str = [&](const char* key, bool required) -> std::string {
        auto it = j.find(key);
        if (it == j.end()) {
            if (required) throw InvalidSchema(std::string("tool schema missing '") + key + "'");
            return {};
        }
        if (!it->is_string()) throw InvalidSchema(std::string("tool schema key '") + key + "' must be a string");
        return it->get<std::string>();
    };
    ToolSchema s;
    s.tool_name = str("tool_name", true);
    const auto cat = tool_category_from_string(str("category", true));
    if (!cat) throw InvalidSchema(s.tool_name + ": unknown category");
    s.category = *cat;
    s.description = str("description", true);
    s.enriched_description = str("enriched_description", false);
    s.output_description = str("output_description", false);
    s.preconditions = str("preconditions", false);
    s.confirmation_prompt = str("confirmation_prompt", false);
    const auto cost = str("cost_class", false);
    if (cost.empty() || cost == "cheap") {
        s.cost_class = CostClass::cheap;
    } else if (cost == "expensive") {
        s.cost_class = CostClass::expensive;
    } else {
        throw InvalidSchema(s.tool_name + ": unknown cost_class '" + cost + "'");
    }
    if (auto it = j.find("parameters"); it != j.end()) {
        if (!it->is_array()) throw InvalidSchema(s.tool_name + ": parameters must be an array");
        for (const auto& pj : *it) {
            ParameterSpec p;
            if (!pj.is_object() || !pj.contains("name") || !pj["name"].is_string())
                throw InvalidSchema(s.tool_name + ": parameter needs a name");
            p.name = pj["name"].get<std::string>();
            const auto type = param_type_from_string(pj.value("type", std::string("string")));
            if (!type) throw InvalidSchema(s.tool_name + ": unknown type for parameter " + p.name);
            p.type = *type;
            p.required = pj.value("required", true);
            p.constraint = pj.value("constraint", std::string());
            s.parameters.push_back(std::move(p));
        }
    }
    if (auto it = j.find("intent_keywords"); it != j.end()) {
        if (!it->is_array()) throw InvalidSchema(s.tool_name + ": intent_keywords must be an array");
        for (const auto& k : *it) s.intent_keywords.push_back(k.get<std::string>());
    }
    return s;
}

ValidationResult validate_arguments(const ToolSchema& schema, const Arguments& arguments) {
    if (!arguments.is_object()) return ValidationResult::reject("arguments: expected an object");
    for (const auto& p : schema.canonical_parameters()) {
        auto it = arguments.find(p.name);
        if (it == arguments.end() || it->is_null()) {
            if (p.required) return ValidationResult::reject("missing: " + p.name);
            continue;
        }
        if (auto err = type_error(p, *it)) return ValidationResult::reject("invalid: " + p.name + " (" + *err + ")");
        if (auto err = constraint_error(parse_constraint(p.constraint), *it))
            return ValidationResult::reject("invalid: " + p.name + " (" + *err + ")");
    }
    for (const auto& [key, _] : arguments.items()) {
        if (!schema.find_parameter(key)) return ValidationResult::reject("unknown: " + key);
    }
    return ValidationResult::accept();
}

std::variant<ValidatedCall, ValidationResult> validate_call(const ToolSchema& schema, const ToolCallRequest& call) {
    if (call.tool_name != schema.tool_name) return ValidationResult::reject("unknown tool: " + call.tool_name);
    auto v = validate_arguments(schema, call.arguments);
    if (!v.ok) return v;
    return ValidatedCall(call);
}

std::string TemplateExecutor::execute(const Arguments& arguments) {
    std::string out;
    std::size_t pos = 0;
    while (pos < template_.size()) {
        const auto open = template_.find("{{", pos);
        if (open == std::string::npos) {
            out.append(template_, pos, std::string::npos);
            break;
        }
        const auto close = template_.find("}}", open + 2);
        if (close == std::string::npos) {
            out.append(template_, pos, std::string::npos);
            break;
        }
        out.append(template_, pos, open - pos);
        const std::string key = template_.substr(open + 2, close - open - 2);
        if (auto it = arguments.find(key); it != arguments.end()) {
            out += it->is_string() ? it->get<std::string>() : it->dump();
        }
        pos = close + 2;
    }
    return out;
}

ToolHost::ToolHost(std::shared_ptr<const Tokenizer> tokenizer) : tokenizer_(std::move(tokenizer)) {}

void ToolHost::register_tool(ToolSchema schema, std::shared_ptr<ToolExecutor> executor) {
    check_schema(schema);
    if (by_name_.count(schema.tool_name)) throw DuplicateName("tool '" + schema.tool_name + "' already registered");
    if (!executor) throw InvalidSchema(schema.tool_name + ": no executor");
    Entry e;
    e.serial = executor->concurrency_safe() ? nullptr : std::make_unique<std::mutex>();
    e.schema = std::move(schema);
    e.executor = std::move(executor);
    by_name_.emplace(e.schema.tool_name, entries_.size());
    entries_.push_back(std::move(e));
}

const ToolSchema* ToolHost::find(std::string_view name) const {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? nullptr : &entries_[it->second].schema;
}

std::vector<ToolSchema> ToolHost::list_tools() const {
    std::vector<ToolSchema> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.schema);
    return out;
}

std::variant<ValidatedCall, ValidationResult> ToolHost::validate(const ToolCallRequest& call) const {
    const auto* schema = find(call.tool_name);
    if (!schema) return ValidationResult::reject("unknown tool: " + call.tool_name);
    return validate_call(*schema, call);
}

ToolResult ToolHost::invoke(const ValidatedCall& call) const {
    const auto& req = call.request();
    ToolResult r;
    r.call_id = req.call_id;
    auto fail = [&](ErrorClass c, std::string msg) {
        r.error = c;
        r.content = std::move(msg);
        r.content_tokens = tokenizer_->count(r.content);
        return r;
    };
    auto it = by_name_.find(req.tool_name);
    if (it == by_name_.end()) return fail(ErrorClass::tool_not_found, "unknown tool: " + req.tool_name);
    const Entry& e = entries_[it->second];
    if (e.schema.cost_class == CostClass::expensive && !call.confirmed())
        return fail(ErrorClass::invalid_arguments, "confirmation required: " + e.schema.confirmation_prompt);

    const auto start = std::chrono::steady_clock::now();
    try {
        std::unique_lock<std::mutex> lock;
        if (e.serial) lock = std::unique_lock<std::mutex>(*e.serial);
        r.content = e.executor->execute(req.arguments);
    } catch (const ToolFailure& f) {
        r.duration = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start);
        return fail(f.error_class(), f.what());
    } catch (const std::exception& ex) {
        r.duration = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start);
        return fail(ErrorClass::tool_crash, std::string("tool crashed: ") + ex.what());
    } catch (...) {
        r.duration = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start);
        return fail(ErrorClass::tool_crash, "tool crashed: unknown exception");
    }
    r.duration = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start);
    if (timeout_.count() > 0 && r.duration > timeout_)
        return fail(ErrorClass::timeout, "tool exceeded " + std::to_string(timeout_.count()) + " ms");
    r.content_tokens = tokenizer_->count(r.content);
    return r;
}

FaultInjectingTransport::FaultInjectingTransport(ToolTransport& inner, const Json& script) : inner_(inner) {
    if (script.is_null()) return;
    if (!script.is_object()) throw ConfigError("fault script must be an object");
    for (const auto& [tool, steps] : script.items()) {
        if (!steps.is_array()) throw ConfigError("fault script for " + tool + " must be an array");
        auto& out = script_[tool];
        for (const auto& s : steps) {
            const auto name = s.get<std::string>();
            if (name == "ok") {
                out.emplace_back(std::nullopt);
                continue;
            }
            const auto cls = error_class_from_string(name);
            if (!cls) throw ConfigError("unknown fault '" + name + "' for " + tool);
            out.emplace_back(*cls);
        }
    }
}

ToolResult FaultInjectingTransport::call(const ValidatedCall& call) {
    std::optional<ErrorClass> injected;
    {
        std::lock_guard lock(mu_);
        const auto& name = call.request().tool_name;
        if (auto it = script_.find(name); it != script_.end()) {
            auto& cur = cursor_[name];
            if (cur < it->second.size()) injected = it->second[cur++];
        }
    }
    if (!injected) return inner_.call(call);
    ToolResult r;
    r.call_id = call.request().call_id;
    r.error = *injected;
    r.content = "injected " + std::string(to_string(*injected));
    r.content_tokens = 2;
    return r;
}

std::vector<RegistryEntry> parse_registry(std::string_view bytes) {
    std::vector<RegistryEntry> out;
    std::set<std::string> names;
    std::size_t pos = 0;
    while (pos < bytes.size()) {
        auto nl = bytes.find('\n', pos);
        const auto end = nl == std::string_view::npos ? bytes.size() : nl;
        const auto line = bytes.substr(pos, end - pos);
        if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
            Json j;
            try {
                j = Json::parse(line.begin(), line.end());
            } catch (const Json::parse_error& e) {
                throw MalformedRecord(pos + (e.byte > 0 ? e.byte - 1 : 0), e.what());
            }
            RegistryEntry entry;
            entry.schema = schema_from_json(j);
            check_schema(entry.schema);
            if (!names.insert(entry.schema.tool_name).second)
                throw DuplicateName("tool '" + entry.schema.tool_name + "' listed twice in registry");
            if (auto it = j.find("mock"); it != j.end() && it->is_object() && it->contains("response"))
                entry.mock_response = (*it)["response"].get<std::string>();
            out.push_back(std::move(entry));
        }
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return out;
}

std::vector<RegistryEntry> load_registry(const std::filesystem::path& path) { return parse_registry(read_file(path)); }

void populate_mock_host(ToolHost& host, const std::vector<RegistryEntry>& entries) {
    for (const auto& e : entries) {
        std::string tmpl = e.mock_response.value_or(e.schema.tool_name + " completed");
        host.register_tool(e.schema, std::make_shared<TemplateExecutor>(std::move(tmpl)));
    }
}

}  // namespace agentkit
