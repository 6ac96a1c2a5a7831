#include "agentkit/engine.hpp"

#include <algorithm>
#include <regex>
#include <set>

#include "agentkit/errors.hpp"
#include "agentkit/text.hpp"

namespace agentkit {

std::string AblationFlags::label() const {
    if (*this == kBase) return "Base";
    if (*this == kBaseP) return "B-P";
    if (*this == kBasePT) return "B-PT";
    if (*this == kJenius) return "Jenius";
    auto d = [](bool b) { return b ? '1' : '0'; };
    return std::string("custom(") + d(adaptive_prompt) + "," + d(tool_retrieval) + "," + d(memory_management) + ")";
}

AblationFlags ablation_from_string(std::string_view s) {
    const auto k = text::to_lower_ascii(text::trim(s));
    if (k == "base") return kBase;
    if (k == "bp" || k == "b-p") return kBaseP;
    if (k == "bpt" || k == "b-pt") return kBasePT;
    if (k == "full" || k == "jenius") return kJenius;
    throw ConfigError("unknown ablation variant '" + std::string(s) + "' (expected base, bp, bpt or full)");
}

void check_reply(const ModelReply& r) {
    if (r.final_answer.has_value() == r.tool_calls.empty()) return;
    throw ProviderError(r.final_answer ? "reply has both tool calls and a final answer"
                                       : "reply has neither tool calls nor a final answer");
}

void check_engine_config(const EngineConfig& cfg) {
    if (cfg.max_iterations < 1) throw ConfigError("engine.max_iterations must be at least 1");
    if (!cfg.tokenizer) throw ConfigError("engine tokenizer missing");
    check_retrieval_config(cfg.retrieval);
    check_memory_config(cfg.memory);
}

// --- Doubles -------------------------------------------------------------

namespace {

std::size_t reply_tokens(const ModelReply& r, const Tokenizer& tok) {
    std::size_t n = tok.count(r.reasoning);
    if (r.final_answer) n += tok.count(*r.final_answer);
    for (const auto& c : r.tool_calls) n += tok.count(c.tool_name) + tok.count(c.arguments.dump());
    return n;
}

std::string call_id_for(const ModelRequest& req, std::size_t j) {
    return req.task_id + "-t" + std::to_string(req.turn_index) + "-s" + std::to_string(req.step_index) + "-" +
           std::to_string(j);
}

const Message* last_of(const std::vector<Message>& msgs, Role role) {
    for (auto it = msgs.rbegin(); it != msgs.rend(); ++it)
        if (it->role == role) return &*it;
    return nullptr;
}

}  // namespace

ModelReply ScriptedModel::complete(const ModelRequest& req) const {
    ModelReply reply;
    const Json* steps = nullptr;
    if (auto it = req.metadata.find("script"); it != req.metadata.end() && it->is_array() &&
                                               req.turn_index < it->size() && (*it)[req.turn_index].is_array())
        steps = &(*it)[req.turn_index];

    const Json* step = nullptr;
    if (steps && !steps->empty()) {
        if (req.step_index < steps->size()) {
            step = &(*steps)[req.step_index];
        } else if (steps->back().value("repeat", false)) {
            step = &steps->back();
        }
    }
    if (!step) {
        reply.final_answer = "Done.";
    } else if (step->contains("fail")) {
        throw ProviderError((*step)["fail"].get<std::string>());
    } else if (step->contains("answer")) {
        reply.reasoning = step->value("reasoning", "");
        reply.final_answer = (*step)["answer"].get<std::string>();
    } else {
        reply.reasoning = step->value("reasoning", "");
        std::vector<const Json*> calls;
        if (step->contains("calls")) {
            for (const auto& c : (*step)["calls"]) calls.push_back(&c);
        } else {
            calls.push_back(step);
        }
        for (std::size_t j = 0; j < calls.size(); ++j) {
            ToolCallRequest c;
            c.call_id = call_id_for(req, j);
            c.tool_name = calls[j]->at("call").get<std::string>();
            c.arguments = calls[j]->value("args", Json::object());
            reply.tool_calls.push_back(std::move(c));
        }
        if (reply.tool_calls.empty()) reply.final_answer = "Done.";
    }
    reply.output_tokens = reply_tokens(reply, *tokenizer_);
    return reply;
}

namespace {

std::optional<Json> fill_argument(const ParameterSpec& p, const std::string& utterance) {
    static const std::regex number(R"(-?\d+(\.\d+)?)");
    static const std::regex date(R"(\d{4}-\d{2}-\d{2})");
    std::smatch m;
    switch (p.type) {
        case ParamType::url:
            if (auto u = extract_url(utterance)) return Json(*u);
            return std::nullopt;
        case ParamType::integer:
            if (std::regex_search(utterance, m, number)) return Json(std::stoll(m.str()));
            return std::nullopt;
        case ParamType::number:
            if (std::regex_search(utterance, m, number)) return Json(std::stod(m.str()));
            return std::nullopt;
        case ParamType::date:
            if (std::regex_search(utterance, m, date)) return Json(m.str());
            return std::nullopt;
        case ParamType::boolean: return Json(true);
        case ParamType::string: return Json(utterance);
        case ParamType::object:
        case ParamType::array: return std::nullopt;
    }
    return std::nullopt;
}

}  // namespace

ModelReply HeuristicModel::complete(const ModelRequest& req) const {
    ModelReply reply;
    const Message* human = last_of(req.messages, Role::human);
    const std::string utterance = human ? human->content : std::string();
    if (req.step_index > 0) {
        const Message* out = last_of(req.messages, Role::tool);
        reply.reasoning = "The tool returned a result.";
        reply.final_answer = out ? "Here is what I found: " + out->content : "Done.";
    } else {
        const auto names = matching_tools(utterance, req.tools);
        for (const auto& name : names) {
            auto it = std::find_if(req.tools.begin(), req.tools.end(),
                                   [&](const ToolSchema& t) { return t.tool_name == name; });
            Json args = Json::object();
            bool complete = true;
            for (const auto& p : it->canonical_parameters()) {
                if (!p.required) continue;
                auto v = fill_argument(p, utterance);
                if (!v) {
                    complete = false;
                    break;
                }
                args[p.name] = std::move(*v);
            }
            if (!complete || !validate_arguments(*it, args).ok) continue;
            reply.reasoning = "Calling " + name + " for the request.";
            reply.tool_calls.push_back({call_id_for(req, 0), name, std::move(args)});
            break;
        }
        if (reply.tool_calls.empty()) reply.final_answer = "I can answer that directly: " + utterance;
    }
    reply.output_tokens = reply_tokens(reply, *tokenizer_);
    return reply;
}

ModelReply DoubleModel::complete(const ModelRequest& req) const {
    if (req.metadata.contains("script")) return scripted_.complete(req);
    return heuristic_.complete(req);
}

std::string ModelSummarizer::summarize(std::span<const Message> segment,
                                       const std::optional<std::string>& previous_summary,
                                       std::size_t token_budget) const {
    ModelRequest req;
    req.task_id = "summary";
    req.system_prompt = "Summarize the conversation below in at most " + std::to_string(token_budget) +
                        " tokens. Keep user goals, tool results and open questions.";
    if (previous_summary) req.system_prompt += "\nEarlier summary: " + *previous_summary;
    for (const auto& m : segment) {
        if (m.role == Role::system) continue;
        req.messages.push_back(m);
    }
    const auto reply = model_->complete(req);
    if (!reply.final_answer || reply.final_answer->empty()) throw ProviderError("summarizer returned no text");
    return truncate_to_tokens(*reply.final_answer, token_budget, *tokenizer_);
}

// --- Retry ---------------------------------------------------------------

RetryOutcome execute_with_retry(const ValidatedCall& call, const EngineConfig& cfg, ToolTransport& transport) {
    RetryOutcome out;
    std::map<ErrorClass, std::size_t> retries;
    while (true) {
        out.result = transport.call(call);
        ++out.attempts;
        if (out.result.ok()) return out;
        const ErrorClass c = *out.result.error;
        if (!is_retryable(c)) return out;
        auto lim = cfg.retry_limits.find(c);
        const std::size_t limit = lim == cfg.retry_limits.end() ? 0 : lim->second;
        if (retries[c] >= limit) return out;
        ++retries[c];
    }
}

std::optional<std::string> extract_url(std::string_view input) {
    static const std::regex url(R"(https?://[^\s<>"'`()\[\]{}]+)", std::regex::icase);
    const std::string s(input);
    std::smatch m;
    if (!std::regex_search(s, m, url)) return std::nullopt;
    std::string u = m.str();
    while (!u.empty() && std::string_view(".,;:!?").find(u.back()) != std::string_view::npos) u.pop_back();
    return u;
}

// --- Loop ----------------------------------------------------------------

namespace {

bool keywords_match(const ToolSchema& t, std::string_view utterance) {
    const auto lowered = text::to_lower_ascii(utterance);
    return std::any_of(t.intent_keywords.begin(), t.intent_keywords.end(), [&](const std::string& k) {
        return lowered.find(text::to_lower_ascii(k)) != std::string::npos;
    });
}

// Pulls a clean URL out of free text given for url-typed parameters.
void normalize_urls(const ToolSchema& schema, Arguments& args) {
    for (const auto& p : schema.parameters) {
        if (p.type != ParamType::url) continue;
        auto it = args.find(p.name);
        if (it == args.end() || !it->is_string()) continue;
        if (auto u = extract_url(it->get<std::string>())) *it = *u;
    }
}

class TaskRun {
public:
    TaskRun(const TaskFixture& f, const EngineConfig& cfg, const Environment& env) : f_(f), cfg_(cfg), env_(env) {
        result_.trace.task_id = f.task_id;
        const auto& all = env.index->tools();
        if (f.candidate_tools.empty()) {
            candidates_ = all;
        } else {
            for (const auto& name : f.candidate_tools) {
                const ToolSchema* s = env.index->find(name);
                if (!s) throw FixtureError(f.task_id, "candidate tool '" + name + "' is not in the registry");
                candidates_.push_back(*s);
            }
        }
        for (const auto& t : candidates_) candidate_names_.push_back(t.tool_name);
        if (auto it = f.metadata.find("faults"); it != f.metadata.end()) {
            faults_ = std::make_unique<FaultInjectingTransport>(*env.transport, *it);
            transport_ = faults_.get();
        } else {
            transport_ = env.transport;
        }
    }

    RunResult run() {
        for (std::size_t t = 0; t < f_.turns.size() && !halted_; ++t) run_turn(t);
        result_.trace.session = result_.session;
        return std::move(result_);
    }

private:
    Session& session() { return result_.session; }
    const Tokenizer& tok() const { return *cfg_.tokenizer; }

    void append(Message m) {
        m.token_count = tok().count(m.content);
        for (const auto& c : m.tool_calls) m.token_count += tok().count(c.tool_name) + tok().count(c.arguments.dump());
        session().append(std::move(m));
    }

    void halt(ErrorClass c, std::string detail, std::string content) {
        result_.trace.error_events.push_back({c, std::move(detail)});
        Message m = Message::ai(std::move(content));
        m.synthetic = true;
        append(std::move(m));
        halted_ = true;
    }

    void maybe_compress() {
        if (!cfg_.ablation.memory_management || !env_.summarizer) return;
        auto r = maybe_summarize(session(), cfg_.memory, *env_.summarizer, tok());
        if (r.error) {
            result_.warnings.push_back(*r.error);
            return;
        }
        if (r.replaced) {
            session() = std::move(r.session);
            ++result_.summarizations;
        }
    }

    void run_turn(std::size_t turn) {
        maybe_compress();
        const std::string& utterance = f_.turns[turn];
        append(Message::human(utterance));

        std::optional<IntentCategory> intent;
        std::vector<ToolSchema> offered;
        if (cfg_.ablation.adaptive_prompt) intent = classify_intent(utterance, candidates_);
        const bool wants_tools = !intent || intent->category == Intent::tool_augmented;
        if (wants_tools) {
            if (cfg_.ablation.tool_retrieval && !candidates_.empty()) {
                const auto cut = env_.index->select(utterance, cfg_.retrieval, &candidate_names_);
                for (const auto& s : cut.retained) offered.push_back(*env_.index->find(s.tool_name));
            } else {
                offered = candidates_;
            }
        }
        const std::string language = detect_user_language(utterance, env_.profile.default_language);

        for (std::size_t step = 0;; ++step) {
            if (model_calls_ >= cfg_.max_iterations) {
                halt(ErrorClass::recursion_limit,
                     "stopped after " + std::to_string(model_calls_) + " model calls",
                     "[halted] recursion limit reached");
                return;
            }
            ModelRequest req;
            req.task_id = f_.task_id;
            req.turn_index = turn;
            req.step_index = step;
            req.tools = offered;
            req.metadata = f_.metadata;
            if (intent) {
                req.system_prompt = compose_prompt(env_.profile, env_.templates, *intent, offered, session().summary,
                                                   language)
                                        .system_prompt;
            } else {
                req.system_prompt = compose_static_prompt(env_.templates, candidates_);
            }
            ModelCallRecord rec;
            rec.turn_index = turn;
            rec.step_index = step;
            rec.intent = intent ? intent->label() : std::string();
            rec.tools_offered = offered.size();
            rec.system_tokens = tok().count(req.system_prompt);
            for (const auto& m : session().messages) {
                // Adaptive prompts carry the summary themselves.
                if (intent && m.role == Role::system) continue;
                req.messages.push_back(m);
                rec.history_tokens += m.token_count;
            }
            result_.trace.input_tokens += rec.system_tokens + rec.history_tokens;
            ++model_calls_;

            ModelReply reply;
            try {
                reply = env_.model->complete(req);
                check_reply(reply);
            } catch (const std::exception& e) {
                result_.calls.push_back(rec);
                halt(ErrorClass::provider_error, env_.model->name() + ": " + e.what(),
                     "[halted] model provider error");
                return;
            }
            rec.output_tokens = reply.output_tokens;
            result_.trace.output_tokens += reply.output_tokens;
            result_.calls.push_back(rec);

            if (reply.final_answer) {
                append(Message::ai(*reply.final_answer));
                result_.trace.final_answer = *reply.final_answer;
                return;
            }
            for (std::size_t j = 0; j < reply.tool_calls.size(); ++j) {
                ToolCallRequest call = reply.tool_calls[j];
                if (call.call_id.empty() || used_ids_.count(call.call_id))
                    call.call_id = f_.task_id + "-call" + std::to_string(used_ids_.size());
                used_ids_.insert(call.call_id);
                if (!call.arguments.is_object()) call.arguments = Json::object();
                // One ai message per call keeps every turn in the 2 + 2k shape.
                append(Message::ai(j == 0 ? reply.reasoning : std::string(), {call}));
                dispatch(std::move(call), offered, utterance);
            }
        }
    }

    void dispatch(ToolCallRequest call, const std::vector<ToolSchema>& offered, const std::string& utterance) {
        auto it = std::find_if(offered.begin(), offered.end(),
                               [&](const ToolSchema& s) { return s.tool_name == call.tool_name; });
        ToolResult r;
        r.call_id = call.call_id;
        if (it == offered.end()) {
            r.error = ErrorClass::tool_not_found;
            r.content = "tool not available: " + call.tool_name;
        } else {
            normalize_urls(*it, call.arguments);
            auto v = validate_call(*it, call);
            if (auto* rej = std::get_if<ValidationResult>(&v)) {
                r.error = ErrorClass::invalid_arguments;
                r.content = rej->reason;
            } else {
                ValidatedCall vc = std::get<ValidatedCall>(std::move(v));
                if (it->cost_class == CostClass::expensive && cfg_.auto_confirm && keywords_match(*it, utterance))
                    vc = vc.with_confirmation();
                r = execute_with_retry(vc, cfg_, *transport_).result;
            }
        }
        auto& trace = result_.trace;
        trace.invoked.push_back({call.tool_name, call.arguments, r.ok() ? Outcome::ok : Outcome::error});
        std::string content = r.content;
        if (!r.ok()) {
            trace.error_events.push_back({*r.error, call.tool_name + ": " + r.content});
            content = "error[" + std::string(to_string(*r.error)) + "]: " +
                      (r.content.empty() ? std::string(to_string(PlaceholderReason::output_error)) : r.content);
        }
        append(Message::tool(call.call_id, std::move(content)));
    }

    const TaskFixture& f_;
    const EngineConfig& cfg_;
    const Environment& env_;
    std::vector<ToolSchema> candidates_;
    std::vector<std::string> candidate_names_;
    std::unique_ptr<FaultInjectingTransport> faults_;
    ToolTransport* transport_ = nullptr;
    RunResult result_;
    std::size_t model_calls_ = 0;
    bool halted_ = false;
    std::set<std::string> used_ids_;
};

}  // namespace

RunResult run_task(const TaskFixture& fixture, const EngineConfig& cfg, const Environment& env) {
    if (!env.model) throw ProviderUnavailable("no model provider configured");
    if (!env.index) throw ProviderUnavailable("no tool index configured");
    if (!env.transport) throw ProviderUnavailable("no tool transport configured");
    check_engine_config(cfg);
    check_fixture(fixture);
    return TaskRun(fixture, cfg, env).run();
}

}  // namespace agentkit
