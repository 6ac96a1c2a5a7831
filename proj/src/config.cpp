#include "agentkit/config.hpp"

#include <algorithm>
#include <charconv>

#include "agentkit/errors.hpp"
#include "agentkit/text.hpp"

namespace agentkit {

const std::vector<ConfigKey>& known_config_keys() {
    using T = ConfigType;
    static const std::vector<ConfigKey> keys{
        {"engine.max_iterations", T::integer, 12},
        {"engine.retry.transient_network", T::integer, 2},
        {"engine.retry.timeout", T::integer, 2},
        {"engine.retry.invalid_arguments", T::integer, 0},
        {"engine.retry.tool_not_found", T::integer, 0},
        {"engine.retry.tool_crash", T::integer, 0},
        {"engine.retry.provider_error", T::integer, 0},
        {"engine.retry.recursion_limit", T::integer, 0},
        {"engine.ablation.prompt", T::boolean, true},
        {"engine.ablation.retrieval", T::boolean, true},
        {"engine.ablation.memory", T::boolean, true},
        {"engine.auto_confirm", T::boolean, true},
        {"tokenizer.provider", T::text, "default"},
        {"retrieval.top_m", T::integer, 50},
        {"retrieval.min_retained", T::integer, 10},
        {"retrieval.jump_min_gap", T::real, 0.05},
        {"embedding.provider", T::text, "auto"},
        {"embedding.dimension", T::integer, 1024},
        {"embedding.url", T::text, ""},
        {"embedding.model", T::text, ""},
        {"embedding.api_key", T::text, "", true},
        {"memory.summarize_threshold", T::integer, 30},
        {"memory.compression_target", T::real, 0.40},
        {"memory.summarizer.provider", T::text, "extractive"},
        {"model.provider", T::text, "auto"},
        {"model.url", T::text, ""},
        {"model.name", T::text, ""},
        {"model.api_key", T::text, "", true},
        {"model.timeout_ms", T::integer, 60000},
        {"judge.provider", T::text, "stub"},
        {"tools.registry", T::text, ""},
        {"tools.server", T::text, ""},
        {"tools.timeout_ms", T::integer, 0},
        {"prompt.profile", T::text, ""},
        {"prompt.template_dir", T::text, ""},
        {"eval.lambda_w", T::real, 1.0},
        {"eval.lambda_m", T::real, 1.0},
        {"eval.jobs", T::integer, 1},
    };
    return keys;
}

std::string env_name_for(std::string_view key) {
    std::string out = "AGENTKIT_";
    for (char c : key) out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

namespace {

const ConfigKey& spec_for(std::string_view key) {
    const auto& keys = known_config_keys();
    auto it = std::find_if(keys.begin(), keys.end(), [&](const ConfigKey& k) { return k.key == key; });
    if (it == keys.end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
    return *it;
}

void flatten(const Json& j, const std::string& prefix, std::vector<std::pair<std::string, Json>>& out) {
    for (const auto& [k, v] : j.items()) {
        const std::string key = prefix.empty() ? k : prefix + "." + k;
        if (v.is_object()) {
            flatten(v, key, out);
        } else {
            out.emplace_back(key, v);
        }
    }
}

}  // namespace

Config::Config() {
    for (const auto& k : known_config_keys()) values_[k.key] = k.default_value;
}

void Config::assign(const ConfigKey& spec, Json v, std::string_view origin) {
    auto bad = [&](const char* want) {
        return ConfigError(std::string(origin) + ": " + spec.key + " must be " + want + ", got " + v.dump());
    };
    switch (spec.type) {
        case ConfigType::integer:
            if (!v.is_number_integer()) throw bad("an integer");
            if (v.get<long long>() < 0) throw bad("nonnegative");
            break;
        case ConfigType::real:
            if (!v.is_number()) throw bad("a number");
            v = v.get<double>();
            break;
        case ConfigType::boolean:
            if (!v.is_boolean()) throw bad("true or false");
            break;
        case ConfigType::text:
            if (!v.is_string()) throw bad("a string");
            break;
    }
    values_[spec.key] = std::move(v);
}

void Config::merge_json(const Json& j, std::string_view origin) {
    if (!j.is_object()) throw ConfigError(std::string(origin) + ": config must be a JSON object");
    std::vector<std::pair<std::string, Json>> flat;
    flatten(j, "", flat);
    for (auto& [k, v] : flat) assign(spec_for(k), std::move(v), origin);
}

void Config::merge_file(const std::filesystem::path& path) {
    std::string bytes;
    try {
        bytes = read_file(path);
    } catch (const IoError& e) {
        throw ConfigError(e.what());
    }
    Json j;
    try {
        j = Json::parse(bytes);
    } catch (const Json::parse_error& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
    merge_json(j, path.string());
}

void Config::merge_env(const std::function<const char*(const char*)>& lookup) {
    for (const auto& k : known_config_keys()) {
        const auto name = env_name_for(k.key);
        if (const char* v = lookup(name.c_str())) set(k.key, v, name);
    }
}

void Config::set(std::string_view key, std::string_view value, std::string_view origin) {
    const auto& spec = spec_for(key);
    const std::string v = text::trim(value);
    auto fail = [&](const char* want) {
        return ConfigError(std::string(origin) + ": " + spec.key + " must be " + want + ", got '" + v + "'");
    };
    switch (spec.type) {
        case ConfigType::integer: {
            long long n = 0;
            auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
            if (ec != std::errc() || p != v.data() + v.size()) throw fail("an integer");
            assign(spec, n, origin);
            return;
        }
        case ConfigType::real: {
            try {
                std::size_t used = 0;
                const double d = std::stod(v, &used);
                if (used != v.size()) throw fail("a number");
                assign(spec, d, origin);
            } catch (const std::logic_error&) {
                throw fail("a number");
            }
            return;
        }
        case ConfigType::boolean: {
            const auto l = text::to_lower_ascii(v);
            if (l == "true" || l == "1" || l == "yes" || l == "on") {
                assign(spec, true, origin);
            } else if (l == "false" || l == "0" || l == "no" || l == "off") {
                assign(spec, false, origin);
            } else {
                throw fail("true or false");
            }
            return;
        }
        case ConfigType::text: assign(spec, std::string(value), origin); return;
    }
}

const Json& Config::get(std::string_view key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
    return it->second;
}

Json Config::to_json() const {
    Json out = Json::object();
    for (const auto& k : known_config_keys()) {
        if (k.secret) continue;
        out[k.key] = values_.at(k.key);
    }
    return out;
}

}  // namespace agentkit
