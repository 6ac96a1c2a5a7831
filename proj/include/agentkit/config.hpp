#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "agentkit/trace_model.hpp"

// Flat dotted-key configuration resolved as defaults < file < environment < flags.
namespace agentkit {

enum class ConfigType { integer, real, boolean, text };

struct ConfigKey {
    std::string key;
    ConfigType type;
    Json default_value;
    bool secret = false;  // never printed
};

const std::vector<ConfigKey>& known_config_keys();

// AGENTKIT_ + upper-cased key with dots replaced by underscores.
std::string env_name_for(std::string_view key);

class Config {
public:
    Config();  // defaults

    // JSON object; nested objects are flattened to dotted keys. Unknown keys
    // and mistyped values throw ConfigError.
    void merge_json(const Json& j, std::string_view origin);
    void merge_file(const std::filesystem::path& path);
    void merge_env(const std::function<const char*(const char*)>& lookup);
    // Parses `value` according to the key's type. Throws ConfigError.
    void set(std::string_view key, std::string_view value, std::string_view origin = "flag");

    const Json& get(std::string_view key) const;
    long long get_int(std::string_view key) const { return get(key).get<long long>(); }
    double get_real(std::string_view key) const { return get(key).get<double>(); }
    bool get_bool(std::string_view key) const { return get(key).get<bool>(); }
    std::string get_text(std::string_view key) const { return get(key).get<std::string>(); }

    // Flat object with sorted keys; secrets omitted. Feeding it back through
    // merge_json reproduces this configuration.
    Json to_json() const;

private:
    void assign(const ConfigKey& spec, Json value, std::string_view origin);
    std::map<std::string, Json, std::less<>> values_;
};

}  // namespace agentkit
