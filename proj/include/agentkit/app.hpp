#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "agentkit/config.hpp"
#include "agentkit/evalkit.hpp"
#include "agentkit/wire.hpp"

// Builds the provider graph described by a resolved Config.
namespace agentkit {

// Bundled registry, fixtures, profile and templates.
std::filesystem::path default_data_dir();

EngineConfig engine_config_from(const Config& cfg);

class App {
public:
    // Throws ConfigError, IoError, MalformedRecord or ProviderUnavailable.
    static std::unique_ptr<App> build(const Config& cfg);

    const Environment& env() const noexcept { return env_; }
    const EngineConfig& engine() const noexcept { return engine_; }
    std::shared_ptr<const Judge> judge() const noexcept { return judge_; }
    const std::vector<ToolSchema>& tools() const noexcept { return env_.index->tools(); }
    // One line per provider, e.g. "model=double embedding=hashing(1024) ...".
    std::string describe() const;

private:
    App() = default;

    std::unique_ptr<ToolHost> host_;
    std::unique_ptr<InProcessTransport> local_;
    std::unique_ptr<wire::WireClient> remote_;
    Environment env_;
    EngineConfig engine_;
    std::shared_ptr<const Judge> judge_;
    std::string description_;
};

// Task ids of fixtures whose candidate tools are missing from the tool list,
// each with the first missing name.
std::vector<std::string> fixture_registry_problems(const std::vector<TaskFixture>& fixtures,
                                                   const std::vector<ToolSchema>& tools);

}  // namespace agentkit
