// Serves the bundled mock registry over the length-prefixed JSON wire protocol.
#include <csignal>
#include <iostream>

#include "CLI11.hpp"

#include "agentkit/app.hpp"
#include "agentkit/errors.hpp"

int main(int argc, char** argv) {
    CLI::App cli{"mock_tool_server: serve a tool registry on 127.0.0.1"};
    std::string registry = (agentkit::default_data_dir() / "registry.jsonl").string();
    unsigned port = 0;
    cli.add_option("--registry", registry, "Registry file")->capture_default_str();
    cli.add_option("--port", port, "Port (0 picks a free one)")->check(CLI::Range(0u, 65535u));
    CLI11_PARSE(cli, argc, argv);

    // Block the stop signals before any thread starts so sigwait sees them.
    sigset_t stop;
    sigemptyset(&stop);
    sigaddset(&stop, SIGINT);
    sigaddset(&stop, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &stop, nullptr);

    try {
        agentkit::ToolHost host;
        agentkit::populate_mock_host(host, agentkit::load_registry(registry));
        agentkit::wire::WireServer server(host, static_cast<std::uint16_t>(port));
        server.start();
        std::cout << "listening on 127.0.0.1:" << server.port() << " (" << host.size() << " tools)" << std::endl;
        int sig = 0;
        sigwait(&stop, &sig);
        server.stop();
    } catch (const agentkit::Error& e) {
        std::cerr << "mock_tool_server: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
