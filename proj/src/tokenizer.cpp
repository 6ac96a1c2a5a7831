#include "agentkit/tokenizer.hpp"

#include "agentkit/errors.hpp"
#include "agentkit/text.hpp"

namespace agentkit {

std::size_t DefaultTokenizer::count(std::string_view text) const { return text::split_tokens(text).size(); }

std::size_t count_tokens(std::string_view text, const Tokenizer& tokenizer) { return tokenizer.count(text); }

std::shared_ptr<const Tokenizer> make_tokenizer(std::string_view provider) {
    if (provider.empty() || provider == "default") return std::make_shared<DefaultTokenizer>();
    throw ConfigError("unknown tokenizer.provider '" + std::string(provider) + "'");
}

}  // namespace agentkit
