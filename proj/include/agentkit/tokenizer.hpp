#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>

namespace agentkit {

// Token counting used for all input/output accounting. Implementations must be
// deterministic and safe to call concurrently.
class Tokenizer {
public:
    virtual ~Tokenizer() = default;
    virtual std::size_t count(std::string_view text) const = 0;
    virtual std::string name() const = 0;
};

// Whitespace-plus-punctuation splitter: each run of letters/digits/underscore is
// one token, each punctuation mark is one token, and each CJK/kana/Thai
// character is one token. Whitespace separates and is never counted.
class DefaultTokenizer final : public Tokenizer {
public:
    std::size_t count(std::string_view text) const override;
    std::string name() const override { return "default"; }
};

std::size_t count_tokens(std::string_view text, const Tokenizer& tokenizer);

std::shared_ptr<const Tokenizer> make_tokenizer(std::string_view provider);

}  // namespace agentkit
