#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// UTF-8 and token helpers shared by the tokenizer, the test embedder, the intent
// rules and the stub judge.
namespace agentkit::text {

enum class Script { latin, han, kana, hangul, cyrillic, greek, arabic, hebrew, devanagari, thai, other };

struct CodePoint {
    char32_t value;
    std::size_t offset;  // byte offset of the first byte
    std::size_t length;  // encoded length in bytes (1 for invalid bytes)
    bool valid;
};

// Decodes `s`; invalid bytes come back one at a time with valid=false.
std::vector<CodePoint> decode_utf8(std::string_view s);
bool is_valid_utf8(std::string_view s);

Script script_of(char32_t cp) noexcept;
bool is_letter_or_digit(char32_t cp) noexcept;
// Scripts written without spaces, tokenized one character at a time.
bool is_ideographic(char32_t cp) noexcept;

// Raw token split: runs of letters/digits/underscore, every ideographic character,
// and every other non-space character on its own.
std::vector<std::string_view> split_tokens(std::string_view s);

// Lowercased alphanumeric words, underscores treated as separators and
// punctuation dropped. Used wherever "the words of a text" are meant.
std::vector<std::string> words(std::string_view s);

std::string to_lower_ascii(std::string_view s);
std::string trim(std::string_view s);

bool is_stopword(std::string_view lowered_word) noexcept;

std::uint64_t fnv1a64(std::string_view s) noexcept;

}  // namespace agentkit::text
