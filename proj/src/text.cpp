#include "agentkit/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace agentkit::text {

std::vector<CodePoint> decode_utf8(std::string_view s) {
    std::vector<CodePoint> out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        const auto b0 = static_cast<unsigned char>(s[i]);
        std::size_t len = 0;
        char32_t cp = 0;
        if (b0 < 0x80) {
            len = 1;
            cp = b0;
        } else if ((b0 & 0xE0) == 0xC0) {
            len = 2;
            cp = b0 & 0x1F;
        } else if ((b0 & 0xF0) == 0xE0) {
            len = 3;
            cp = b0 & 0x0F;
        } else if ((b0 & 0xF8) == 0xF0) {
            len = 4;
            cp = b0 & 0x07;
        }
        bool ok = len != 0 && i + len <= s.size();
        for (std::size_t k = 1; ok && k < len; ++k) {
            const auto b = static_cast<unsigned char>(s[i + k]);
            if ((b & 0xC0) != 0x80) {
                ok = false;
            } else {
                cp = (cp << 6) | (b & 0x3F);
            }
        }
        if (ok) {
            // Reject overlong forms and surrogates.
            static constexpr std::array<char32_t, 5> min_for_len{0, 0, 0x80, 0x800, 0x10000};
            if (cp < min_for_len[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) ok = false;
        }
        if (ok) {
            out.push_back({cp, i, len, true});
            i += len;
        } else {
            out.push_back({b0, i, 1, false});
            i += 1;
        }
    }
    return out;
}

bool is_valid_utf8(std::string_view s) {
    const auto cps = decode_utf8(s);
    return std::all_of(cps.begin(), cps.end(), [](const CodePoint& c) { return c.valid; });
}

Script script_of(char32_t cp) noexcept {
    if ((cp >= 'A' && cp <= 'Z') || (cp >= 'a' && cp <= 'z') || (cp >= 0xC0 && cp <= 0x24F && cp != 0xD7 && cp != 0xF7) ||
        (cp >= 0x1E00 && cp <= 0x1EFF))
        return Script::latin;
    if ((cp >= 0x4E00 && cp <= 0x9FFF) || (cp >= 0x3400 && cp <= 0x4DBF) || (cp >= 0x20000 && cp <= 0x2A6DF) ||
        (cp >= 0xF900 && cp <= 0xFAFF))
        return Script::han;
    if ((cp >= 0x3040 && cp <= 0x30FF) || (cp >= 0x31F0 && cp <= 0x31FF)) return Script::kana;
    if ((cp >= 0xAC00 && cp <= 0xD7AF) || (cp >= 0x1100 && cp <= 0x11FF) || (cp >= 0x3130 && cp <= 0x318F))
        return Script::hangul;
    if (cp >= 0x0400 && cp <= 0x04FF) return Script::cyrillic;
    if (cp >= 0x0370 && cp <= 0x03FF) return Script::greek;
    if (cp >= 0x0600 && cp <= 0x06FF) return Script::arabic;
    if (cp >= 0x0590 && cp <= 0x05FF) return Script::hebrew;
    if (cp >= 0x0900 && cp <= 0x097F) return Script::devanagari;
    if (cp >= 0x0E00 && cp <= 0x0E7F) return Script::thai;
    return Script::other;
}

bool is_ideographic(char32_t cp) noexcept {
    const auto sc = script_of(cp);
    return sc == Script::han || sc == Script::kana || sc == Script::thai;
}

bool is_letter_or_digit(char32_t cp) noexcept {
    if (cp < 0x80) return std::isalnum(static_cast<int>(cp)) != 0;
    return script_of(cp) != Script::other;
}

namespace {

enum class Kind { space, word, single };

Kind kind_of(const CodePoint& c) {
    if (!c.valid) return Kind::single;
    const char32_t cp = c.value;
    if (cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' || cp == '\v' || cp == 0x3000 || cp == 0xA0)
        return Kind::space;
    if (is_ideographic(cp)) return Kind::single;
    if (cp == '_' || is_letter_or_digit(cp)) return Kind::word;
    return Kind::single;
}

}  // namespace

std::vector<std::string_view> split_tokens(std::string_view s) {
    std::vector<std::string_view> out;
    const auto cps = decode_utf8(s);
    std::size_t word_start = std::string_view::npos;
    auto flush = [&](std::size_t end) {
        if (word_start != std::string_view::npos) {
            out.push_back(s.substr(word_start, end - word_start));
            word_start = std::string_view::npos;
        }
    };
    for (const auto& c : cps) {
        switch (kind_of(c)) {
            case Kind::space:
                flush(c.offset);
                break;
            case Kind::word:
                if (word_start == std::string_view::npos) word_start = c.offset;
                break;
            case Kind::single:
                flush(c.offset);
                out.push_back(s.substr(c.offset, c.length));
                break;
        }
    }
    flush(s.size());
    return out;
}

std::vector<std::string> words(std::string_view s) {
    std::vector<std::string> out;
    for (auto tok : split_tokens(s)) {
        const auto cps = decode_utf8(tok);
        if (cps.size() == 1 && cps[0].valid && is_ideographic(cps[0].value)) {
            out.emplace_back(tok);
            continue;
        }
        if (cps.empty() || !cps[0].valid || !(cps[0].value == '_' || is_letter_or_digit(cps[0].value))) continue;
        std::string lowered = to_lower_ascii(tok);
        std::size_t start = 0;
        while (start <= lowered.size()) {
            const auto us = lowered.find('_', start);
            const auto piece = lowered.substr(start, us == std::string::npos ? std::string::npos : us - start);
            if (!piece.empty()) out.push_back(piece);
            if (us == std::string::npos) break;
            start = us + 1;
        }
    }
    return out;
}

std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    for (auto& ch : out) {
        if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
    }
    return out;
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

bool is_stopword(std::string_view w) noexcept {
    static constexpr std::array<std::string_view, 48> kStop{
        "a",    "an",   "the",  "and",  "or",   "of",   "to",   "in",   "on",   "for",  "at",   "by",
        "with", "is",   "are",  "was",  "be",   "it",   "this", "that", "me",   "my",   "i",    "you",
        "your", "we",   "our",  "please", "can", "could", "would", "will", "do", "does", "from", "as",
        "about", "into", "then", "some", "any", "all",  "what", "how",  "is",   "s",    "t",    "up"};
    return std::find(kStop.begin(), kStop.end(), w) != kStop.end();
}

std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace agentkit::text
