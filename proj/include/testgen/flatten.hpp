#pragma once

// Lossless single-line flattening. Newlines become the literal token [EOL];
// sentinel tokens already present in the source text are backslash-escaped,
// as are backslashes themselves, so decode_flat is an exact inverse for
// arbitrary input (including text that contains [EOL], [TCS] or any of the
// focal-context field markers).

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace testgen {

inline constexpr std::string_view kEol = "[EOL]";
inline constexpr std::string_view kTcs = "[TCS]";
inline constexpr std::string_view kSep = "<SEP>";
inline constexpr std::string_view kMarkLine = "<LINE>";
inline constexpr std::string_view kMarkFm = "<FM>";
inline constexpr std::string_view kMarkFc = "<FC>";
inline constexpr std::string_view kMarkCtor = "<C>";
inline constexpr std::string_view kMarkMethods = "<M>";
inline constexpr std::string_view kMarkFields = "<F>";
inline constexpr std::string_view kMarkItem = "<;>";

inline constexpr std::array<std::string_view, 9> kSentinels = {
    kEol, kTcs, kSep, kMarkLine, kMarkFm, kMarkFc, kMarkCtor, kMarkMethods, kMarkFields,
};

// kMarkItem is escaped too; it is listed separately because it only separates
// entries inside an already-encoded field.
inline constexpr std::array<std::string_view, 10> kEscapedTokens = {
    kEol, kTcs, kSep, kMarkLine, kMarkFm, kMarkFc, kMarkCtor, kMarkMethods, kMarkFields, kMarkItem,
};

namespace detail {

inline std::string_view token_at(std::string_view text, size_t pos) {
    for (std::string_view tok : kEscapedTokens) {
        if (text.compare(pos, tok.size(), tok) == 0) {
            return tok;
        }
    }
    return {};
}

}  // namespace detail

inline std::string encode_flat(std::string_view text) {
    std::string out;
    out.reserve(text.size() + 8);
    for (size_t i = 0; i < text.size();) {
        char c = text[i];
        if (c == '\\') {
            out += "\\\\";
            ++i;
            continue;
        }
        if (c == '\n') {
            out += kEol;
            ++i;
            continue;
        }
        std::string_view tok = detail::token_at(text, i);
        if (!tok.empty()) {
            out.push_back('\\');
            out += tok;
            i += tok.size();
            continue;
        }
        out.push_back(c);
        ++i;
    }
    return out;
}

inline std::string decode_flat(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (size_t i = 0; i < text.size();) {
        char c = text[i];
        if (c == '\\' && i + 1 < text.size()) {
            if (text[i + 1] == '\\') {
                out.push_back('\\');
                i += 2;
                continue;
            }
            std::string_view tok = detail::token_at(text, i + 1);
            if (!tok.empty()) {
                out += tok;
                i += 1 + tok.size();
                continue;
            }
        }
        if (text.compare(i, kEol.size(), kEol) == 0) {
            out.push_back('\n');
            i += kEol.size();
            continue;
        }
        out.push_back(c);
        ++i;
    }
    return out;
}

// First occurrence of token at or after `from` that is not backslash-escaped
// (an odd run of preceding backslashes marks an escape).
inline size_t find_unescaped(std::string_view text, std::string_view token, size_t from = 0) {
    size_t pos = from;
    while (true) {
        pos = text.find(token, pos);
        if (pos == std::string_view::npos) {
            return std::string_view::npos;
        }
        size_t backslashes = 0;
        while (backslashes < pos && text[pos - 1 - backslashes] == '\\') {
            ++backslashes;
        }
        if (backslashes % 2 == 0) {
            return pos;
        }
        pos += 1;
    }
}

inline std::vector<std::string> split_unescaped(std::string_view text, std::string_view token) {
    std::vector<std::string> parts;
    size_t start = 0;
    while (true) {
        size_t hit = find_unescaped(text, token, start);
        if (hit == std::string_view::npos) {
            parts.emplace_back(text.substr(start));
            return parts;
        }
        parts.emplace_back(text.substr(start, hit - start));
        start = hit + token.size();
    }
}

}  // namespace testgen
