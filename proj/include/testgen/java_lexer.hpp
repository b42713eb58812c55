#pragma once

// Java token stream. Tokens keep their exact source slice plus position so
// the parser can report errors and the source model can cut raw signature
// text back out of the file. Comments are not tokens; their spans are
// collected separately for comment stripping.

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace testgen {

enum class Tok {
    Identifier,
    Keyword,
    Number,
    String,
    Char,
    Op,
    End,
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    int line = 0;  // 1-based
    int col = 0;   // 1-based
    size_t offset = 0;

    bool is(std::string_view t) const { return text == t; }
};

struct LexError {
    size_t offset = 0;
    int line = 0;
    int col = 0;
    std::string message;
};

struct CommentSpan {
    size_t begin = 0;
    size_t end = 0;  // exclusive
};

struct LexResult {
    bool ok = true;
    std::vector<Token> tokens;
    std::vector<CommentSpan> comments;
    LexError error;
};

inline const std::unordered_set<std::string_view>& java_keywords() {
    // The 50 reserved words (assert included).
    static const std::unordered_set<std::string_view> kw = {
        "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char",
        "class", "const", "continue", "default", "do", "double", "else", "enum",
        "extends", "final", "finally", "float", "for", "goto", "if", "implements",
        "import", "instanceof", "int", "interface", "long", "native", "new",
        "package", "private", "protected", "public", "return", "short", "static",
        "strictfp", "super", "switch", "synchronized", "this", "throw", "throws",
        "transient", "try", "void", "volatile", "while",
    };
    return kw;
}

namespace detail {

inline bool ident_start(unsigned char c) {
    return std::isalpha(c) || c == '_' || c == '$' || c >= 0x80;
}

inline bool ident_part(unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80;
}

inline const std::array<std::string_view, 24>& multi_ops() {
    static const std::array<std::string_view, 24> ops = {
        ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "==", "!=", "<=", ">=",
        "&&",   "||",  "++",  "--",  "+=",  "-=", "*=", "/=", "%=", "&=", "|=",
        "^=",   ">>",
    };
    return ops;
}

}  // namespace detail

inline LexResult lex_java(std::string_view text) {
    LexResult res;
    size_t i = 0;
    int line = 1;
    int col = 1;

    auto advance = [&](size_t n) {
        for (size_t k = 0; k < n; ++k) {
            if (text[i + k] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        i += n;
    };
    auto fail = [&](std::string msg, size_t at, int at_line, int at_col) {
        res.ok = false;
        res.error = LexError{at, at_line, at_col, std::move(msg)};
    };
    auto push = [&](Tok kind, size_t begin, int tline, int tcol) {
        res.tokens.push_back(Token{kind, std::string(text.substr(begin, i - begin)), tline, tcol, begin});
    };

    while (i < text.size()) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (std::isspace(c)) {
            advance(1);
            continue;
        }
        int tline = line, tcol = col;
        size_t begin = i;

        if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
            while (i < text.size() && text[i] != '\n') advance(1);
            res.comments.push_back({begin, i});
            continue;
        }
        if (c == '/' && i + 1 < text.size() && text[i + 1] == '*') {
            advance(2);
            bool closed = false;
            while (i + 1 < text.size()) {
                if (text[i] == '*' && text[i + 1] == '/') {
                    advance(2);
                    closed = true;
                    break;
                }
                advance(1);
            }
            if (!closed) {
                fail("unterminated block comment", begin, tline, tcol);
                return res;
            }
            res.comments.push_back({begin, i});
            continue;
        }
        if (c == '"') {
            // Text block?
            if (text.compare(i, 3, "\"\"\"") == 0) {
                advance(3);
                bool closed = false;
                while (i < text.size()) {
                    if (text[i] == '\\' && i + 1 < text.size()) {
                        advance(2);
                        continue;
                    }
                    if (text.compare(i, 3, "\"\"\"") == 0) {
                        advance(3);
                        closed = true;
                        break;
                    }
                    advance(1);
                }
                if (!closed) {
                    fail("unterminated text block", begin, tline, tcol);
                    return res;
                }
                push(Tok::String, begin, tline, tcol);
                continue;
            }
            advance(1);
            bool closed = false;
            while (i < text.size() && text[i] != '\n') {
                if (text[i] == '\\' && i + 1 < text.size()) {
                    advance(2);
                    continue;
                }
                if (text[i] == '"') {
                    advance(1);
                    closed = true;
                    break;
                }
                advance(1);
            }
            if (!closed) {
                fail("unterminated string literal", begin, tline, tcol);
                return res;
            }
            push(Tok::String, begin, tline, tcol);
            continue;
        }
        if (c == '\'') {
            advance(1);
            bool closed = false;
            while (i < text.size() && text[i] != '\n') {
                if (text[i] == '\\' && i + 1 < text.size()) {
                    advance(2);
                    continue;
                }
                if (text[i] == '\'') {
                    advance(1);
                    closed = true;
                    break;
                }
                advance(1);
            }
            if (!closed) {
                fail("unterminated char literal", begin, tline, tcol);
                return res;
            }
            push(Tok::Char, begin, tline, tcol);
            continue;
        }
        if (std::isdigit(c) || (c == '.' && i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
            // Loose numeric scan: digits, radix prefixes, underscores, fraction,
            // exponent (sign only straight after e/E/p/P), suffix letters.
            advance(1);
            while (i < text.size()) {
                unsigned char d = static_cast<unsigned char>(text[i]);
                if (std::isalnum(d) || d == '_' || d == '.') {
                    advance(1);
                    continue;
                }
                if ((d == '+' || d == '-') && (text[i - 1] == 'e' || text[i - 1] == 'E' ||
                                               text[i - 1] == 'p' || text[i - 1] == 'P')) {
                    advance(1);
                    continue;
                }
                break;
            }
            push(Tok::Number, begin, tline, tcol);
            continue;
        }
        if (detail::ident_start(c)) {
            advance(1);
            while (i < text.size() && detail::ident_part(static_cast<unsigned char>(text[i]))) {
                advance(1);
            }
            std::string_view word = text.substr(begin, i - begin);
            push(java_keywords().count(word) ? Tok::Keyword : Tok::Identifier, begin, tline, tcol);
            continue;
        }
        bool matched = false;
        for (std::string_view op : detail::multi_ops()) {
            if (text.compare(i, op.size(), op) == 0) {
                advance(op.size());
                push(Tok::Op, begin, tline, tcol);
                matched = true;
                break;
            }
        }
        if (matched) continue;
        if (std::string_view("(){}[];,.<>=+-*/%&|^!~?:@").find(static_cast<char>(c)) != std::string_view::npos) {
            advance(1);
            push(Tok::Op, begin, tline, tcol);
            continue;
        }
        fail(std::string("unexpected character '") + static_cast<char>(c) + "'", begin, tline, tcol);
        return res;
    }
    res.tokens.push_back(Token{Tok::End, "", line, col, text.size()});
    return res;
}

// Source text with comments replaced by a single space (line structure of
// multi-line comments is not preserved).
inline std::string strip_comments(std::string_view text) {
    LexResult lexed = lex_java(text);
    std::string out;
    size_t pos = 0;
    for (const CommentSpan& span : lexed.comments) {
        if (span.begin > pos) out.append(text.substr(pos, span.begin - pos));
        out.push_back(' ');
        pos = span.end;
    }
    if (pos < text.size()) out.append(text.substr(pos));
    return out;
}

}  // namespace testgen
