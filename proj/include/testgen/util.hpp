#pragma once

// Shared helpers: file IO, FNV hashing, path globs, string utilities.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace testgen {

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open file: " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view data) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write file: " + path.string());
    }
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

inline constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ull;

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = kFnvOffset) {
    for (unsigned char c : s) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

inline std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    size_t start = 0;
    while (start <= text.size()) {
        size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.emplace_back(text.substr(start));
            break;
        }
        lines.emplace_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

// Number of newline-delimited lines; a trailing newline does not open a new line.
inline int count_lines(std::string_view text) {
    if (text.empty()) {
        return 0;
    }
    int n = 1;
    for (size_t i = 0; i + 1 < text.size(); ++i) {
        if (text[i] == '\n') {
            ++n;
        }
    }
    return n;
}

inline long round_half_up(double x) { return static_cast<long>(std::floor(x + 0.5)); }

inline std::string trim(std::string_view s) {
    size_t b = 0;
    size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            in_space = true;
            continue;
        }
        if (in_space && !out.empty()) {
            out.push_back(' ');
        }
        in_space = false;
        out.push_back(c);
    }
    return out;
}

inline std::string replace_all(std::string_view s, std::string_view from, std::string_view to) {
    std::string out;
    size_t pos = 0;
    while (pos < s.size()) {
        size_t hit = s.find(from, pos);
        if (hit == std::string_view::npos) {
            out.append(s.substr(pos));
            break;
        }
        out.append(s.substr(pos, hit - pos));
        out.append(to);
        pos = hit + from.size();
    }
    return out;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i) out.append(sep);
        out.append(parts[i]);
    }
    return out;
}

namespace detail {

inline bool glob_segment_match(std::string_view pat, std::string_view seg) {
    // '*' and '?' within one path segment.
    size_t p = 0, s = 0, star = std::string_view::npos, mark = 0;
    while (s < seg.size()) {
        if (p < pat.size() && (pat[p] == '?' || pat[p] == seg[s])) {
            ++p;
            ++s;
        } else if (p < pat.size() && pat[p] == '*') {
            star = p++;
            mark = s;
        } else if (star != std::string_view::npos) {
            p = star + 1;
            s = ++mark;
        } else {
            return false;
        }
    }
    while (p < pat.size() && pat[p] == '*') ++p;
    return p == pat.size();
}

inline std::vector<std::string_view> split_segments(std::string_view path) {
    std::vector<std::string_view> segs;
    size_t start = 0;
    while (start <= path.size()) {
        size_t slash = path.find('/', start);
        if (slash == std::string_view::npos) {
            segs.push_back(path.substr(start));
            break;
        }
        segs.push_back(path.substr(start, slash - start));
        start = slash + 1;
    }
    return segs;
}

inline bool glob_match_segments(const std::vector<std::string_view>& pat, size_t pi,
                                const std::vector<std::string_view>& segs, size_t si) {
    if (pi == pat.size()) {
        return si == segs.size();
    }
    if (pat[pi] == "**") {
        for (size_t skip = si; skip <= segs.size(); ++skip) {
            if (glob_match_segments(pat, pi + 1, segs, skip)) {
                return true;
            }
        }
        return false;
    }
    if (si == segs.size()) {
        return false;
    }
    return glob_segment_match(pat[pi], segs[si]) && glob_match_segments(pat, pi + 1, segs, si + 1);
}

}  // namespace detail

// Matches '/'-separated relative paths: '**' spans directories, '*'/'?' stay in a segment.
inline bool glob_match(std::string_view pattern, std::string_view path) {
    return detail::glob_match_segments(detail::split_segments(pattern), 0,
                                       detail::split_segments(path), 0);
}

// Relative paths (generic '/' form) under root matching the glob, sorted.
inline std::vector<std::string> list_files(const std::filesystem::path& root, std::string_view glob) {
    std::vector<std::string> out;
    if (!std::filesystem::exists(root)) {
        return out;
    }
    for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) {
            continue;
        }
        std::string rel = std::filesystem::relative(entry.path(), root).generic_string();
        if (glob_match(glob, rel)) {
            out.push_back(std::move(rel));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace testgen
