#pragma once

// Line-oriented record format used for every structured artifact: one record
// per line, fields TAB-separated, each field "key=value". Value bytes that
// would break the framing (%, TAB, LF, CR) are percent-escaped.

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "testgen/util.hpp"

namespace testgen {

using Record = std::vector<std::pair<std::string, std::string>>;

struct RecordError : std::runtime_error {
    explicit RecordError(const std::string& msg) : std::runtime_error(msg) {}
};

inline std::string escape_field(std::string_view value) {
    std::string out;
    out.reserve(value.size());
    for (char c : value) {
        switch (c) {
            case '%': out += "%25"; break;
            case '\t': out += "%09"; break;
            case '\n': out += "%0A"; break;
            case '\r': out += "%0D"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

inline std::string unescape_field(std::string_view value) {
    std::string out;
    out.reserve(value.size());
    for (size_t i = 0; i < value.size(); ++i) {
        if (value[i] == '%' && i + 2 < value.size()) {
            std::string_view code = value.substr(i + 1, 2);
            if (code == "25") { out.push_back('%'); i += 2; continue; }
            if (code == "09") { out.push_back('\t'); i += 2; continue; }
            if (code == "0A") { out.push_back('\n'); i += 2; continue; }
            if (code == "0D") { out.push_back('\r'); i += 2; continue; }
        }
        out.push_back(value[i]);
    }
    return out;
}

inline std::string encode_record(const Record& rec) {
    std::string out;
    for (size_t i = 0; i < rec.size(); ++i) {
        if (i) out.push_back('\t');
        out += rec[i].first;
        out.push_back('=');
        out += escape_field(rec[i].second);
    }
    return out;
}

inline Record decode_record(std::string_view line) {
    Record rec;
    size_t start = 0;
    while (start <= line.size()) {
        size_t tab = line.find('\t', start);
        std::string_view field =
            tab == std::string_view::npos ? line.substr(start) : line.substr(start, tab - start);
        size_t eq = field.find('=');
        if (eq == std::string_view::npos) {
            throw RecordError("malformed record field: " + std::string(field));
        }
        rec.emplace_back(std::string(field.substr(0, eq)), unescape_field(field.substr(eq + 1)));
        if (tab == std::string_view::npos) break;
        start = tab + 1;
    }
    return rec;
}

inline std::optional<std::string> record_get(const Record& rec, std::string_view key) {
    for (const auto& [k, v] : rec) {
        if (k == key) return v;
    }
    return std::nullopt;
}

inline std::string record_require(const Record& rec, std::string_view key) {
    auto v = record_get(rec, key);
    if (!v) {
        throw RecordError("missing record key: " + std::string(key));
    }
    return *v;
}

inline std::vector<Record> parse_records(std::string_view text) {
    std::vector<Record> out;
    for (const auto& line : split_lines(text)) {
        if (line.empty()) continue;
        out.push_back(decode_record(line));
    }
    return out;
}

inline std::string serialize_records(const std::vector<Record>& records) {
    std::string out;
    for (const auto& rec : records) {
        out += encode_record(rec);
        out.push_back('\n');
    }
    return out;
}

inline std::vector<Record> read_records(const std::filesystem::path& path) {
    return parse_records(read_file(path));
}

inline void write_records(const std::filesystem::path& path, const std::vector<Record>& records) {
    write_file(path, serialize_records(records));
}

}  // namespace testgen
