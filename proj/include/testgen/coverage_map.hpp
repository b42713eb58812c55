#pragma once

// Coverage database and the line-to-test inversion. Per-test reports are a
// Clover XML subset (project/package/file/line with num/count/type), one file
// per test, named coverage-<testid>.xml. The root carries the test identity:
//
//   <coverage test="com.foo.BarTest#testBaz"
//             testclass="com.foo.BarTest"
//             testpath="src/test/java/com/foo/BarTest.java">
//     <project><package name="com.foo">
//       <file name="Foo.java" path="src/main/java/com/foo/Foo.java">
//         <line num="3" count="1" type="stmt"/>
//       </file>
//     </package></project>
//   </coverage>

#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "testgen/util.hpp"
#include "testgen/xml.hpp"

namespace testgen {

struct MalformedReport : std::runtime_error {
    size_t position;
    MalformedReport(const std::string& msg, size_t pos)
        : std::runtime_error("malformed coverage report: " + msg), position(pos) {}
};

struct UnknownSchemaVersion : std::runtime_error {
    explicit UnknownSchemaVersion(const std::string& root)
        : std::runtime_error("unknown coverage schema, root element: " + root) {}
};

struct TestCoverage {
    std::string class_name;
    std::string classpath;
    std::vector<std::pair<std::string, int>> covered;  // document order, deduplicated
};

struct CoverageReport {
    std::vector<std::string> test_order;  // ingestion order
    std::map<std::string, TestCoverage> tests;
    // Every line the reports mention, hit or not: the countable-line universe.
    std::set<std::pair<std::string, int>> line_universe;

    bool empty() const { return tests.empty(); }
};

namespace detail {

inline void collect_lines(const XmlNode& node, const std::string& file_path,
                          std::vector<std::pair<std::string, int>>& covered,
                          std::set<std::pair<std::string, int>>& seen,
                          std::set<std::pair<std::string, int>>& universe) {
    if (node.name == "line") {
        const std::string* num = node.attr("num");
        const std::string* count = node.attr("count");
        if (num == nullptr) {
            throw MalformedReport("line element without num attribute", 0);
        }
        int line = 0;
        long hits = 0;
        try {
            line = std::stoi(*num);
            hits = count ? std::stol(*count) : 0;
        } catch (const std::exception&) {
            throw MalformedReport("non-numeric line attributes", 0);
        }
        if (line <= 0) {
            throw MalformedReport("line number must be positive", 0);
        }
        universe.insert({file_path, line});
        if (hits > 0 && seen.insert({file_path, line}).second) {
            covered.emplace_back(file_path, line);
        }
        return;
    }
    for (const XmlNode& child : node.children) {
        collect_lines(child, file_path, covered, seen, universe);
    }
}

inline void walk_files(const XmlNode& node, const std::string& package_name, TestCoverage& out,
                       std::set<std::pair<std::string, int>>& seen,
                       std::set<std::pair<std::string, int>>& universe) {
    if (node.name == "file") {
        const std::string* path = node.attr("path");
        std::string file_path;
        if (path != nullptr) {
            file_path = *path;
        } else {
            const std::string* name = node.attr("name");
            if (name == nullptr) {
                throw MalformedReport("file element without path or name", 0);
            }
            file_path = package_name.empty()
                            ? *name
                            : replace_all(package_name, ".", "/") + "/" + *name;
        }
        for (const XmlNode& child : node.children) {
            collect_lines(child, file_path, out.covered, seen, universe);
        }
        return;
    }
    std::string pkg = package_name;
    if (node.name == "package") {
        if (const std::string* name = node.attr("name")) {
            pkg = *name;
        }
    }
    for (const XmlNode& child : node.children) {
        walk_files(child, pkg, out, seen, universe);
    }
}

inline std::string testid_from_filename(const std::filesystem::path& file) {
    std::string stem = file.stem().string();
    if (stem.starts_with("coverage-")) {
        return stem.substr(std::string_view("coverage-").size());
    }
    return stem;
}

}  // namespace detail

// Single per-test report. The test id comes from the root's `test` attribute
// or, failing that, from the report filename convention.
inline CoverageReport ingest_clover(std::string_view xml_text, const std::string& testid_hint = "") {
    XmlNode root;
    try {
        root = parse_xml(xml_text);
    } catch (const XmlError& e) {
        throw MalformedReport(e.what(), e.position);
    }
    if (root.name != "coverage" && root.name != "clover") {
        throw UnknownSchemaVersion(root.name);
    }
    std::string testid = testid_hint;
    if (const std::string* t = root.attr("test")) {
        testid = *t;
    }
    if (testid.empty()) {
        throw MalformedReport("test id missing (no test attribute and no filename hint)", 0);
    }
    TestCoverage cov;
    if (const std::string* cls = root.attr("testclass")) {
        cov.class_name = *cls;
    } else {
        cov.class_name = testid.substr(0, testid.find('#'));
    }
    if (const std::string* path = root.attr("testpath")) {
        cov.classpath = *path;
    }
    if (cov.classpath.empty()) {
        throw MalformedReport("test " + testid + " has no recorded classpath (testpath attribute)",
                              0);
    }
    CoverageReport report;
    std::set<std::pair<std::string, int>> seen;
    detail::walk_files(root, "", cov, seen, report.line_universe);
    report.test_order.push_back(testid);
    report.tests.emplace(std::move(testid), std::move(cov));
    return report;
}

inline CoverageReport ingest_clover_file(const std::filesystem::path& file) {
    return ingest_clover(read_file(file), detail::testid_from_filename(file));
}

inline void merge_reports(CoverageReport& into, CoverageReport&& other) {
    into.line_universe.insert(other.line_universe.begin(), other.line_universe.end());
    for (std::string& id : other.test_order) {
        auto node = other.tests.extract(id);
        if (into.tests.count(id)) {
            // Same test reported twice: union the line sets, keep first metadata.
            TestCoverage& dst = into.tests[id];
            std::set<std::pair<std::string, int>> seen(dst.covered.begin(), dst.covered.end());
            for (auto& line : node.mapped().covered) {
                if (seen.insert(line).second) {
                    dst.covered.push_back(std::move(line));
                }
            }
            continue;
        }
        into.test_order.push_back(id);
        into.tests.insert(std::move(node));
    }
}

// Helper mode for suite-aggregated tooling: many single-test reports, merged
// in filename sort order.
inline CoverageReport ingest_clover_dir(const std::filesystem::path& dir) {
    CoverageReport merged;
    std::vector<std::string> names = list_files(dir, "coverage-*.xml");
    for (const std::string& name : names) {
        merge_reports(merged, ingest_clover_file(dir / name));
    }
    return merged;
}

struct LineKey {
    std::string file;
    int line = 0;
    auto operator<=>(const LineKey&) const = default;
};

struct LineTestMap {
    std::map<LineKey, std::vector<std::string>> map;

    bool empty() const { return map.empty(); }
};

struct Line2TestOptions {
    // Lines under these roots never enter the map.
    std::vector<std::string> exclude_globs = {"src/test/**"};
};

inline LineTestMap build_line2test(const CoverageReport& cov, const Line2TestOptions& options = {}) {
    LineTestMap out;
    std::map<LineKey, std::set<std::string>> present;
    for (const std::string& testid : cov.test_order) {
        const TestCoverage& tc = cov.tests.at(testid);
        for (const auto& [file, line] : tc.covered) {
            bool excluded = false;
            for (const std::string& glob : options.exclude_globs) {
                if (glob_match(glob, file)) {
                    excluded = true;
                    break;
                }
            }
            if (excluded) continue;
            LineKey key{file, line};
            if (present[key].insert(testid).second) {
                out.map[key].push_back(testid);
            }
        }
    }
    return out;
}

// file<TAB>line<TAB>testid[,testid...]
inline std::string serialize_line2test(const LineTestMap& map) {
    std::string out;
    for (const auto& [key, tests] : map.map) {
        out += key.file;
        out.push_back('\t');
        out += std::to_string(key.line);
        out.push_back('\t');
        out += join(tests, ",");
        out.push_back('\n');
    }
    return out;
}

inline LineTestMap parse_line2test(std::string_view text) {
    LineTestMap out;
    for (const std::string& line : split_lines(text)) {
        if (line.empty()) continue;
        size_t t1 = line.find('\t');
        size_t t2 = line.find('\t', t1 + 1);
        if (t1 == std::string::npos || t2 == std::string::npos) {
            throw std::runtime_error("malformed line2test row: " + line);
        }
        LineKey key{line.substr(0, t1), std::stoi(line.substr(t1 + 1, t2 - t1 - 1))};
        std::vector<std::string>& tests = out.map[key];
        size_t start = t2 + 1;
        while (start <= line.size()) {
            size_t comma = line.find(',', start);
            if (comma == std::string::npos) {
                tests.push_back(line.substr(start));
                break;
            }
            tests.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
    }
    return out;
}

struct TestCase {
    std::string id;
    std::string class_name;
    std::string classpath;
    std::string body;
};

struct EmptyCandidates : std::runtime_error {
    EmptyCandidates() : std::runtime_error("select_covering_test: empty candidate list") {}
};

enum class NameMatchMode { Token, Substring, Prefix };

// Camel humps plus '_'/'$'/digit boundaries: "FooCoreTest" -> Foo, Core, Test;
// "XMLTest" -> XML, Test; "jsonDB2" -> json, DB, 2.
inline std::vector<std::string> camel_tokens(std::string_view name) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) {
            tokens.push_back(current);
            current.clear();
        }
    };
    for (size_t i = 0; i < name.size(); ++i) {
        unsigned char c = static_cast<unsigned char>(name[i]);
        if (c == '_' || c == '$' || c == '.') {
            flush();
            continue;
        }
        bool boundary = false;
        if (!current.empty()) {
            unsigned char prev = static_cast<unsigned char>(current.back());
            if (std::isupper(c) && std::islower(prev)) boundary = true;
            if (std::isdigit(c) && !std::isdigit(prev)) boundary = true;
            if (!std::isdigit(c) && std::isdigit(prev)) boundary = true;
            // End of an uppercase run followed by a lowercase letter: "XMLTest"
            if (std::islower(c) && std::isupper(prev) && current.size() >= 2 &&
                std::isupper(static_cast<unsigned char>(current[current.size() - 2]))) {
                std::string head = current.substr(0, current.size() - 1);
                char carry = current.back();
                current = head;
                flush();
                current.push_back(carry);
            }
            if (boundary) flush();
        }
        current.push_back(static_cast<char>(c));
    }
    flush();
    return tokens;
}

namespace detail {

inline bool tokens_contain(const std::vector<std::string>& haystack,
                           const std::vector<std::string>& needle) {
    if (needle.empty() || needle.size() > haystack.size()) return false;
    for (size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
        bool all = true;
        for (size_t j = 0; j < needle.size(); ++j) {
            if (haystack[i + j] != needle[j]) {
                all = false;
                break;
            }
        }
        if (all) return true;
    }
    return false;
}

}  // namespace detail

inline bool class_name_matches(std::string_view candidate_class, std::string_view focal_class,
                               NameMatchMode mode = NameMatchMode::Token) {
    switch (mode) {
        case NameMatchMode::Substring:
            return candidate_class.find(focal_class) != std::string_view::npos;
        case NameMatchMode::Prefix:
            return candidate_class.starts_with(focal_class);
        case NameMatchMode::Token:
            return detail::tokens_contain(camel_tokens(candidate_class), camel_tokens(focal_class));
    }
    return false;
}

// First candidate whose class name contains the focal class (case-sensitive,
// token containment by default); first candidate overall when none matches.
inline const TestCase& select_covering_test(std::span<const TestCase> candidates,
                                            std::string_view focal_class,
                                            NameMatchMode mode = NameMatchMode::Token) {
    if (candidates.empty()) {
        throw EmptyCandidates();
    }
    for (const TestCase& tc : candidates) {
        if (class_name_matches(tc.class_name, focal_class, mode)) {
            return tc;
        }
    }
    return candidates.front();
}

}  // namespace testgen
