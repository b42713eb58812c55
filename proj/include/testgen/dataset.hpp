#pragma once

// DA dataset assembly: one (target line + focal context -> covering test)
// instance per mapped in-method line, plus the leave-tests-out split. The
// split shuffles the unique test ids with the pinned xorshift64* generator so
// a (seed, ratio) pair always reproduces the same partition.

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "testgen/coverage_map.hpp"
#include "testgen/flatten.hpp"
#include "testgen/record.hpp"
#include "testgen/rng.hpp"
#include "testgen/source_model.hpp"

namespace testgen {

struct DatasetInstance {
    std::string input_encoded;   // single line: LINE + FM+FC+C+M+F
    std::string output_encoded;  // single line: covering test body, [EOL]-flattened
    struct Meta {
        std::string project;
        std::string file;
        int line = 0;
        std::string test_id;
        std::string focal_class;
        std::string test_classpath;
    } meta;
};

struct DatasetDiagnostic {
    std::string file;
    int line = 0;
    std::string message;
};

struct DatasetBuildResult {
    std::vector<DatasetInstance> instances;
    std::vector<DatasetDiagnostic> diagnostics;
};

struct DatasetBuildOptions {
    std::string project_name;
    NameMatchMode match_mode = NameMatchMode::Token;
};

// Exactly one instance per mapped line that falls inside a known method span;
// lines outside any method (or with an unknown covering test) become
// diagnostics. Conflicting supervision is filtered: when two lines produce
// the same input encoding, the first mapped output wins and later conflicting
// ones are dropped with a diagnostic.
inline DatasetBuildResult build_instances(const LineTestMap& map, const ProjectSkeleton& skeleton,
                                          const std::vector<TestCase>& tests,
                                          const DatasetBuildOptions& options = {}) {
    DatasetBuildResult result;
    std::map<std::string, const TestCase*> by_id;
    for (const TestCase& tc : tests) {
        by_id.emplace(tc.id, &tc);
    }
    std::map<std::string, std::string> seen_inputs;  // input_encoded -> output_encoded

    for (const auto& [key, covering_ids] : map.map) {
        auto bodies_it = skeleton.bodies.find(key.file);
        if (bodies_it == skeleton.bodies.end()) {
            result.diagnostics.push_back({key.file, key.line, "file not in skeleton"});
            continue;
        }
        const MethodInfo* method = nullptr;
        for (const MethodInfo& m : bodies_it->second) {
            if (key.line >= m.start_line && key.line <= m.end_line) {
                method = &m;
                break;
            }
        }
        if (method == nullptr) {
            result.diagnostics.push_back({key.file, key.line, "line outside any method"});
            continue;
        }
        auto ctx_it = skeleton.class_contexts.find(method->owner_class);
        if (ctx_it == skeleton.class_contexts.end()) {
            result.diagnostics.push_back({key.file, key.line, "missing class context"});
            continue;
        }

        std::vector<TestCase> candidates;
        candidates.reserve(covering_ids.size());
        for (const std::string& id : covering_ids) {
            auto it = by_id.find(id);
            if (it != by_id.end()) {
                candidates.push_back(*it->second);
            }
        }
        if (candidates.empty()) {
            result.diagnostics.push_back({key.file, key.line, "no known covering test"});
            continue;
        }

        std::string simple_class = ctx_it->second.class_name;
        if (size_t dot = simple_class.rfind('.'); dot != std::string::npos) {
            simple_class = simple_class.substr(dot + 1);
        }
        const TestCase& chosen = select_covering_test(candidates, simple_class, options.match_mode);

        // The target line text, relative to the method body's line span.
        std::string target;
        {
            std::vector<std::string> body_lines = split_lines(method->body);
            int idx = key.line - method->start_line;
            if (idx >= 0 && idx < static_cast<int>(body_lines.size())) {
                target = trim(body_lines[static_cast<size_t>(idx)]);
            }
        }

        FocalUnit unit = build_focal_input(*method, ctx_it->second, target);
        DatasetInstance inst;
        inst.input_encoded = std::move(unit.encoded_input);
        inst.output_encoded = encode_flat(chosen.body);
        inst.meta = {options.project_name, key.file, key.line,
                     chosen.id,            simple_class, chosen.classpath};

        auto [it, inserted] = seen_inputs.emplace(inst.input_encoded, inst.output_encoded);
        if (!inserted && it->second != inst.output_encoded) {
            // Two mapped lines flattened to the same input but with different
            // covering tests; the first output wins, this one is dropped.
            result.diagnostics.push_back(
                {key.file, key.line, "conflicting supervision for identical input; dropped"});
            continue;
        }
        result.instances.push_back(std::move(inst));
    }
    return result;
}

struct Split {
    std::vector<DatasetInstance> train;
    std::vector<DatasetInstance> eval;
    std::uint64_t seed = 0;
    double ratio = 0.2;
    std::vector<std::string> eval_test_ids;
};

struct DegenerateSplit : std::runtime_error {
    explicit DegenerateSplit(const std::string& msg) : std::runtime_error(msg) {}
};

// Leave-tests-out: the unique test ids (first-appearance order) are shuffled
// with the seeded generator; the first round(ratio * N) go to eval and every
// instance follows its test id.
inline Split split_leave_tests_out(const std::vector<DatasetInstance>& instances, double ratio,
                                   std::uint64_t seed) {
    if (instances.empty()) {
        throw DegenerateSplit("no instances to split");
    }
    if (!(ratio > 0.0 && ratio < 1.0)) {
        throw DegenerateSplit("ratio must lie in (0,1)");
    }
    std::vector<std::string> unique_ids;
    std::set<std::string> seen;
    for (const DatasetInstance& inst : instances) {
        if (seen.insert(inst.meta.test_id).second) {
            unique_ids.push_back(inst.meta.test_id);
        }
    }
    long eval_count = round_half_up(ratio * static_cast<double>(unique_ids.size()));
    if (eval_count <= 0 || eval_count >= static_cast<long>(unique_ids.size())) {
        throw DegenerateSplit("rounded eval test count is 0 or all tests (" +
                              std::to_string(eval_count) + " of " +
                              std::to_string(unique_ids.size()) + ")");
    }
    Xorshift64Star rng(seed);
    shuffle(unique_ids, rng);

    Split split;
    split.seed = seed;
    split.ratio = ratio;
    split.eval_test_ids.assign(unique_ids.begin(), unique_ids.begin() + eval_count);
    std::set<std::string> eval_set(split.eval_test_ids.begin(), split.eval_test_ids.end());
    for (const DatasetInstance& inst : instances) {
        if (eval_set.count(inst.meta.test_id)) {
            split.eval.push_back(inst);
        } else {
            split.train.push_back(inst);
        }
    }
    return split;
}

// --- dataset files -----------------------------------------------------------

// data file: one `input<SEP>output` per line; meta sidecar: records aligned by
// index.
inline std::string serialize_instances(const std::vector<DatasetInstance>& instances) {
    std::string out;
    for (const DatasetInstance& inst : instances) {
        out += inst.input_encoded;
        out += kSep;
        out += inst.output_encoded;
        out.push_back('\n');
    }
    return out;
}

inline std::string serialize_instance_meta(const std::vector<DatasetInstance>& instances) {
    std::vector<Record> records;
    records.reserve(instances.size());
    for (const DatasetInstance& inst : instances) {
        records.push_back(Record{{"project", inst.meta.project},
                                 {"file", inst.meta.file},
                                 {"line", std::to_string(inst.meta.line)},
                                 {"test_id", inst.meta.test_id},
                                 {"focal_class", inst.meta.focal_class},
                                 {"test_classpath", inst.meta.test_classpath}});
    }
    return serialize_records(records);
}

struct DatasetParseError : std::runtime_error {
    explicit DatasetParseError(const std::string& msg) : std::runtime_error(msg) {}
};

inline std::vector<DatasetInstance> parse_instances(std::string_view data_text,
                                                    std::string_view meta_text) {
    std::vector<DatasetInstance> out;
    std::vector<Record> metas = parse_records(meta_text);
    size_t idx = 0;
    for (const std::string& line : split_lines(data_text)) {
        if (line.empty()) continue;
        size_t sep = find_unescaped(line, kSep);
        if (sep == std::string::npos) {
            throw DatasetParseError("dataset line without <SEP>");
        }
        DatasetInstance inst;
        inst.input_encoded = line.substr(0, sep);
        inst.output_encoded = line.substr(sep + kSep.size());
        if (idx < metas.size()) {
            const Record& rec = metas[idx];
            inst.meta.project = record_get(rec, "project").value_or("");
            inst.meta.file = record_get(rec, "file").value_or("");
            inst.meta.line = std::stoi(record_get(rec, "line").value_or("0"));
            inst.meta.test_id = record_get(rec, "test_id").value_or("");
            inst.meta.focal_class = record_get(rec, "focal_class").value_or("");
            inst.meta.test_classpath = record_get(rec, "test_classpath").value_or("");
        }
        out.push_back(std::move(inst));
        ++idx;
    }
    return out;
}

inline std::string serialize_split_manifest(const Split& split) {
    std::vector<Record> records;
    records.push_back(Record{{"kind", "split"},
                             {"seed", std::to_string(split.seed)},
                             {"ratio", std::to_string(split.ratio)},
                             {"eval_tests", std::to_string(split.eval_test_ids.size())}});
    for (const std::string& id : split.eval_test_ids) {
        records.push_back(Record{{"kind", "eval_test"}, {"test_id", id}});
    }
    return serialize_records(records);
}

}  // namespace testgen
