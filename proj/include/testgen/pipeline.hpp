#pragma once

// Stage orchestration. Stages run in a fixed order, each writing its
// artifacts plus a manifest of input hashes; re-running a stage whose inputs
// and config are unchanged is a no-op. All artifacts live under one run
// directory:
//
//   extract/      names_only.records, method_bodies.records,
//                 class_contexts.records, diagnostics.log
//   coverage/     line2test.tsv, tests.records
//   dataset/      dataset.txt, dataset.meta.records, diagnostics.log
//   split/        train.txt(+meta), eval.txt(+meta), split.records
//   generate/     runlog.records
//   postprocess/  candidates/<id>.<status>.java, summary.records
//   metrics/      scores.records
//   report/       report.records, report.txt

#include <chrono>
#include <filesystem>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "testgen/adequacy.hpp"
#include "testgen/config.hpp"
#include "testgen/coverage_map.hpp"
#include "testgen/dataset.hpp"
#include "testgen/generation.hpp"
#include "testgen/metrics.hpp"
#include "testgen/post_process.hpp"
#include "testgen/source_model.hpp"

namespace testgen {

enum class Stage { Extract, Coverage, Dataset, Split, Generate, Postprocess, Metrics, Report };

inline const std::vector<Stage>& all_stages() {
    static const std::vector<Stage> order = {Stage::Extract,  Stage::Coverage, Stage::Dataset,
                                             Stage::Split,    Stage::Generate, Stage::Postprocess,
                                             Stage::Metrics,  Stage::Report};
    return order;
}

inline std::string_view to_string(Stage s) {
    switch (s) {
        case Stage::Extract: return "extract";
        case Stage::Coverage: return "coverage";
        case Stage::Dataset: return "dataset";
        case Stage::Split: return "split";
        case Stage::Generate: return "generate";
        case Stage::Postprocess: return "postprocess";
        case Stage::Metrics: return "metrics";
        case Stage::Report: return "report";
    }
    return "unknown";
}

inline std::optional<Stage> stage_from_name(std::string_view name) {
    for (Stage s : all_stages()) {
        if (to_string(s) == name) return s;
    }
    return std::nullopt;
}

// Any order in, canonical order out; unknown names are errors.
inline std::vector<Stage> parse_stages(std::string_view csv) {
    std::set<std::string> wanted;
    for (const std::string& part : split_lines(replace_all(csv, ",", "\n"))) {
        std::string name = trim(part);
        if (name.empty()) continue;
        if (!stage_from_name(name)) {
            throw ConfigError("unknown stage: " + name);
        }
        wanted.insert(name);
    }
    std::vector<Stage> out;
    for (Stage s : all_stages()) {
        if (wanted.count(std::string(to_string(s)))) {
            out.push_back(s);
        }
    }
    return out;
}

struct StageInputMissing : std::runtime_error {
    Stage stage;
    StageInputMissing(Stage s, const std::string& what)
        : std::runtime_error(std::string(to_string(s)) + ": missing input " + what), stage(s) {}
};

struct StageFailure : std::runtime_error {
    Stage stage;
    StageFailure(Stage s, const std::string& what)
        : std::runtime_error(std::string(to_string(s)) + ": " + what), stage(s) {}
};

struct StageOutcome {
    Stage stage;
    bool cache_hit = false;
    double seconds = 0.0;
    std::vector<std::filesystem::path> artifacts;
};

struct PipelineResult {
    std::vector<StageOutcome> outcomes;
    std::optional<ProjectReport> report;
};

namespace detail {

inline constexpr std::string_view kVersion = "0.1.0";

class StageContext {
public:
    StageContext(const RunConfig& cfg, Stage stage)
        : cfg_(cfg), stage_(stage), dir_(cfg.output_dir / to_string(stage)) {}

    const std::filesystem::path& dir() const { return dir_; }
    std::filesystem::path artifact(std::string_view name) const { return dir_ / name; }

    void add_input(const std::filesystem::path& path) {
        inputs_.emplace_back(path.generic_string(),
                             std::filesystem::exists(path) ? hex64(fnv1a64(read_file(path))) : "absent");
    }
    void add_input_text(std::string_view label, std::string_view content) {
        inputs_.emplace_back(std::string(label), hex64(fnv1a64(content)));
    }

    std::filesystem::path require(Stage producer, std::string_view name) const {
        std::filesystem::path path = cfg_.output_dir / to_string(producer) / name;
        if (!std::filesystem::exists(path)) {
            throw StageInputMissing(stage_, path.generic_string());
        }
        return path;
    }

    // True when the previous manifest matches the current inputs and every
    // artifact it lists still exists.
    bool cache_valid() const {
        std::filesystem::path manifest = dir_ / "manifest.records";
        if (!std::filesystem::exists(manifest)) return false;
        std::map<std::string, std::string> prior_inputs;
        std::vector<std::string> artifacts;
        std::string prior_config;
        for (const Record& rec : read_records(manifest)) {
            std::string kind = record_get(rec, "kind").value_or("");
            if (kind == "manifest") {
                prior_config = record_get(rec, "config_hash").value_or("");
            } else if (kind == "input") {
                prior_inputs[record_require(rec, "path")] = record_get(rec, "hash").value_or("");
            } else if (kind == "artifact") {
                artifacts.push_back(record_require(rec, "path"));
            }
        }
        if (prior_config != hex64(cfg_.config_hash)) return false;
        std::map<std::string, std::string> current(inputs_.begin(), inputs_.end());
        if (current != prior_inputs) return false;
        for (const std::string& a : artifacts) {
            if (!std::filesystem::exists(cfg_.output_dir / a)) return false;
        }
        return true;
    }

    // Keep the stored artifact list, flip the cache flag.
    void note_cache_hit() {
        std::filesystem::path manifest = dir_ / "manifest.records";
        std::vector<Record> records = read_records(manifest);
        for (Record& rec : records) {
            if (record_get(rec, "kind") == std::optional<std::string>("manifest")) {
                for (auto& [k, v] : rec) {
                    if (k == "cache_hit") v = "1";
                }
            }
        }
        write_records(manifest, records);
    }

    void write_manifest(const std::vector<std::filesystem::path>& artifacts, double seconds,
                        bool cache_hit) {
        std::vector<Record> records;
        records.push_back(Record{{"kind", "manifest"},
                                 {"stage", std::string(to_string(stage_))},
                                 {"version", std::string(kVersion)},
                                 {"config_hash", hex64(cfg_.config_hash)},
                                 {"seconds", std::to_string(seconds)},
                                 {"cache_hit", cache_hit ? "1" : "0"}});
        for (const auto& [path, hash] : inputs_) {
            records.push_back(Record{{"kind", "input"}, {"path", path}, {"hash", hash}});
        }
        for (const std::filesystem::path& a : artifacts) {
            records.push_back(Record{
                {"kind", "artifact"},
                {"path", std::filesystem::relative(a, cfg_.output_dir).generic_string()}});
        }
        write_records(dir_ / "manifest.records", records);
    }

private:
    const RunConfig& cfg_;
    Stage stage_;
    std::filesystem::path dir_;
    std::vector<std::pair<std::string, std::string>> inputs_;
};

inline std::string sanitize_filename(std::string_view name) {
    std::string out;
    for (char c : name) {
        out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' ? c : '_');
    }
    return out;
}

inline std::string instance_id(const DatasetInstance& inst) {
    return inst.meta.file + "#L" + std::to_string(inst.meta.line);
}

// --- stage bodies ---------------------------------------------------------------

inline std::vector<std::filesystem::path> stage_extract(const RunConfig& cfg, StageContext& ctx) {
    std::vector<SourceFile> files;
    for (const std::string& rel : list_files(cfg.project_root, cfg.source_glob)) {
        if (glob_match(cfg.test_glob, rel)) {
            continue;  // test sources never enter the skeleton
        }
        files.push_back(SourceFile::from_text(rel, read_file(cfg.project_root / rel)));
    }
    if (files.empty()) {
        throw StageInputMissing(Stage::Extract,
                                cfg.source_glob + " under " + cfg.project_root.string());
    }
    SkeletonOptions options;
    options.include_private_methods = cfg.include_private_methods;
    ProjectSkeleton skeleton = build_project_skeletons(files, options);

    std::string diagnostics;
    for (const SkeletonDiagnostic& d : skeleton.diagnostics) {
        diagnostics += d.path + ":" + std::to_string(d.line) + ": " + d.message + "\n";
    }
    write_file(ctx.artifact("names_only.records"), serialize_names_only(skeleton));
    write_file(ctx.artifact("method_bodies.records"), serialize_method_bodies(skeleton));
    write_file(ctx.artifact("class_contexts.records"), serialize_class_contexts(skeleton));
    write_file(ctx.artifact("diagnostics.log"), diagnostics);
    return {ctx.artifact("names_only.records"), ctx.artifact("method_bodies.records"),
            ctx.artifact("class_contexts.records"), ctx.artifact("diagnostics.log")};
}

inline std::vector<std::filesystem::path> stage_coverage(const RunConfig& cfg, StageContext& ctx) {
    CoverageReport report = ingest_clover_dir(cfg.coverage_dir);
    if (report.empty()) {
        throw StageInputMissing(Stage::Coverage,
                                "coverage-*.xml under " + cfg.coverage_dir.string());
    }
    Line2TestOptions options;
    options.exclude_globs = cfg.coverage_exclude_globs;
    LineTestMap map = build_line2test(report, options);
    write_file(ctx.artifact("line2test.tsv"), serialize_line2test(map));

    // Test catalog: parse each covering test's class and pull the method body.
    std::vector<Record> test_records;
    std::string diagnostics;
    for (const std::string& id : report.test_order) {
        const TestCoverage& cov = report.tests.at(id);
        std::string method_name = id.substr(id.find('#') + 1);
        std::filesystem::path classpath = cfg.project_root / cov.classpath;
        std::string body;
        if (cov.classpath.empty() || !std::filesystem::exists(classpath)) {
            diagnostics += id + ": test classpath missing\n";
        } else {
            try {
                auto models = parse_class_model(
                    SourceFile::from_text(cov.classpath, read_file(classpath)));
                for (const auto& model : models) {
                    for (const MethodInfo& m : model.methods) {
                        if (m.name == method_name) {
                            body = m.body;
                            break;
                        }
                    }
                }
            } catch (const std::exception& e) {
                diagnostics += id + ": " + e.what() + "\n";
            }
            if (body.empty()) {
                diagnostics += id + ": method " + method_name + " not found\n";
            }
        }
        if (!body.empty()) {
            test_records.push_back(Record{{"id", id},
                                          {"class", cov.class_name},
                                          {"classpath", cov.classpath},
                                          {"body", body}});
        }
    }
    write_file(ctx.artifact("tests.records"), serialize_records(test_records));
    write_file(ctx.artifact("diagnostics.log"), diagnostics);
    return {ctx.artifact("line2test.tsv"), ctx.artifact("tests.records"),
            ctx.artifact("diagnostics.log")};
}

inline std::vector<TestCase> load_test_catalog(const std::filesystem::path& path) {
    std::vector<TestCase> tests;
    for (const Record& rec : read_records(path)) {
        TestCase tc;
        tc.id = record_require(rec, "id");
        tc.class_name = record_get(rec, "class").value_or("");
        tc.classpath = record_get(rec, "classpath").value_or("");
        tc.body = record_get(rec, "body").value_or("");
        tests.push_back(std::move(tc));
    }
    return tests;
}

inline std::vector<std::filesystem::path> stage_dataset(const RunConfig& cfg, StageContext& ctx) {
    ProjectSkeleton skeleton = parse_skeleton(
        read_file(ctx.require(Stage::Extract, "names_only.records")),
        read_file(ctx.require(Stage::Extract, "method_bodies.records")),
        read_file(ctx.require(Stage::Extract, "class_contexts.records")));
    LineTestMap map = parse_line2test(read_file(ctx.require(Stage::Coverage, "line2test.tsv")));
    std::vector<TestCase> tests = load_test_catalog(ctx.require(Stage::Coverage, "tests.records"));

    DatasetBuildOptions options{cfg.project_name, cfg.match_mode};
    DatasetBuildResult result = build_instances(map, skeleton, tests, options);
    std::string diagnostics;
    for (const DatasetDiagnostic& d : result.diagnostics) {
        diagnostics += d.file + ":" + std::to_string(d.line) + ": " + d.message + "\n";
    }
    write_file(ctx.artifact("dataset.txt"), serialize_instances(result.instances));
    write_file(ctx.artifact("dataset.meta.records"), serialize_instance_meta(result.instances));
    write_file(ctx.artifact("diagnostics.log"), diagnostics);
    return {ctx.artifact("dataset.txt"), ctx.artifact("dataset.meta.records"),
            ctx.artifact("diagnostics.log")};
}

inline std::vector<std::filesystem::path> stage_split(const RunConfig& cfg, StageContext& ctx) {
    std::vector<DatasetInstance> instances =
        parse_instances(read_file(ctx.require(Stage::Dataset, "dataset.txt")),
                        read_file(ctx.require(Stage::Dataset, "dataset.meta.records")));
    Split split;
    try {
        split = split_leave_tests_out(instances, cfg.split_ratio, cfg.seed);
    } catch (const DegenerateSplit& e) {
        throw StageFailure(Stage::Split, e.what());
    }
    write_file(ctx.artifact("train.txt"), serialize_instances(split.train));
    write_file(ctx.artifact("train.meta.records"), serialize_instance_meta(split.train));
    write_file(ctx.artifact("eval.txt"), serialize_instances(split.eval));
    write_file(ctx.artifact("eval.meta.records"), serialize_instance_meta(split.eval));
    write_file(ctx.artifact("split.records"), serialize_split_manifest(split));
    return {ctx.artifact("train.txt"), ctx.artifact("train.meta.records"),
            ctx.artifact("eval.txt"), ctx.artifact("eval.meta.records"),
            ctx.artifact("split.records")};
}

// Run-log key per eval instance: the instance id itself for flat (per-line)
// backends, or the shared method-group key for chat backends where one
// request covers every line of a focal method.
inline std::map<std::string, std::string> runlog_keys(const std::vector<DatasetInstance>& eval_set,
                                                      bool method_level) {
    std::map<std::string, std::string> out;
    std::map<std::string, std::string> group_key;  // (file, FM) -> log key
    for (const DatasetInstance& inst : eval_set) {
        std::string id = instance_id(inst);
        if (!method_level) {
            out[id] = id;
            continue;
        }
        DecodedFocal focal = decode_focal_input(inst.input_encoded);
        std::string method = inst.meta.file + "::" + focal.fm;
        auto [it, inserted] = group_key.emplace(method, id + "+method");
        out[id] = it->second;
    }
    return out;
}

inline std::vector<std::filesystem::path> stage_generate(const RunConfig& cfg, StageContext& ctx) {
    std::vector<DatasetInstance> eval_set =
        parse_instances(read_file(ctx.require(Stage::Split, "eval.txt")),
                        read_file(ctx.require(Stage::Split, "eval.meta.records")));
    std::filesystem::path log_path = ctx.artifact("runlog.records");
    std::set<std::string> done;
    for (const RunLogEntry& e : RunLog::load(log_path)) {
        if (!e.failed) done.insert(e.instance_id);
    }
    RunLog log(log_path);
    RateLimiter limiter(cfg.backend.requests_per_sec);

    if (cfg.backend.kind == BackendKind::Http) {
        // Chat backends get one request per focal method; every line instance
        // of that method shares the response.
        std::map<std::string, std::string> keys = runlog_keys(eval_set, true);
        std::set<std::string> issued;
        for (const DatasetInstance& inst : eval_set) {
            std::string group_id = keys.at(instance_id(inst));
            if (done.count(group_id) || !issued.insert(group_id).second) continue;
            DecodedFocal focal = decode_focal_input(inst.input_encoded);
            ChatPrompt prompt = render_chat_prompt(cfg.project_name, focal.fm);
            std::string payload = prompt_to_json(prompt);
            RunLogEntry entry;
            entry.instance_id = group_id;
            entry.request_hash = hex64(fnv1a64(payload));
            try {
                GenerationResponse resp = generate(cfg.backend, payload, &limiter);
                entry.response = resp.raw_text;
                entry.latency_sec = resp.latency_sec;
                entry.backend_id = resp.backend_id;
            } catch (const BackendError& e) {
                entry.failed = true;
                entry.error = e.what();
            }
            log.append(entry);
        }
    } else {
        // Flat backends take one request per line instance. Requests may run
        // concurrently up to the configured bound; the append-only log keyed
        // by instance id makes ordering irrelevant.
        std::vector<const DatasetInstance*> pending;
        for (const DatasetInstance& inst : eval_set) {
            if (!done.count(instance_id(inst))) {
                pending.push_back(&inst);
            }
        }
        auto issue = [&](const DatasetInstance& inst) {
            RunLogEntry entry;
            entry.instance_id = instance_id(inst);
            entry.request_hash = hex64(fnv1a64(inst.input_encoded));
            try {
                GenerationResponse resp = generate(cfg.backend, inst.input_encoded, &limiter);
                entry.response = resp.raw_text;
                entry.latency_sec = resp.latency_sec;
                entry.backend_id = resp.backend_id;
            } catch (const BackendError& e) {
                entry.failed = true;
                entry.error = e.what();
            }
            log.append(entry);
        };
        size_t lanes = cfg.backend.max_concurrency > 1
                           ? static_cast<size_t>(cfg.backend.max_concurrency)
                           : 1;
        if (lanes <= 1) {
            for (const DatasetInstance* inst : pending) issue(*inst);
        } else {
            for (size_t base = 0; base < pending.size(); base += lanes) {
                size_t batch = std::min(lanes, pending.size() - base);
                std::vector<std::future<void>> futures;
                futures.reserve(batch);
                for (size_t k = 0; k < batch; ++k) {
                    const DatasetInstance* inst = pending[base + k];
                    futures.push_back(std::async(std::launch::async, [&issue, inst] { issue(*inst); }));
                }
                for (auto& f : futures) f.get();
            }
        }
    }
    return {log_path};
}

// Candidates for one run, rebuilt from the run log. Order follows the eval
// set, then the [TCS] segment order inside each response.
inline std::vector<CandidateTest> candidates_from_runlog(
    const std::vector<DatasetInstance>& eval_set, const std::vector<RunLogEntry>& entries,
    const std::map<std::string, std::string>& keys) {
    std::map<std::string, const RunLogEntry*> by_id;
    for (const RunLogEntry& e : entries) {
        if (!e.failed) by_id.emplace(e.instance_id, &e);
    }
    std::vector<CandidateTest> batch;
    std::set<std::string> used_entries;
    for (const DatasetInstance& inst : eval_set) {
        auto key_it = keys.find(instance_id(inst));
        if (key_it == keys.end()) continue;
        auto entry_it = by_id.find(key_it->second);
        if (entry_it == by_id.end() || used_entries.count(key_it->second)) continue;
        used_entries.insert(key_it->second);
        const RunLogEntry* entry = entry_it->second;
        std::vector<std::string> segments = split_candidates(entry->response);
        for (size_t k = 0; k < segments.size(); ++k) {
            CandidateTest c;
            c.id = entry->instance_id + "/" + std::to_string(k);
            c.raw_text = segments[k];
            c.target_classpath = inst.meta.test_classpath;
            batch.push_back(std::move(c));
        }
    }
    return batch;
}

inline std::vector<std::filesystem::path> stage_postprocess(const RunConfig& cfg,
                                                            StageContext& ctx) {
    std::vector<DatasetInstance> eval_set =
        parse_instances(read_file(ctx.require(Stage::Split, "eval.txt")),
                        read_file(ctx.require(Stage::Split, "eval.meta.records")));
    std::vector<RunLogEntry> entries = RunLog::load(ctx.require(Stage::Generate, "runlog.records"));
    std::map<std::string, std::string> keys =
        runlog_keys(eval_set, cfg.backend.kind == BackendKind::Http);
    std::vector<CandidateTest> batch = candidates_from_runlog(eval_set, entries, keys);

    restore_and_name(batch);
    ParseFilterResult parse = parse_filter(batch);
    CompileFilterResult compile;
    compile.total = static_cast<int>(batch.size());
    if (!cfg.compile_adapter.empty()) {
        compile = compile_filter(batch, cfg.project_root,
                                 {cfg.compile_adapter, cfg.compile_adapter_timeout_sec});
        if (!cfg.run_adapter.empty()) {
            run_filter(batch, cfg.project_root, {cfg.run_adapter, cfg.run_adapter_timeout_sec});
        }
    }

    std::filesystem::path cand_dir = ctx.dir() / "candidates";
    std::filesystem::remove_all(cand_dir);
    for (const CandidateTest& c : batch) {
        std::string name = sanitize_filename(c.id) + "." + std::string(to_string(c.status)) + ".java";
        write_file(cand_dir / name, c.text);
    }
    write_records(ctx.artifact("summary.records"), summarize_batch(batch, parse, compile));
    return {ctx.artifact("summary.records")};
}

// Standalone metric batch: candidate and reference files aligned line by
// line, flattened with [EOL].
inline std::vector<std::filesystem::path> stage_metrics_paired(const RunConfig& cfg,
                                                               StageContext& ctx) {
    if (!std::filesystem::exists(cfg.metrics_candidates_file) ||
        !std::filesystem::exists(cfg.metrics_references_file)) {
        throw StageInputMissing(Stage::Metrics, "paired candidate/reference files");
    }
    PairedScoreBatch batch;
    try {
        batch = score_paired_lines(read_file(cfg.metrics_candidates_file),
                                   read_file(cfg.metrics_references_file), cfg.metrics,
                                   cfg.metrics_aggregation);
    } catch (const PairedInputError& e) {
        throw StageFailure(Stage::Metrics, e.what());
    }
    std::vector<Record> records;
    for (const PairedScore& p : batch.pairs) {
        records.push_back(Record{{"kind", "pair"},
                                 {"instance", std::to_string(p.index)},
                                 {"bleu", format_percent(p.breakdown.bleu_score)},
                                 {"codebleu", format_percent(p.breakdown.score)},
                                 {"weighted_ngram", format_percent(100.0 * p.breakdown.weighted_ngram)},
                                 {"ast", format_percent(100.0 * p.breakdown.ast)},
                                 {"dataflow", format_percent(100.0 * p.breakdown.dataflow)}});
    }
    Record agg{{"kind", "aggregate"},
               {"pairs", std::to_string(batch.pair_count)},
               {"skipped", "0"}};
    if (batch.pair_count > 0) {
        agg.emplace_back("bleu_mean", format_percent(batch.bleu_aggregate));
        agg.emplace_back("codebleu_mean", format_percent(batch.codebleu_mean));
    } else {
        agg.emplace_back("bleu_mean", "NA");
        agg.emplace_back("codebleu_mean", "NA");
    }
    records.push_back(std::move(agg));
    write_records(ctx.artifact("scores.records"), records);
    return {ctx.artifact("scores.records")};
}

inline std::vector<std::filesystem::path> stage_metrics(const RunConfig& cfg, StageContext& ctx) {
    if (!cfg.metrics_candidates_file.empty()) {
        return stage_metrics_paired(cfg, ctx);
    }
    std::vector<DatasetInstance> eval_set =
        parse_instances(read_file(ctx.require(Stage::Split, "eval.txt")),
                        read_file(ctx.require(Stage::Split, "eval.meta.records")));
    std::vector<RunLogEntry> entries = RunLog::load(ctx.require(Stage::Generate, "runlog.records"));
    ctx.require(Stage::Postprocess, "summary.records");
    std::map<std::string, std::string> keys =
        runlog_keys(eval_set, cfg.backend.kind == BackendKind::Http);
    std::vector<CandidateTest> batch = candidates_from_runlog(eval_set, entries, keys);
    restore_and_name(batch);
    parse_filter(batch);

    std::map<std::string, const CandidateTest*> first_survivor;  // log key -> candidate
    for (const CandidateTest& c : batch) {
        if (!c.parsable_kept()) continue;
        std::string owner = c.id.substr(0, c.id.rfind('/'));
        first_survivor.emplace(owner, &c);  // first wins
    }
    std::vector<Record> score_records;
    double bleu_sum = 0.0, codebleu_sum = 0.0;
    int scored = 0, skipped = 0;
    for (const DatasetInstance& inst : eval_set) {
        std::string id = instance_id(inst);
        const CandidateTest* survivor = nullptr;
        if (auto key_it = keys.find(id); key_it != keys.end()) {
            if (auto s_it = first_survivor.find(key_it->second); s_it != first_survivor.end()) {
                survivor = s_it->second;
            }
        }
        if (survivor == nullptr) {
            ++skipped;
            score_records.push_back(Record{{"kind", "pair"},
                                           {"instance", id},
                                           {"bleu", "NA"},
                                           {"codebleu", "NA"}});
            continue;
        }
        std::string reference = decode_flat(inst.output_encoded);
        CodeBleuBreakdown breakdown = codebleu(survivor->text, reference, cfg.metrics);
        bleu_sum += breakdown.bleu_score;
        codebleu_sum += breakdown.score;
        ++scored;
        score_records.push_back(Record{{"kind", "pair"},
                                       {"instance", id},
                                       {"bleu", format_percent(breakdown.bleu_score)},
                                       {"codebleu", format_percent(breakdown.score)},
                                       {"weighted_ngram", format_percent(100.0 * breakdown.weighted_ngram)},
                                       {"ast", format_percent(100.0 * breakdown.ast)},
                                       {"dataflow", format_percent(100.0 * breakdown.dataflow)}});
    }
    Record agg{{"kind", "aggregate"},
               {"pairs", std::to_string(scored)},
               {"skipped", std::to_string(skipped)}};
    if (scored > 0) {
        agg.emplace_back("bleu_mean", format_percent(bleu_sum / scored));
        agg.emplace_back("codebleu_mean", format_percent(codebleu_sum / scored));
    } else {
        agg.emplace_back("bleu_mean", "NA");
        agg.emplace_back("codebleu_mean", "NA");
    }
    score_records.push_back(std::move(agg));
    write_records(ctx.artifact("scores.records"), score_records);
    return {ctx.artifact("scores.records")};
}

inline std::vector<std::filesystem::path> stage_report(const RunConfig& cfg, StageContext& ctx) {
    ProjectReport row;
    row.project = cfg.project_name;
    for (const Record& rec : read_records(ctx.require(Stage::Postprocess, "summary.records"))) {
        if (record_get(rec, "kind") != std::optional<std::string>("rates")) continue;
        auto parse_rate = record_get(rec, "parse_rate").value_or("NA");
        auto compile_rate = record_get(rec, "compile_rate").value_or("NA");
        if (parse_rate != "NA") row.parse_rate = std::stod(parse_rate);
        if (compile_rate != "NA") row.compile_rate = std::stod(compile_rate);
    }
    for (const Record& rec : read_records(ctx.require(Stage::Metrics, "scores.records"))) {
        if (record_get(rec, "kind") != std::optional<std::string>("aggregate")) continue;
        auto b = record_get(rec, "bleu_mean").value_or("NA");
        auto cb = record_get(rec, "codebleu_mean").value_or("NA");
        if (b != "NA") row.bleu = std::stod(b);
        if (cb != "NA") row.codebleu = std::stod(cb);
    }
    if (!cfg.model_coverage_dir.empty() && std::filesystem::exists(cfg.model_coverage_dir)) {
        CoverageReport cov = ingest_clover_dir(cfg.model_coverage_dir);
        CoverageSummary summary =
            coverage_summary_from_report(cov, cfg.project_name, cfg.coverage_exclude_globs);
        if (summary.total_lines > 0) {
            row.line_coverage = line_coverage(summary);
        }
    }
    if (!cfg.kill_matrix_csv.empty() && std::filesystem::exists(cfg.kill_matrix_csv)) {
        KillMatrix km = parse_kill_matrix_csv(read_file(cfg.kill_matrix_csv));
        MutationScores scores = mutation_scores(km);
        row.mutation_score = scores.standard;
        row.adapted_mutation_score = scores.adapted;
    } else if (!cfg.major_kill_map.empty() && std::filesystem::exists(cfg.major_kill_map)) {
        std::string cov_csv = cfg.major_cov_map.empty() || !std::filesystem::exists(cfg.major_cov_map)
                                  ? std::string()
                                  : read_file(cfg.major_cov_map);
        KillMatrix km = import_major_kill_map(read_file(cfg.major_kill_map), cov_csv,
                                              cfg.major_total_mutants);
        MutationScores scores = mutation_scores(km);
        row.mutation_score = scores.standard;
        row.adapted_mutation_score = scores.adapted;
    }

    std::vector<ProjectReport> rows = {row};
    for (const std::filesystem::path& extra : cfg.report_extra_rows) {
        if (!std::filesystem::exists(extra)) {
            throw StageInputMissing(Stage::Report, extra.generic_string());
        }
        for (const Record& rec : read_records(extra)) {
            if (record_get(rec, "kind").value_or("row") == "row" && record_get(rec, "project")) {
                rows.push_back(report_from_record(rec));
            }
        }
    }
    AggregateReport agg = aggregate_report(rows);

    std::vector<Record> records;
    for (const ProjectReport& r : rows) {
        Record rec = report_to_record(r);
        rec.insert(rec.begin(), {"kind", "row"});
        records.push_back(std::move(rec));
    }
    Record mean_rec = report_to_record(agg.mean);
    mean_rec.insert(mean_rec.begin(), {"kind", "mean"});
    records.push_back(std::move(mean_rec));
    Record median_rec = report_to_record(agg.median);
    median_rec.insert(median_rec.begin(), {"kind", "median"});
    records.push_back(std::move(median_rec));
    write_records(ctx.artifact("report.records"), records);
    write_file(ctx.artifact("report.txt"), render_report_table(rows, &agg));
    return {ctx.artifact("report.records"), ctx.artifact("report.txt")};
}

}  // namespace detail

inline PipelineResult run_pipeline(const RunConfig& cfg, const std::vector<Stage>& stages) {
    cfg.validate();
    PipelineResult result;
    for (Stage stage : stages) {
        detail::StageContext ctx(cfg, stage);
        std::filesystem::create_directories(ctx.dir());

        // Register stage inputs for the cache check.
        switch (stage) {
            case Stage::Extract:
                for (const std::string& rel : list_files(cfg.project_root, cfg.source_glob)) {
                    ctx.add_input(cfg.project_root / rel);
                }
                break;
            case Stage::Coverage:
                for (const std::string& rel : list_files(cfg.coverage_dir, "coverage-*.xml")) {
                    ctx.add_input(cfg.coverage_dir / rel);
                }
                break;
            case Stage::Dataset:
                ctx.add_input(cfg.output_dir / "extract/names_only.records");
                ctx.add_input(cfg.output_dir / "extract/method_bodies.records");
                ctx.add_input(cfg.output_dir / "extract/class_contexts.records");
                ctx.add_input(cfg.output_dir / "coverage/line2test.tsv");
                ctx.add_input(cfg.output_dir / "coverage/tests.records");
                break;
            case Stage::Split:
                ctx.add_input(cfg.output_dir / "dataset/dataset.txt");
                ctx.add_input(cfg.output_dir / "dataset/dataset.meta.records");
                ctx.add_input_text("seed", std::to_string(cfg.seed) + "@" +
                                               std::to_string(cfg.split_ratio));
                break;
            case Stage::Generate:
                ctx.add_input(cfg.output_dir / "split/eval.txt");
                ctx.add_input(cfg.output_dir / "split/eval.meta.records");
                break;
            case Stage::Postprocess:
                ctx.add_input(cfg.output_dir / "split/eval.txt");
                ctx.add_input(cfg.output_dir / "split/eval.meta.records");
                ctx.add_input(cfg.output_dir / "generate/runlog.records");
                break;
            case Stage::Metrics:
                if (!cfg.metrics_candidates_file.empty()) {
                    ctx.add_input(cfg.metrics_candidates_file);
                    ctx.add_input(cfg.metrics_references_file);
                } else {
                    ctx.add_input(cfg.output_dir / "split/eval.txt");
                    ctx.add_input(cfg.output_dir / "split/eval.meta.records");
                    ctx.add_input(cfg.output_dir / "generate/runlog.records");
                    ctx.add_input(cfg.output_dir / "postprocess/summary.records");
                }
                break;
            case Stage::Report:
                ctx.add_input(cfg.output_dir / "postprocess/summary.records");
                ctx.add_input(cfg.output_dir / "metrics/scores.records");
                for (const std::filesystem::path& extra : cfg.report_extra_rows) {
                    ctx.add_input(extra);
                }
                if (!cfg.kill_matrix_csv.empty()) ctx.add_input(cfg.kill_matrix_csv);
                if (!cfg.major_kill_map.empty()) ctx.add_input(cfg.major_kill_map);
                if (!cfg.major_cov_map.empty()) ctx.add_input(cfg.major_cov_map);
                if (!cfg.model_coverage_dir.empty() &&
                    std::filesystem::exists(cfg.model_coverage_dir)) {
                    for (const std::string& rel :
                         list_files(cfg.model_coverage_dir, "coverage-*.xml")) {
                        ctx.add_input(cfg.model_coverage_dir / rel);
                    }
                }
                break;
        }

        StageOutcome outcome;
        outcome.stage = stage;
        if (ctx.cache_valid()) {
            outcome.cache_hit = true;
            ctx.note_cache_hit();
            result.outcomes.push_back(outcome);
            continue;
        }
        auto started = std::chrono::steady_clock::now();
        std::vector<std::filesystem::path> artifacts;
        switch (stage) {
            case Stage::Extract: artifacts = detail::stage_extract(cfg, ctx); break;
            case Stage::Coverage: artifacts = detail::stage_coverage(cfg, ctx); break;
            case Stage::Dataset: artifacts = detail::stage_dataset(cfg, ctx); break;
            case Stage::Split: artifacts = detail::stage_split(cfg, ctx); break;
            case Stage::Generate: artifacts = detail::stage_generate(cfg, ctx); break;
            case Stage::Postprocess: artifacts = detail::stage_postprocess(cfg, ctx); break;
            case Stage::Metrics: artifacts = detail::stage_metrics(cfg, ctx); break;
            case Stage::Report: artifacts = detail::stage_report(cfg, ctx); break;
        }
        outcome.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        outcome.artifacts = artifacts;
        ctx.write_manifest(artifacts, outcome.seconds, false);
        result.outcomes.push_back(std::move(outcome));
    }

    std::filesystem::path report_records = cfg.output_dir / "report/report.records";
    if (std::filesystem::exists(report_records)) {
        for (const Record& rec : read_records(report_records)) {
            if (record_get(rec, "kind").value_or("") == "row" &&
                record_get(rec, "project").value_or("") == cfg.project_name) {
                result.report = report_from_record(rec);
                break;
            }
        }
    }
    return result;
}

}  // namespace testgen
