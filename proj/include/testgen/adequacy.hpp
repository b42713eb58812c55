#pragma once

// Test-adequacy accounting: line coverage, mutation and adapted mutation
// scores, augmentation diffs against a baseline tool and developer tests, and
// cross-project aggregation (mean/median rows, per-metric deltas).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "testgen/coverage_map.hpp"
#include "testgen/record.hpp"
#include "testgen/util.hpp"

namespace testgen {

struct CoverageSummary {
    std::string project;
    std::set<std::pair<std::string, int>> covered;
    long total_lines = 0;
};

struct EmptyProject : std::runtime_error {
    explicit EmptyProject(const std::string& project)
        : std::runtime_error("project has no countable lines: " + project) {}
};

struct MismatchedUniverse : std::runtime_error {
    explicit MismatchedUniverse(const std::string& msg)
        : std::runtime_error("mismatched universes: " + msg) {}
};

// Percent with full precision; presentation rounds to two decimals.
inline double line_coverage(const CoverageSummary& summary) {
    if (summary.total_lines <= 0) {
        throw EmptyProject(summary.project);
    }
    return 100.0 * static_cast<double>(summary.covered.size()) /
           static_cast<double>(summary.total_lines);
}

// Summary over a coverage report: the countable universe is the set of lines
// the reports themselves mention (hit or not), minus excluded roots.
inline CoverageSummary coverage_summary_from_report(
    const CoverageReport& report, const std::string& project,
    const std::vector<std::string>& exclude_globs = {"src/test/**"}) {
    CoverageSummary summary;
    summary.project = project;
    auto excluded = [&exclude_globs](const std::string& file) {
        for (const std::string& glob : exclude_globs) {
            if (glob_match(glob, file)) return true;
        }
        return false;
    };
    for (const auto& line : report.line_universe) {
        if (!excluded(line.first)) {
            ++summary.total_lines;
        }
    }
    for (const std::string& id : report.test_order) {
        for (const auto& line : report.tests.at(id).covered) {
            if (!excluded(line.first)) {
                summary.covered.insert(line);
            }
        }
    }
    return summary;
}

inline std::string serialize_coverage_summary(const CoverageSummary& summary) {
    std::vector<Record> records;
    records.push_back(Record{{"kind", "summary"},
                             {"project", summary.project},
                             {"total_lines", std::to_string(summary.total_lines)}});
    for (const auto& [file, line] : summary.covered) {
        records.push_back(
            Record{{"kind", "covered"}, {"file", file}, {"line", std::to_string(line)}});
    }
    return serialize_records(records);
}

inline CoverageSummary parse_coverage_summary(std::string_view text) {
    CoverageSummary summary;
    for (const Record& rec : parse_records(text)) {
        std::string kind = record_get(rec, "kind").value_or("");
        if (kind == "summary") {
            summary.project = record_get(rec, "project").value_or("");
            summary.total_lines = std::stol(record_require(rec, "total_lines"));
        } else if (kind == "covered") {
            summary.covered.insert(
                {record_require(rec, "file"), std::stoi(record_require(rec, "line"))});
        }
    }
    return summary;
}

struct MutantRecord {
    std::set<std::string> covered_by;
    std::set<std::string> killed_by;
};

struct KillMatrix {
    std::map<std::string, MutantRecord> mutants;

    long total() const { return static_cast<long>(mutants.size()); }
    long covered() const {
        long n = 0;
        for (const auto& [id, rec] : mutants) n += rec.covered_by.empty() ? 0 : 1;
        return n;
    }
    long killed() const {
        long n = 0;
        for (const auto& [id, rec] : mutants) n += rec.killed_by.empty() ? 0 : 1;
        return n;
    }
};

struct MutationScores {
    std::optional<double> standard;  // killed / total
    std::optional<double> adapted;   // killed / covered, NA when nothing is covered
};

inline MutationScores mutation_scores(const KillMatrix& km) {
    MutationScores scores;
    long total = km.total();
    if (total > 0) {
        scores.standard = 100.0 * static_cast<double>(km.killed()) / static_cast<double>(total);
    }
    long covered = km.covered();
    if (covered > 0) {
        scores.adapted = 100.0 * static_cast<double>(km.killed()) / static_cast<double>(covered);
    }
    return scores;
}

struct AugmentationDiff {
    long new_count = 0;
    double new_percent = 0.0;
};

// Lines the model covers that neither the baseline tool nor the developer
// tests cover; percent over the shared line universe.
inline AugmentationDiff augmentation_diff(const CoverageSummary& model,
                                          const CoverageSummary& baseline,
                                          const CoverageSummary& developer) {
    if (model.total_lines != baseline.total_lines || model.total_lines != developer.total_lines) {
        throw MismatchedUniverse("total_lines differ across summaries");
    }
    if (model.total_lines <= 0) {
        throw EmptyProject(model.project);
    }
    AugmentationDiff diff;
    for (const auto& line : model.covered) {
        if (!baseline.covered.count(line) && !developer.covered.count(line)) {
            ++diff.new_count;
        }
    }
    diff.new_percent =
        100.0 * static_cast<double>(diff.new_count) / static_cast<double>(model.total_lines);
    return diff;
}

struct NewMutantsKilled {
    long count = 0;
    double percent = 0.0;  // over total mutants
};

inline NewMutantsKilled new_mutants_killed(const KillMatrix& model, const KillMatrix& baseline) {
    if (model.mutants.size() != baseline.mutants.size()) {
        throw MismatchedUniverse("mutant universes differ in size");
    }
    for (const auto& [id, rec] : model.mutants) {
        if (!baseline.mutants.count(id)) {
            throw MismatchedUniverse("mutant " + id + " missing from baseline");
        }
    }
    NewMutantsKilled out;
    for (const auto& [id, rec] : model.mutants) {
        if (rec.killed_by.empty()) continue;
        if (baseline.mutants.at(id).killed_by.empty()) {
            ++out.count;
        }
    }
    if (!model.mutants.empty()) {
        out.percent =
            100.0 * static_cast<double>(out.count) / static_cast<double>(model.mutants.size());
    }
    return out;
}

// --- project reports and aggregation ------------------------------------------

struct ProjectReport {
    std::string project;
    std::optional<double> parse_rate;
    std::optional<double> compile_rate;
    std::optional<double> bleu;
    std::optional<double> codebleu;
    std::optional<double> line_coverage;
    std::optional<double> mutation_score;
    std::optional<double> adapted_mutation_score;
};

inline const std::vector<std::string>& report_metric_names() {
    static const std::vector<std::string> names = {
        "parse_rate",     "compile_rate",   "bleu",
        "codebleu",       "line_coverage",  "mutation_score",
        "adapted_mutation_score",
    };
    return names;
}

inline std::optional<double>* report_metric(ProjectReport& r, std::string_view name) {
    if (name == "parse_rate") return &r.parse_rate;
    if (name == "compile_rate") return &r.compile_rate;
    if (name == "bleu") return &r.bleu;
    if (name == "codebleu") return &r.codebleu;
    if (name == "line_coverage") return &r.line_coverage;
    if (name == "mutation_score") return &r.mutation_score;
    if (name == "adapted_mutation_score") return &r.adapted_mutation_score;
    return nullptr;
}

inline const std::optional<double>* report_metric(const ProjectReport& r, std::string_view name) {
    return report_metric(const_cast<ProjectReport&>(r), name);
}

struct AggregateReport {
    ProjectReport mean;    // project = "AVG"
    ProjectReport median;  // project = "MEDIAN"
    std::map<std::string, int> na_counts;
    int row_count = 0;
};

// Arithmetic mean and median per metric, skipping NAs and disclosing how many
// were skipped. Values keep full precision; rounding happens at rendering.
inline AggregateReport aggregate_report(std::span<const ProjectReport> rows) {
    if (rows.empty()) {
        throw std::invalid_argument("aggregate_report needs at least one row");
    }
    AggregateReport agg;
    agg.row_count = static_cast<int>(rows.size());
    agg.mean.project = "AVG";
    agg.median.project = "MEDIAN";
    for (const std::string& name : report_metric_names()) {
        std::vector<double> values;
        for (const ProjectReport& row : rows) {
            const std::optional<double>* v = report_metric(row, name);
            if (v->has_value()) {
                values.push_back(**v);
            }
        }
        agg.na_counts[name] = static_cast<int>(rows.size() - values.size());
        if (values.empty()) {
            continue;
        }
        double sum = 0.0;
        for (double v : values) sum += v;
        *report_metric(agg.mean, name) = sum / static_cast<double>(values.size());

        std::sort(values.begin(), values.end());
        size_t n = values.size();
        double median = n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
        *report_metric(agg.median, name) = median;
    }
    return agg;
}

struct MetricDelta {
    std::string metric;
    std::optional<double> delta;  // a - b, percentage points
};

inline std::vector<MetricDelta> improvement(const ProjectReport& a, const ProjectReport& b) {
    std::vector<MetricDelta> deltas;
    for (const std::string& name : report_metric_names()) {
        const std::optional<double>* va = report_metric(a, name);
        const std::optional<double>* vb = report_metric(b, name);
        MetricDelta d{name, std::nullopt};
        if (va->has_value() && vb->has_value()) {
            d.delta = **va - **vb;
        }
        deltas.push_back(std::move(d));
    }
    return deltas;
}

inline std::optional<double> delta_for(const std::vector<MetricDelta>& deltas,
                                       std::string_view metric) {
    for (const MetricDelta& d : deltas) {
        if (d.metric == metric) return d.delta;
    }
    return std::nullopt;
}

// Averages over printed comparison rows (augmentation tables). Counts stay
// fractional: a mean of 6.8 killed mutants is reported as 6.8.
struct ComparisonMean {
    double count = 0.0;
    double percent = 0.0;
};

inline ComparisonMean mean_augmentation(std::span<const AugmentationDiff> rows) {
    ComparisonMean mean;
    if (rows.empty()) return mean;
    for (const AugmentationDiff& r : rows) {
        mean.count += static_cast<double>(r.new_count);
        mean.percent += r.new_percent;
    }
    mean.count /= static_cast<double>(rows.size());
    mean.percent /= static_cast<double>(rows.size());
    return mean;
}

inline ComparisonMean mean_new_mutants(std::span<const NewMutantsKilled> rows) {
    ComparisonMean mean;
    if (rows.empty()) return mean;
    for (const NewMutantsKilled& r : rows) {
        mean.count += static_cast<double>(r.count);
        mean.percent += r.percent;
    }
    mean.count /= static_cast<double>(rows.size());
    mean.percent /= static_cast<double>(rows.size());
    return mean;
}

inline std::string format_percent(const std::optional<double>& v) {
    if (!v.has_value()) return "NA";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", *v);
    return buf;
}

// --- augmentation comparison rows ------------------------------------------------

// One project row of the line-coverage and mutation comparison tables.
struct ComparisonRow {
    std::string project;
    long total_lines = 0;
    long model_cl = 0;
    double model_cl_pct = 0.0;
    long baseline_cl = 0;
    double baseline_cl_pct = 0.0;
    long new_cl = 0;
    double new_cl_pct = 0.0;
    std::optional<double> model_ms, model_ams;
    std::optional<double> baseline_ms, baseline_ams;
    long new_mk = 0;
    double new_mk_pct = 0.0;
};

inline ComparisonRow make_comparison_row(const std::string& project, const CoverageSummary& model,
                                         const CoverageSummary& baseline,
                                         const CoverageSummary& developer,
                                         const KillMatrix& model_km,
                                         const KillMatrix& baseline_km) {
    ComparisonRow row;
    row.project = project;
    row.total_lines = model.total_lines;
    row.model_cl = static_cast<long>(model.covered.size());
    row.model_cl_pct = line_coverage(model);
    row.baseline_cl = static_cast<long>(baseline.covered.size());
    row.baseline_cl_pct = line_coverage(baseline);
    AugmentationDiff diff = augmentation_diff(model, baseline, developer);
    row.new_cl = diff.new_count;
    row.new_cl_pct = diff.new_percent;
    MutationScores model_scores = mutation_scores(model_km);
    MutationScores baseline_scores = mutation_scores(baseline_km);
    row.model_ms = model_scores.standard;
    row.model_ams = model_scores.adapted;
    row.baseline_ms = baseline_scores.standard;
    row.baseline_ams = baseline_scores.adapted;
    NewMutantsKilled nm = new_mutants_killed(model_km, baseline_km);
    row.new_mk = nm.count;
    row.new_mk_pct = nm.percent;
    return row;
}

// Counts and percentages must agree with the shared totals to two decimals.
inline bool comparison_row_consistent(const ComparisonRow& row) {
    if (row.total_lines <= 0) return false;
    auto pct = [&](long count) { return 100.0 * static_cast<double>(count) / row.total_lines; };
    return std::abs(pct(row.model_cl) - row.model_cl_pct) < 0.005 &&
           std::abs(pct(row.baseline_cl) - row.baseline_cl_pct) < 0.005 &&
           std::abs(pct(row.new_cl) - row.new_cl_pct) < 0.005 && row.new_cl <= row.model_cl;
}

inline std::string render_comparison_table(std::span<const ComparisonRow> rows) {
    std::string out =
        "project      model CL          baseline CL       new CL            model MS/AMS     "
        "baseline MS/AMS  new MK         total\n";
    char buf[256];
    auto emit = [&](const ComparisonRow& r) {
        std::snprintf(buf, sizeof(buf),
                      "%-12s %6ld (%6.2f%%)  %6ld (%6.2f%%)  %6ld (%6.2f%%)  %7s /%7s  %7s /%7s  "
                      "%4ld (%5.2f%%)  %6ld\n",
                      r.project.c_str(), r.model_cl, r.model_cl_pct, r.baseline_cl,
                      r.baseline_cl_pct, r.new_cl, r.new_cl_pct,
                      format_percent(r.model_ms).c_str(), format_percent(r.model_ams).c_str(),
                      format_percent(r.baseline_ms).c_str(), format_percent(r.baseline_ams).c_str(),
                      r.new_mk, r.new_mk_pct, r.total_lines);
        out += buf;
    };
    for (const ComparisonRow& r : rows) emit(r);
    return out;
}

// --- kill matrix ingestion -----------------------------------------------------

struct KillMatrixParseError : std::runtime_error {
    explicit KillMatrixParseError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {

inline std::vector<std::string> split_on(std::string_view text, char sep) {
    std::vector<std::string> out;
    size_t start = 0;
    while (start <= text.size()) {
        size_t hit = text.find(sep, start);
        if (hit == std::string_view::npos) {
            out.emplace_back(text.substr(start));
            break;
        }
        out.emplace_back(text.substr(start, hit - start));
        start = hit + 1;
    }
    return out;
}

inline std::set<std::string> split_id_list(std::string_view text) {
    std::set<std::string> out;
    for (const std::string& part : split_on(text, ';')) {
        std::string t = trim(part);
        if (!t.empty()) out.insert(std::move(t));
    }
    return out;
}

}  // namespace detail

// Header-bearing CSV: mutant_id,covered_by,killed_by with ';'-separated test
// id lists.
inline KillMatrix parse_kill_matrix_csv(std::string_view text) {
    KillMatrix km;
    std::vector<std::string> lines = split_lines(text);
    if (lines.empty() || trim(lines[0]) != "mutant_id,covered_by,killed_by") {
        throw KillMatrixParseError("expected header mutant_id,covered_by,killed_by");
    }
    for (size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        std::vector<std::string> cols = detail::split_on(lines[i], ',');
        if (cols.size() != 3) {
            throw KillMatrixParseError("row " + std::to_string(i + 1) + " needs 3 columns");
        }
        MutantRecord rec;
        rec.covered_by = detail::split_id_list(cols[1]);
        rec.killed_by = detail::split_id_list(cols[2]);
        for (const std::string& t : rec.killed_by) {
            rec.covered_by.insert(t);  // killed implies covered
        }
        km.mutants[trim(cols[0])] = std::move(rec);
    }
    return km;
}

// Major-style killMap.csv (TestNo,MutantNo pairs) plus the matching
// covMap.csv; `total_mutants` sizes the universe (mutants.log line count in a
// Major run). Unlisted mutants exist with empty sets.
inline KillMatrix import_major_kill_map(std::string_view kill_map_csv, std::string_view cov_map_csv,
                                        long total_mutants) {
    KillMatrix km;
    for (long m = 1; m <= total_mutants; ++m) {
        km.mutants[std::to_string(m)] = MutantRecord{};
    }
    auto ingest = [&](std::string_view csv, bool killed) {
        std::vector<std::string> lines = split_lines(csv);
        for (size_t i = 0; i < lines.size(); ++i) {
            std::string line = trim(lines[i]);
            if (line.empty()) continue;
            if (i == 0 && line.find("TestNo") != std::string::npos) continue;  // header
            std::vector<std::string> cols = detail::split_on(line, ',');
            if (cols.size() < 2) {
                throw KillMatrixParseError("bad TestNo,MutantNo row: " + line);
            }
            std::string test = trim(cols[0]);
            std::string mutant = trim(cols[1]);
            auto it = km.mutants.find(mutant);
            if (it == km.mutants.end()) {
                it = km.mutants.emplace(mutant, MutantRecord{}).first;
            }
            it->second.covered_by.insert(test);
            if (killed) {
                it->second.killed_by.insert(test);
            }
        }
    };
    if (!cov_map_csv.empty()) ingest(cov_map_csv, false);
    if (!kill_map_csv.empty()) ingest(kill_map_csv, true);
    return km;
}

// --- rendering -----------------------------------------------------------------

inline Record report_to_record(const ProjectReport& r) {
    Record rec{{"project", r.project}};
    for (const std::string& name : report_metric_names()) {
        rec.emplace_back(name, format_percent(*report_metric(r, name)));
    }
    return rec;
}

inline ProjectReport report_from_record(const Record& rec) {
    ProjectReport r;
    r.project = record_get(rec, "project").value_or("");
    for (const std::string& name : report_metric_names()) {
        auto v = record_get(rec, name);
        if (v.has_value() && *v != "NA" && !v->empty()) {
            *report_metric(r, name) = std::stod(*v);
        }
    }
    return r;
}

// Plain-text table, metrics as rows and projects as columns.
inline std::string render_report_table(std::span<const ProjectReport> rows,
                                       const AggregateReport* agg = nullptr) {
    std::vector<const ProjectReport*> cols;
    for (const ProjectReport& r : rows) cols.push_back(&r);
    ProjectReport mean_row, median_row;
    if (agg != nullptr) {
        mean_row = agg->mean;
        median_row = agg->median;
        cols.push_back(&mean_row);
        cols.push_back(&median_row);
    }
    size_t label_width = std::string("adapted_mutation_score").size();
    std::vector<size_t> widths;
    for (const ProjectReport* c : cols) {
        size_t w = c->project.size();
        for (const std::string& name : report_metric_names()) {
            w = std::max(w, format_percent(*report_metric(*c, name)).size());
        }
        widths.push_back(w + 2);
    }
    std::string out;
    auto pad = [](std::string_view s, size_t w) {
        std::string cell(s);
        cell.insert(cell.begin(), w > cell.size() ? w - cell.size() : 0, ' ');
        return cell;
    };
    out += pad("metric", label_width);
    for (size_t c = 0; c < cols.size(); ++c) out += pad(cols[c]->project, widths[c]);
    out.push_back('\n');
    for (const std::string& name : report_metric_names()) {
        out += pad(name, label_width);
        for (size_t c = 0; c < cols.size(); ++c) {
            out += pad(format_percent(*report_metric(*cols[c], name)), widths[c]);
        }
        out.push_back('\n');
    }
    return out;
}

}  // namespace testgen
