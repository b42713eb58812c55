#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "testgen/adequacy.hpp"

using namespace testgen;

namespace {

CoverageSummary summary(const std::string& project, long total, std::vector<int> covered_lines) {
    CoverageSummary s;
    s.project = project;
    s.total_lines = total;
    for (int line : covered_lines) s.covered.insert({"F.java", line});
    return s;
}

KillMatrix matrix(long total, long covered, long killed) {
    // killed <= covered <= total
    KillMatrix km;
    for (long m = 0; m < total; ++m) {
        MutantRecord rec;
        if (m < covered) rec.covered_by.insert("T");
        if (m < killed) rec.killed_by.insert("T");
        km.mutants["m" + std::to_string(m)] = rec;
    }
    return km;
}

ProjectReport row(const std::string& name, double parse, double compile, double b, double cb,
                  double lc, double ms) {
    ProjectReport r;
    r.project = name;
    r.parse_rate = parse;
    r.compile_rate = compile;
    r.bleu = b;
    r.codebleu = cb;
    r.line_coverage = lc;
    r.mutation_score = ms;
    return r;
}

}  // namespace

TEST_CASE("line_coverage: 216 of 372 is 58.06 percent") {
    std::vector<int> lines;
    for (int i = 1; i <= 216; ++i) lines.push_back(i);
    CHECK(std::abs(line_coverage(summary("compress", 372, lines)) - 58.06) <= 0.01);
}

TEST_CASE("line_coverage: zero covered and empty project") {
    CHECK(line_coverage(summary("p", 10, {})) == 0.0);
    CHECK(std::abs(line_coverage(summary("p", 10, {1, 2, 3})) - 30.0) <= 1e-9);
    CHECK_THROWS_AS(line_coverage(summary("p", 0, {})), EmptyProject);
}

TEST_CASE("mutation_scores: hand-verified 26/116 and 26/48") {
    // 26/116 = 22.4138 -> 22.41; 26/48 = 54.1667 -> 54.17 (printed table rounds
    // to 22.40 / 54.20)
    KillMatrix km = matrix(116, 48, 26);
    MutationScores scores = mutation_scores(km);
    REQUIRE(scores.standard.has_value());
    REQUIRE(scores.adapted.has_value());
    CHECK(std::abs(*scores.standard - 22.41) <= 0.01);
    CHECK(std::abs(*scores.adapted - 54.17) <= 0.01);
}

TEST_CASE("mutation_scores: degenerate inputs") {
    MutationScores none_killed = mutation_scores(matrix(50, 0, 0));
    CHECK(*none_killed.standard == 0.0);
    CHECK_FALSE(none_killed.adapted.has_value());  // nothing covered -> NA

    MutationScores all_covered_killed = mutation_scores(matrix(10, 4, 4));
    CHECK(*all_covered_killed.adapted == doctest::Approx(100.0));

    MutationScores empty = mutation_scores(KillMatrix{});
    CHECK_FALSE(empty.standard.has_value());
}

TEST_CASE("adapted >= standard whenever both defined") {
    for (long total = 1; total <= 12; ++total) {
        for (long covered = 1; covered <= total; ++covered) {
            for (long killed = 0; killed <= covered; ++killed) {
                MutationScores s = mutation_scores(matrix(total, covered, killed));
                REQUIRE(s.standard.has_value());
                REQUIRE(s.adapted.has_value());
                CHECK(*s.adapted >= *s.standard - 1e-9);
            }
        }
    }
}

TEST_CASE("augmentation_diff: disjoint and subset cases") {
    CoverageSummary model = summary("p", 10, {1, 2, 3, 4, 5});
    CoverageSummary baseline = summary("p", 10, {6, 7, 8});
    CoverageSummary developer = summary("p", 10, {});
    AugmentationDiff diff = augmentation_diff(model, baseline, developer);
    CHECK(diff.new_count == 5);
    CHECK(diff.new_percent == doctest::Approx(50.0));

    AugmentationDiff none = augmentation_diff(summary("p", 10, {6, 7}), baseline, developer);
    CHECK(none.new_count == 0);
    CHECK(none.new_percent == 0.0);

    CHECK_THROWS_AS(augmentation_diff(summary("p", 11, {}), baseline, developer),
                    MismatchedUniverse);
}

TEST_CASE("augmentation count + overlap equals model coverage") {
    CoverageSummary model = summary("p", 20, {1, 2, 3, 4, 5, 6});
    CoverageSummary baseline = summary("p", 20, {2, 4, 9});
    CoverageSummary developer = summary("p", 20, {5, 11});
    AugmentationDiff diff = augmentation_diff(model, baseline, developer);
    long overlap = 0;
    for (const auto& line : model.covered) {
        if (baseline.covered.count(line) || developer.covered.count(line)) ++overlap;
    }
    CHECK(diff.new_count + overlap == static_cast<long>(model.covered.size()));
}

TEST_CASE("new_mutants_killed: table row and edge cases") {
    // model kills 26 mutants the baseline does not, out of 116
    KillMatrix model = matrix(116, 48, 26);
    KillMatrix baseline = matrix(116, 48, 0);
    NewMutantsKilled nm = new_mutants_killed(model, baseline);
    CHECK(nm.count == 26);
    CHECK(std::abs(nm.percent - 22.41) <= 0.01);

    NewMutantsKilled none = new_mutants_killed(baseline, model);  // baseline kills everything model does
    CHECK(none.count == 0);

    KillMatrix smaller = matrix(10, 5, 2);
    CHECK_THROWS_AS(new_mutants_killed(model, smaller), MismatchedUniverse);
}

TEST_CASE("aggregate_report reproduces the with-DA line coverage mean") {
    std::vector<ProjectReport> rows;
    std::vector<double> lc = {32.80, 52.20, 21.20, 43.10, 68.00};
    for (size_t i = 0; i < lc.size(); ++i) {
        ProjectReport r;
        r.project = "p" + std::to_string(i);
        r.line_coverage = lc[i];
        rows.push_back(r);
    }
    AggregateReport agg = aggregate_report(rows);
    CHECK(std::abs(*agg.mean.line_coverage - 43.46) <= 0.01);
    CHECK(std::abs(*agg.median.line_coverage - 43.10) <= 0.01);
    CHECK(agg.na_counts.at("line_coverage") == 0);
    CHECK(agg.na_counts.at("bleu") == 5);
    CHECK_FALSE(agg.mean.bleu.has_value());
}

TEST_CASE("aggregate of a single row is the row; permutation invariance") {
    ProjectReport r = row("solo", 10, 20, 30, 40, 50, 60);
    AggregateReport agg = aggregate_report(std::vector<ProjectReport>{r});
    CHECK(*agg.mean.parse_rate == doctest::Approx(10.0));
    CHECK(*agg.median.parse_rate == doctest::Approx(10.0));

    std::vector<ProjectReport> rows = {row("a", 1, 2, 3, 4, 5, 6), row("b", 7, 8, 9, 10, 11, 12),
                                       row("c", 13, 14, 15, 16, 17, 18)};
    AggregateReport fwd = aggregate_report(rows);
    std::reverse(rows.begin(), rows.end());
    AggregateReport rev = aggregate_report(rows);
    CHECK(*fwd.mean.bleu == doctest::Approx(*rev.mean.bleu));
    CHECK(*fwd.median.bleu == doctest::Approx(*rev.median.bleu));
}

TEST_CASE("aggregate mean of identical rows equals the row") {
    std::vector<ProjectReport> rows(4, row("same", 11, 22, 33, 44, 55, 66));
    AggregateReport agg = aggregate_report(rows);
    CHECK(*agg.mean.compile_rate == doctest::Approx(22.0));
    CHECK(*agg.median.mutation_score == doctest::Approx(66.0));
}

TEST_CASE("improvement: deltas and self-comparison") {
    ProjectReport a = row("a", 95.42, 43.23, 38.48, 32.67, 43.46, 27.97);
    ProjectReport b = row("b", 23.30, 5.89, 18.10, 16.33, 24.84, 11.52);
    auto deltas = improvement(a, b);
    CHECK(std::abs(*delta_for(deltas, "line_coverage") - 18.62) <= 0.01);
    CHECK(std::abs(*delta_for(deltas, "parse_rate") - 72.12) <= 0.01);
    auto zero = improvement(a, a);
    for (const auto& d : zero) {
        if (d.delta.has_value()) CHECK(*d.delta == doctest::Approx(0.0));
    }
}

TEST_CASE("kill matrix CSV round trip and major import") {
    std::string csv =
        "mutant_id,covered_by,killed_by\n"
        "m1,t1;t2,t1\n"
        "m2,t2,\n"
        "m3,,\n";
    KillMatrix km = parse_kill_matrix_csv(csv);
    CHECK(km.total() == 3);
    CHECK(km.covered() == 2);
    CHECK(km.killed() == 1);
    CHECK(km.mutants.at("m1").killed_by.count("t1") == 1);
    CHECK_THROWS_AS(parse_kill_matrix_csv("wrong,header\n"), KillMatrixParseError);

    std::string kill_map = "TestNo,MutantNo\nt1,1\nt1,3\n";
    std::string cov_map = "TestNo,MutantNo\nt1,1\nt1,2\nt1,3\nt2,4\n";
    KillMatrix major = import_major_kill_map(kill_map, cov_map, 6);
    CHECK(major.total() == 6);
    CHECK(major.covered() == 4);
    CHECK(major.killed() == 2);
}

TEST_CASE("kill matrix invariant: killed_by implies covered_by") {
    KillMatrix km = parse_kill_matrix_csv("mutant_id,covered_by,killed_by\nm1,,t9\n");
    CHECK(km.mutants.at("m1").covered_by.count("t9") == 1);
}

TEST_CASE("mean over printed comparison rows") {
    std::vector<AugmentationDiff> cl_rows = {{174, 46.70}, {31, 4.70}, {82, 6.20},
                                             {1246, 48.0}, {157, 66.50}};
    ComparisonMean cl = mean_augmentation(cl_rows);
    CHECK(std::abs(cl.count - 338.0) <= 0.01);
    CHECK(std::abs(cl.percent - 34.42) <= 0.01);

    std::vector<NewMutantsKilled> mk_rows = {{0, 0}, {0, 0}, {0, 0}, {26, 22.40}, {8, 32.0}};
    ComparisonMean mk = mean_new_mutants(mk_rows);
    CHECK(std::abs(mk.count - 6.8) <= 0.01);
    CHECK(std::abs(mk.percent - 10.88) <= 0.01);
}

TEST_CASE("report records and table rendering") {
    ProjectReport r = row("toy", 50.0, 25.0, 30.5, 28.25, 0, 0);
    r.line_coverage.reset();
    r.mutation_score.reset();
    Record rec = report_to_record(r);
    ProjectReport back = report_from_record(rec);
    CHECK(back.project == "toy");
    CHECK(*back.parse_rate == doctest::Approx(50.0));
    CHECK_FALSE(back.line_coverage.has_value());

    std::vector<ProjectReport> rows = {r};
    AggregateReport agg = aggregate_report(rows);
    std::string table = render_report_table(rows, &agg);
    CHECK(table.find("parse_rate") != std::string::npos);
    CHECK(table.find("50.00") != std::string::npos);
    CHECK(table.find("NA") != std::string::npos);
    CHECK(table.find("AVG") != std::string::npos);
}

TEST_CASE("coverage_summary_from_report uses the full line universe") {
    CoverageReport report;
    report.test_order = {"T1"};
    report.tests["T1"] = TestCoverage{"T1", "t.java", {{"src/main/java/A.java", 1}}};
    report.line_universe = {{"src/main/java/A.java", 1},
                            {"src/main/java/A.java", 2},
                            {"src/main/java/A.java", 3},
                            {"src/test/java/T.java", 9}};
    CoverageSummary summary = coverage_summary_from_report(report, "p");
    CHECK(summary.total_lines == 3);  // test-root line excluded
    CHECK(summary.covered.size() == 1);
    CHECK(std::abs(line_coverage(summary) - 33.33) <= 0.01);
}

TEST_CASE("coverage summary records round-trip") {
    CoverageSummary summary;
    summary.project = "p";
    summary.total_lines = 12;
    summary.covered = {{"A.java", 3}, {"B.java", 8}};
    CoverageSummary back = parse_coverage_summary(serialize_coverage_summary(summary));
    CHECK(back.project == summary.project);
    CHECK(back.total_lines == summary.total_lines);
    CHECK(back.covered == summary.covered);
}

TEST_CASE("comparison rows combine coverage and mutation views") {
    CoverageSummary model = summary("p", 372, {});
    for (int i = 1; i <= 216; ++i) model.covered.insert({"F.java", i});
    CoverageSummary baseline = summary("p", 372, {});
    for (int i = 200; i < 200 + 87; ++i) baseline.covered.insert({"F.java", i});
    CoverageSummary developer = summary("p", 372, {});

    KillMatrix model_km = matrix(116, 48, 26);
    KillMatrix baseline_km = matrix(116, 48, 0);

    ComparisonRow row = make_comparison_row("p", model, baseline, developer, model_km, baseline_km);
    CHECK(row.model_cl == 216);
    CHECK(std::abs(row.model_cl_pct - 58.06) <= 0.01);
    CHECK(row.baseline_cl == 87);
    // new = model minus (baseline + developer): lines 200..216 overlap
    CHECK(row.new_cl == 216 - 17);
    CHECK(row.new_mk == 26);
    CHECK(comparison_row_consistent(row));

    std::string table = render_comparison_table(std::vector<ComparisonRow>{row});
    CHECK(table.find("58.06") != std::string::npos);
    CHECK(table.find("372") != std::string::npos);
}

TEST_CASE("reported medians and median deltas reproduce") {
    auto rows_for = [](std::vector<double> lc, std::vector<double> ms) {
        std::vector<ProjectReport> rows;
        for (size_t i = 0; i < lc.size(); ++i) {
            ProjectReport r;
            r.project = "p" + std::to_string(i);
            r.line_coverage = lc[i];
            r.mutation_score = ms[i];
            rows.push_back(r);
        }
        return rows;
    };
    // without DA: median 25.60 / 11.95, mean 24.84 / 11.52
    AggregateReport noda = aggregate_report(
        rows_for({2.00, 25.60, 2.10, 31.40, 63.10}, {0.55, 12.26, 0.07, 11.95, 32.78}));
    CHECK(std::abs(*noda.median.line_coverage - 25.60) <= 0.01);
    CHECK(std::abs(*noda.median.mutation_score - 11.95) <= 0.01);
    CHECK(std::abs(*noda.mean.line_coverage - 24.84) <= 0.01);
    CHECK(std::abs(*noda.mean.mutation_score - 11.52) <= 0.01);
    // with DA: median 43.10 / 28.60
    AggregateReport da = aggregate_report(
        rows_for({32.80, 52.20, 21.20, 43.10, 68.00}, {20.53, 35.61, 8.70, 28.60, 46.42}));
    CHECK(std::abs(*da.median.line_coverage - 43.10) <= 0.01);
    CHECK(std::abs(*da.median.mutation_score - 28.60) <= 0.01);
    // quoted median improvements: 17.5 line coverage, 16.65 mutation points
    CHECK(std::abs((*da.median.line_coverage - *noda.median.line_coverage) - 17.50) <= 0.01);
    CHECK(std::abs((*da.median.mutation_score - *noda.median.mutation_score) - 16.65) <= 0.01);
}

TEST_CASE("quoted parse-rate gap between the two weakest baselines") {
    // A3Test 57.54 vs without-DA 23.30: +34.24 points
    ProjectReport a3;
    a3.parse_rate = 57.54;
    ProjectReport noda;
    noda.parse_rate = 23.30;
    auto deltas = improvement(a3, noda);
    CHECK(std::abs(*delta_for(deltas, "parse_rate") - 34.24) <= 0.01);
}

TEST_CASE("augmentation-table coverage means and medians reproduce") {
    // model covered-line percents per project and the baseline tool's
    std::vector<double> model_pct = {58, 69, 30, 50, 82};
    std::vector<double> tool_pct = {23, 82, 51, 5, 16};
    auto stats = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        double mean = 0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        return std::pair(mean, v[v.size() / 2]);
    };
    auto [model_mean, model_median] = stats(model_pct);
    auto [tool_mean, tool_median] = stats(tool_pct);
    CHECK(std::abs(model_mean - 57.8) <= 0.01);
    CHECK(std::abs(model_median - 58.0) <= 0.01);
    CHECK(std::abs(tool_mean - 35.4) <= 0.01);
    CHECK(std::abs(tool_median - 23.0) <= 0.01);
}
