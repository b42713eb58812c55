#include <doctest.h>

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "testgen/coverage_map.hpp"

using namespace testgen;

namespace {

std::string report_xml(const std::string& testid, const std::string& cls, const std::string& path,
                       const std::string& files_block) {
    return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
           "<coverage clover=\"4.4.1\" test=\"" + testid + "\" testclass=\"" + cls +
           "\" testpath=\"" + path + "\">\n<project>\n" + files_block + "</project>\n</coverage>\n";
}

}  // namespace

TEST_CASE("ingest_clover attributes covered lines to the test") {
    std::string xml = report_xml(
        "T", "T", "src/test/java/T.java",
        "<package name=\"com.foo\">\n"
        "  <file name=\"Foo.java\" path=\"src/main/java/com/foo/Foo.java\">\n"
        "    <line num=\"3\" count=\"1\" type=\"stmt\"/>\n"
        "    <line num=\"4\" count=\"2\" type=\"stmt\"/>\n"
        "    <line num=\"5\" count=\"0\" type=\"stmt\"/>\n"
        "  </file>\n"
        "</package>\n");
    CoverageReport report = ingest_clover(xml);
    REQUIRE(report.tests.count("T") == 1);
    const TestCoverage& cov = report.tests.at("T");
    CHECK(cov.classpath == "src/test/java/T.java");
    REQUIRE(cov.covered.size() == 2);
    CHECK(cov.covered[0] == std::pair<std::string, int>{"src/main/java/com/foo/Foo.java", 3});
    CHECK(cov.covered[1] == std::pair<std::string, int>{"src/main/java/com/foo/Foo.java", 4});
}

TEST_CASE("ingest_clover keeps tests with zero covered lines") {
    std::string xml = report_xml("T", "T", "t.java", "");
    CoverageReport report = ingest_clover(xml);
    REQUIRE(report.tests.count("T") == 1);
    CHECK(report.tests.at("T").covered.empty());
}

TEST_CASE("ingest_clover rejects malformed and unknown-schema input") {
    CHECK_THROWS_AS(ingest_clover("<coverage test=\"T\"><project>"), MalformedReport);
    CHECK_THROWS_AS(ingest_clover("<notcoverage/>"), UnknownSchemaVersion);
    CHECK_THROWS_AS(
        ingest_clover(report_xml("T", "T", "p", "<file name=\"A.java\"><line count=\"1\"/></file>")),
        MalformedReport);
    CHECK_THROWS_AS(
        ingest_clover(report_xml("T", "T", "p",
                                 "<file name=\"A.java\"><line num=\"0\" count=\"1\"/></file>")),
        MalformedReport);
}

TEST_CASE("build_line2test inverts coverage preserving first-seen order") {
    CoverageReport cov;
    cov.test_order = {"T1", "T2"};
    cov.tests["T1"] = TestCoverage{"T1", "t1.java", {{"A", 1}, {"A", 2}}};
    cov.tests["T2"] = TestCoverage{"T2", "t2.java", {{"A", 2}}};
    LineTestMap map = build_line2test(cov, Line2TestOptions{{}});
    REQUIRE(map.map.size() == 2);
    CHECK(map.map.at(LineKey{"A", 1}) == std::vector<std::string>{"T1"});
    CHECK(map.map.at(LineKey{"A", 2}) == std::vector<std::string>{"T1", "T2"});
}

TEST_CASE("build_line2test of an empty report is empty") {
    CHECK(build_line2test(CoverageReport{}).empty());
}

TEST_CASE("build_line2test excludes test-root lines") {
    CoverageReport cov;
    cov.test_order = {"T1"};
    cov.tests["T1"] =
        TestCoverage{"T1", "t1.java", {{"src/main/java/A.java", 1}, {"src/test/java/T.java", 9}}};
    LineTestMap map = build_line2test(cov);
    CHECK(map.map.size() == 1);
    CHECK(map.map.begin()->first.file == "src/main/java/A.java");
}

TEST_CASE("line2test and coverage stay bidirectionally consistent") {
    CoverageReport cov;
    cov.test_order = {"T1", "T2", "T3"};
    cov.tests["T1"] = TestCoverage{"T1", "", {{"A", 1}, {"B", 7}, {"A", 3}}};
    cov.tests["T2"] = TestCoverage{"T2", "", {{"A", 3}}};
    cov.tests["T3"] = TestCoverage{"T3", "", {}};
    LineTestMap map = build_line2test(cov, Line2TestOptions{{}});

    // T in map[(f,l)] <=> (f,l) in cov[T]
    for (const auto& [key, tests] : map.map) {
        for (const std::string& t : tests) {
            const auto& covered = cov.tests.at(t).covered;
            CHECK(std::find(covered.begin(), covered.end(),
                            std::pair<std::string, int>{key.file, key.line}) != covered.end());
        }
    }
    for (const std::string& t : cov.test_order) {
        for (const auto& [file, line] : cov.tests.at(t).covered) {
            const auto& tests = map.map.at(LineKey{file, line});
            CHECK(std::find(tests.begin(), tests.end(), t) != tests.end());
        }
    }
}

TEST_CASE("line2test serialization round-trips") {
    CoverageReport cov;
    cov.test_order = {"T1", "T2"};
    cov.tests["T1"] = TestCoverage{"T1", "", {{"A.java", 1}, {"A.java", 2}}};
    cov.tests["T2"] = TestCoverage{"T2", "", {{"A.java", 2}}};
    LineTestMap map = build_line2test(cov, Line2TestOptions{{}});
    std::string text = serialize_line2test(map);
    CHECK(text == "A.java\t1\tT1\nA.java\t2\tT1,T2\n");
    LineTestMap back = parse_line2test(text);
    CHECK(back.map == map.map);
}

TEST_CASE("camel_tokens splits on humps, runs and digits") {
    CHECK(camel_tokens("FooCoreTest") == std::vector<std::string>{"Foo", "Core", "Test"});
    CHECK(camel_tokens("XMLTest") == std::vector<std::string>{"XML", "Test"});
    CHECK(camel_tokens("Footer") == std::vector<std::string>{"Footer"});
    CHECK(camel_tokens("testFoo1609") == std::vector<std::string>{"test", "Foo", "1609"});
    CHECK(camel_tokens("com.foo.BarTest") == std::vector<std::string>{"com", "foo", "Bar", "Test"});
}

TEST_CASE("select_covering_test: match, fallback, first-match") {
    std::vector<TestCase> bar_foo = {{"1", "BarTest", "", ""}, {"2", "FooTest", "", ""}};
    CHECK(select_covering_test(bar_foo, "Foo").id == "2");

    std::vector<TestCase> none = {{"1", "BarTest", "", ""}, {"2", "BazTest", "", ""}};
    CHECK(select_covering_test(none, "Foo").id == "1");

    std::vector<TestCase> multi = {{"1", "FooTest", "", ""}, {"2", "TestFoo", "", ""}};
    CHECK(select_covering_test(multi, "Foo").id == "1");

    CHECK_THROWS_AS(select_covering_test(std::span<const TestCase>{}, "Foo"), EmptyCandidates);
}

TEST_CASE("token matching: Footer does not match Foo, in any order") {
    // Enumerate both candidate orders; the rule must pick FooTest every time.
    std::vector<TestCase> a = {{"foo", "FooTest", "", ""}, {"footer", "FooterTest", "", ""}};
    std::vector<TestCase> b = {{"footer", "FooterTest", "", ""}, {"foo", "FooTest", "", ""}};
    CHECK(select_covering_test(a, "Foo").id == "foo");
    CHECK(select_covering_test(b, "Foo").id == "foo");
    CHECK(class_name_matches("FooTest", "Foo"));
    CHECK(class_name_matches("TestFoo", "Foo"));
    CHECK(class_name_matches("FooCoreTest", "Foo"));
    CHECK_FALSE(class_name_matches("FooterTest", "Foo"));
    // case-sensitive
    CHECK_FALSE(class_name_matches("fooTest", "Foo"));
    // substring mode is the permissive knob
    CHECK(class_name_matches("FooterTest", "Foo", NameMatchMode::Substring));
}

TEST_CASE("select_covering_test is deterministic and total") {
    std::vector<TestCase> candidates = {{"1", "AlphaTest", "", ""},
                                        {"2", "BetaTest", "", ""},
                                        {"3", "GammaFooTest", "", ""}};
    auto by_id = [](const TestCase& x, const TestCase& y) { return x.id < y.id; };
    std::sort(candidates.begin(), candidates.end(), by_id);
    do {
        const TestCase& picked = select_covering_test(candidates, "Foo");
        bool any_match = false;
        for (const TestCase& tc : candidates) {
            if (class_name_matches(tc.class_name, "Foo")) {
                any_match = true;
                CHECK(picked.id == tc.id);  // first match wins
                break;
            }
        }
        if (!any_match) {
            CHECK(picked.id == candidates.front().id);
        }
    } while (std::next_permutation(candidates.begin(), candidates.end(), by_id));
}

TEST_CASE("ingest_clover_dir merges in filename sort order") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "testgen_cov_dir";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::string xml_b = report_xml("B#t", "B", "tb.java",
                                   "<file path=\"src/main/java/A.java\">"
                                   "<line num=\"2\" count=\"1\"/></file>");
    std::string xml_a = report_xml("A#t", "A", "ta.java",
                                   "<file path=\"src/main/java/A.java\">"
                                   "<line num=\"2\" count=\"1\"/></file>");
    write_file(dir / "coverage-Btest.xml", xml_b);
    write_file(dir / "coverage-Atest.xml", xml_a);
    CoverageReport merged = ingest_clover_dir(dir);
    REQUIRE(merged.test_order.size() == 2);
    CHECK(merged.test_order[0] == "A#t");
    CHECK(merged.test_order[1] == "B#t");
    LineTestMap map = build_line2test(merged);
    CHECK(map.map.at(LineKey{"src/main/java/A.java", 2}) ==
          std::vector<std::string>{"A#t", "B#t"});
    fs::remove_all(dir);
}

TEST_CASE("ingest_clover requires a recorded test classpath") {
    std::string xml =
        "<coverage test=\"T\"><project><file path=\"A.java\">"
        "<line num=\"1\" count=\"1\"/></file></project></coverage>";
    CHECK_THROWS_AS(ingest_clover(xml), MalformedReport);
}

TEST_CASE("line universe keeps uncovered lines") {
    std::string xml = report_xml("T", "T", "t.java",
                                 "<file path=\"src/main/java/A.java\">"
                                 "<line num=\"1\" count=\"1\"/>"
                                 "<line num=\"2\" count=\"0\"/>"
                                 "</file>");
    CoverageReport report = ingest_clover(xml);
    CHECK(report.line_universe.size() == 2);
    CHECK(report.tests.at("T").covered.size() == 1);
}

TEST_CASE("totality: mutated reports parse or raise typed errors") {
    std::string base = report_xml("T", "T", "t.java",
                                  "<file path=\"src/main/java/A.java\">"
                                  "<line num=\"3\" count=\"1\" type=\"stmt\"/></file>");
    std::mt19937 gen(5150);
    for (int iter = 0; iter < 500; ++iter) {
        std::string s = base;
        size_t pos = gen() % s.size();
        switch (gen() % 3) {
            case 0: s[pos] = static_cast<char>(gen() % 128); break;
            case 1: s.erase(pos, 1 + gen() % 5); break;
            default: s.insert(pos, "<"); break;
        }
        try {
            (void)ingest_clover(s);
        } catch (const MalformedReport&) {
        } catch (const UnknownSchemaVersion&) {
        }
    }
}
