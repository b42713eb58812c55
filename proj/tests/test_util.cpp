#include <doctest.h>

#include "testgen/util.hpp"

using namespace testgen;

TEST_CASE("count_lines matches newline-delimited line count") {
    CHECK(count_lines("") == 0);
    CHECK(count_lines("a") == 1);
    CHECK(count_lines("a\nb") == 2);
    CHECK(count_lines("a\nb\n") == 2);
    CHECK(count_lines("\n") == 1);
    CHECK(count_lines("\n\n") == 2);
}

TEST_CASE("collapse_whitespace") {
    CHECK(collapse_whitespace("  public   void  f ( ) ") == "public void f ( )");
    CHECK(collapse_whitespace("a\n\tb") == "a b");
    CHECK(collapse_whitespace("") == "");
}

TEST_CASE("glob_match handles ** and *") {
    CHECK(glob_match("src/main/java/**/*.java", "src/main/java/com/foo/A.java"));
    CHECK(glob_match("src/main/java/**/*.java", "src/main/java/A.java"));
    CHECK_FALSE(glob_match("src/main/java/**/*.java", "src/test/java/com/foo/A.java"));
    CHECK(glob_match("src/test/**", "src/test/java/FooTest.java"));
    CHECK_FALSE(glob_match("src/test/**", "src/main/java/Foo.java"));
    CHECK(glob_match("*.xml", "report.xml"));
    CHECK_FALSE(glob_match("*.xml", "dir/report.xml"));
    CHECK(glob_match("coverage-*.xml", "coverage-T1.xml"));
}

TEST_CASE("fnv1a64 is stable") {
    CHECK(fnv1a64("") == kFnvOffset);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    CHECK(hex64(0xaf63dc4c8601ec8cull) == "af63dc4c8601ec8c");
}
