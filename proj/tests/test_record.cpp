#include <doctest.h>

#include "testgen/record.hpp"

using namespace testgen;

TEST_CASE("record round-trip with awkward bytes") {
    Record rec = {
        {"path", "src/main/java/A.java"},
        {"body", "line1\nline2\twith tab"},
        {"pct", "100%"},
    };
    std::string line = encode_record(rec);
    CHECK(line.find('\n') == std::string::npos);
    Record back = decode_record(line);
    CHECK(back == rec);
}

TEST_CASE("decode_record rejects malformed fields") {
    CHECK_THROWS_AS(decode_record("novalue"), RecordError);
}

TEST_CASE("record_get and record_require") {
    Record rec = {{"a", "1"}, {"b", ""}};
    CHECK(record_get(rec, "a") == std::string("1"));
    CHECK(record_get(rec, "b") == std::string(""));
    CHECK_FALSE(record_get(rec, "c").has_value());
    CHECK_THROWS_AS(record_require(rec, "c"), RecordError);
}

TEST_CASE("serialize/parse records") {
    std::vector<Record> recs = {{{"k", "v1"}}, {{"k", "v2"}, {"x", "y=z"}}};
    auto text = serialize_records(recs);
    auto back = parse_records(text);
    CHECK(back == recs);
}
