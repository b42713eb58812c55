#include <doctest.h>

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "testgen/metrics.hpp"

using namespace testgen;

namespace {

TokenSeq seq(std::initializer_list<const char*> toks) {
    TokenSeq out;
    for (const char* t : toks) {
        out.push_back({t, java_keywords().count(t) > 0});
    }
    return out;
}

const char* kHashBody =
    "public void testHashCode1609() {\n"
    "    ArcDialFrame f1 = new ArcDialFrame();\n"
    "    ArcDialFrame f2 = new ArcDialFrame();\n"
    "    assertTrue(f1.equals(f2));\n"
    "    int h1 = f1.hashCode();\n"
    "    int h2 = f2.hashCode();\n"
    "    assertEquals(h1, h2);\n"
    "}";

}  // namespace

TEST_CASE("tokenize_code splits punctuation and keeps literals whole") {
    TokenSeq toks = tokenize_code("assertEquals(h1, h2);");
    std::vector<std::string> texts;
    for (const auto& t : toks) texts.push_back(t.text);
    CHECK(texts == std::vector<std::string>{"assertEquals", "(", "h1", ",", "h2", ")", ";"});

    CHECK(tokenize_code("").empty());

    TokenSeq lit = tokenize_code("log(\"two words\", 'x');");
    CHECK(lit[2].text == "\"two words\"");
    CHECK(lit[4].text == "'x'");
}

TEST_CASE("tokenize_code tags keywords and drops comments") {
    TokenSeq toks = tokenize_code("return x; // done");
    REQUIRE(toks.size() == 3);
    CHECK(toks[0].is_keyword);
    CHECK_FALSE(toks[1].is_keyword);
    CHECK(toks[2].text == ";");
}

TEST_CASE("tokenizer idempotence: rejoining with spaces re-tokenizes identically") {
    std::vector<std::string> samples = {
        kHashBody,
        "int a = obj.call(1, \"s s\") + 'c';",
        "for(int i=0;i<10;i++){sum+=i;}",
    };
    for (const std::string& s : samples) {
        TokenSeq first = tokenize_code(s);
        std::string rejoined;
        for (size_t i = 0; i < first.size(); ++i) {
            if (i) rejoined.push_back(' ');
            rejoined += first[i].text;
        }
        TokenSeq second = tokenize_code(rejoined);
        CHECK(first == second);
    }
}

TEST_CASE("hand count of the 1609 fixture body: 58 tokens") {
    CHECK(tokenize_code(kHashBody).size() == 58);
}

TEST_CASE("bleu: identity is exactly 100") {
    TokenSeq s = tokenize_code(kHashBody);
    CHECK(bleu(s, s) == doctest::Approx(100.0));
    TokenSeq tiny = seq({"return", ";"});
    CHECK(bleu(tiny, tiny) == doctest::Approx(100.0));
}

TEST_CASE("bleu: empty candidate scores 0") {
    CHECK(bleu({}, tokenize_code("int x;")) == 0.0);
}

TEST_CASE("bleu hand oracle: [a,b,c,d] vs [a,b,c,e] -> 59.46") {
    // p1 = 3/4, p2 = 2/3, p3 = 1/2, p4 smoothed to 1/2;
    // 100 * (3/4 * 2/3 * 1/2 * 1/2)^(1/4) = 100 * 0.125^0.25 = 59.4604
    TokenSeq cand = seq({"a", "b", "c", "d"});
    TokenSeq ref = seq({"a", "b", "c", "e"});
    std::vector<double> ps = ngram_precisions(cand, ref);
    CHECK(ps[0] == doctest::Approx(0.75));
    CHECK(ps[1] == doctest::Approx(2.0 / 3.0));
    CHECK(ps[2] == doctest::Approx(0.5));
    CHECK(ps[3] == doctest::Approx(0.5));
    CHECK(std::abs(bleu(cand, ref) - 59.46) <= 0.01);
}

TEST_CASE("bleu monotone degradation: deleting a token never raises the unigram match count") {
    TokenSeq cand = tokenize_code("assertEquals(h1, h2);");
    TokenSeq ref = tokenize_code("assertEquals(h1, x2);");
    auto matched_unigrams = [&](const TokenSeq& c) {
        std::map<std::string, long> counts;
        for (const auto& t : ref) counts[t.text]++;
        long m = 0;
        std::map<std::string, long> used;
        for (const auto& t : c) {
            if (used[t.text] < counts[t.text]) {
                ++used[t.text];
                ++m;
            }
        }
        return m;
    };
    long base = matched_unigrams(cand);
    for (size_t i = 0; i < cand.size(); ++i) {
        TokenSeq smaller = cand;
        smaller.erase(smaller.begin() + static_cast<long>(i));
        CHECK(matched_unigrams(smaller) <= base);
    }
}

TEST_CASE("weighted ngram: identity 1.0, disjoint 0") {
    TokenSeq s = tokenize_code("return value;");
    CHECK(weighted_ngram_match(s, s) == doctest::Approx(1.0));
    CHECK(weighted_ngram_match(tokenize_code("int a"), tokenize_code("char b")) == 0.0);
}

TEST_CASE("weighted unigram hand oracle: [return,x] vs [return,y] -> 0.8") {
    // matched weight = 4 (return); total weight = 4 + 1 = 5
    TokenSeq cand = seq({"return", "x"});
    TokenSeq ref = seq({"return", "y"});
    std::vector<double> ps = weighted_ngram_precisions(cand, ref);
    CHECK(std::abs(ps[0] - 0.8) <= 0.01);
}

TEST_CASE("ast_match: identity, unparsable, anonymized identifiers") {
    CHECK(ast_match(kHashBody, kHashBody) == doctest::Approx(1.0));

    MatchDiagnostics diag;
    CHECK(ast_match("void broken( {", kHashBody, &diag) == 0.0);
    CHECK_FALSE(diag.candidate_parsed);

    CHECK(ast_match("x = a + b;", "y = c + d;") == doctest::Approx(1.0));
    CHECK(ast_match("x = a + b;", "y = c * d;") == doctest::Approx(0.0));
}

TEST_CASE("dataflow_match: identity and normalization") {
    CHECK(dataflow_match(kHashBody, kHashBody) == doctest::Approx(1.0));
    CHECK(dataflow_match("int a=1; use(a);", "int b=1; use(b);") == doctest::Approx(1.0));
}

TEST_CASE("dataflow hand oracle: two uses vs one -> 0.5") {
    // candidate edges: (v0,d0) twice; reference: (v0,d0) once
    auto cand_edges = extract_def_use_edges("int a=1; use(a); use(a);");
    auto ref_edges = extract_def_use_edges("int b=1; use(b);");
    CHECK(cand_edges.size() == 2);
    CHECK(ref_edges.size() == 1);
    CHECK(dataflow_match("int a=1; use(a); use(a);", "int b=1; use(b);") == doctest::Approx(0.5));
}

TEST_CASE("dataflow edges: redefinition bumps the def ordinal") {
    auto edges = extract_def_use_edges("int a=1; use(a); a=2; use(a);");
    REQUIRE(edges.size() == 2);
    CHECK(edges[0] == DataflowEdge{0, 0});
    CHECK(edges[1] == DataflowEdge{0, 1});
    CHECK(dataflow_match("int a=1; use(a); use(a);", "int b=1; use(b); b=2; use(b);") ==
          doctest::Approx(0.5));
}

TEST_CASE("codebleu: identity 100, all-zero 0") {
    CodeBleuBreakdown same = codebleu(kHashBody, kHashBody);
    CHECK(same.score == doctest::Approx(100.0));
    CHECK(same.ast == doctest::Approx(1.0));
    CHECK(same.dataflow == doctest::Approx(1.0));
    CHECK(codebleu_combine(0, 0, 0, 0) == 0.0);
}

TEST_CASE("codebleu combination arithmetic: (0.5946, 0.8, 1.0, 0.5) -> 72.37") {
    double score = codebleu_combine(59.46, 0.8, 1.0, 0.5);
    CHECK(std::abs(score - 72.37) <= 0.01);
}

TEST_CASE("codebleu stays inside the convex hull of its components") {
    std::vector<std::pair<std::string, std::string>> pairs = {
        {kHashBody, kHashBody},
        {"int a=1; use(a);", "int b=2; other(b);"},
        {"void t(){ x = y + z; }", "void u(){ p = q + r; }"},
    };
    for (const auto& [cand, ref] : pairs) {
        CodeBleuBreakdown b = codebleu(cand, ref);
        double lo = std::min(std::min(b.bleu_score / 100.0, b.weighted_ngram),
                             std::min(b.ast, b.dataflow));
        double hi = std::max(std::max(b.bleu_score / 100.0, b.weighted_ngram),
                             std::max(b.ast, b.dataflow));
        CHECK(b.score / 100.0 >= lo - 1e-9);
        CHECK(b.score / 100.0 <= hi + 1e-9);
    }
}

TEST_CASE("consistent identifier renaming leaves ast and dataflow unchanged") {
    std::string original =
        "public void testRename() {\n"
        "    int alpha = make();\n"
        "    int beta = alpha + 1;\n"
        "    assertEquals(alpha, beta);\n"
        "}";
    std::string renamed =
        "public void zz1() {\n"
        "    int q = zz2();\n"
        "    int w = q + 1;\n"
        "    assertEquals(q, w);\n"
        "}";
    std::string reference =
        "public void check() {\n"
        "    int left = make();\n"
        "    int right = left + 1;\n"
        "    assertEquals(left, right);\n"
        "}";
    CHECK(ast_match(original, reference) == doctest::Approx(ast_match(renamed, reference)));
    CHECK(dataflow_match(original, reference) ==
          doctest::Approx(dataflow_match(renamed, reference)));
    CHECK(ast_match(original, reference) == doctest::Approx(1.0));
}

TEST_CASE("corpus_bleu pools counts across pairs") {
    TokenSeq a = tokenize_code("assertEquals(1, f(1));");
    TokenSeq b = tokenize_code("assertEquals(2, f(2));");
    std::vector<std::pair<TokenSeq, TokenSeq>> identical = {{a, a}, {b, b}};
    CHECK(corpus_bleu(identical) == doctest::Approx(100.0));
    CHECK(corpus_bleu({}) == 0.0);
}

TEST_CASE("score_paired_lines: aligned flattened files") {
    std::string refs =
        "public void t1() {[EOL]    assertTrue(ok());[EOL]}\n"
        "public void t2() {[EOL]    assertEquals(1, one());[EOL]}\n";
    // first candidate identical, second different
    std::string cands =
        "public void t1() {[EOL]    assertTrue(ok());[EOL]}\n"
        "public void other() {[EOL]    fail();[EOL]}\n";
    PairedScoreBatch batch = score_paired_lines(cands, refs);
    REQUIRE(batch.pair_count == 2);
    CHECK(batch.pairs[0].breakdown.score == doctest::Approx(100.0));
    CHECK(batch.pairs[1].breakdown.score < 100.0);
    CHECK(batch.bleu_aggregate ==
          doctest::Approx((batch.pairs[0].breakdown.bleu_score +
                           batch.pairs[1].breakdown.bleu_score) / 2.0));

    PairedScoreBatch pooled =
        score_paired_lines(cands, refs, {}, CorpusAggregation::CorpusPooled);
    CHECK(pooled.bleu_aggregate > 0.0);

    CHECK_THROWS_AS(score_paired_lines("one line\n", refs, {}), PairedInputError);
}
