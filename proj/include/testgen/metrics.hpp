#pragma once

// Textual similarity metrics: code tokenization, BLEU (modified n-gram
// precisions, add-one smoothing for n >= 2, brevity penalty), and the four
// CodeBLEU components (n-gram, keyword-weighted n-gram, AST subtree match
// with anonymized identifiers, def-use dataflow match).

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "testgen/flatten.hpp"
#include "testgen/java_lexer.hpp"
#include "testgen/java_parser.hpp"
#include "testgen/util.hpp"

namespace testgen {

struct CodeToken {
    std::string text;
    bool is_keyword = false;

    bool operator==(const CodeToken&) const = default;
};

using TokenSeq = std::vector<CodeToken>;

// Whitespace- and punctuation-splitting tokenizer: punctuation becomes
// single-character tokens, string/char literals stay whole, comments are
// dropped, Java keywords are tagged. Re-tokenizing the space-joined output
// reproduces the sequence.
inline TokenSeq tokenize_code(std::string_view text) {
    TokenSeq out;
    size_t i = 0;
    auto is_word = [](unsigned char c) {
        return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80;
    };
    while (i < text.size()) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (std::isspace(c)) {
            ++i;
            continue;
        }
        if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
            while (i < text.size() && text[i] != '\n') ++i;
            continue;
        }
        if (c == '/' && i + 1 < text.size() && text[i + 1] == '*') {
            size_t end = text.find("*/", i + 2);
            i = end == std::string_view::npos ? text.size() : end + 2;
            continue;
        }
        if (c == '"' || c == '\'') {
            char quote = static_cast<char>(c);
            size_t begin = i++;
            while (i < text.size() && text[i] != '\n') {
                if (text[i] == '\\' && i + 1 < text.size()) {
                    i += 2;
                    continue;
                }
                if (text[i] == quote) {
                    ++i;
                    break;
                }
                ++i;
            }
            out.push_back({std::string(text.substr(begin, i - begin)), false});
            continue;
        }
        if (is_word(c)) {
            size_t begin = i;
            while (i < text.size() && is_word(static_cast<unsigned char>(text[i]))) ++i;
            std::string word(text.substr(begin, i - begin));
            bool kw = java_keywords().count(word) > 0;
            out.push_back({std::move(word), kw});
            continue;
        }
        out.push_back({std::string(1, static_cast<char>(c)), false});
        ++i;
    }
    return out;
}

struct BleuConfig {
    int max_n = 4;
    bool smooth_add_one = true;  // for n >= 2 when the raw match count is zero
};

namespace detail {

inline std::map<std::vector<std::string>, long> ngram_counts(const TokenSeq& seq, int n) {
    std::map<std::vector<std::string>, long> counts;
    if (static_cast<int>(seq.size()) < n) return counts;
    for (size_t i = 0; i + static_cast<size_t>(n) <= seq.size(); ++i) {
        std::vector<std::string> gram;
        gram.reserve(static_cast<size_t>(n));
        for (int k = 0; k < n; ++k) gram.push_back(seq[i + static_cast<size_t>(k)].text);
        counts[std::move(gram)]++;
    }
    return counts;
}

}  // namespace detail

// Modified n-gram precisions for n = 1..max_n (candidate counts clipped by
// reference counts). With smoothing, a zero match count at n >= 2 becomes
// (m+1)/(t+1); an empty candidate yields precision 0 at n = 1.
inline std::vector<double> ngram_precisions(const TokenSeq& candidate, const TokenSeq& reference,
                                            const BleuConfig& cfg = {}) {
    std::vector<double> out;
    for (int n = 1; n <= cfg.max_n; ++n) {
        auto cand = detail::ngram_counts(candidate, n);
        auto ref = detail::ngram_counts(reference, n);
        long total = 0;
        long matched = 0;
        for (const auto& [gram, count] : cand) {
            total += count;
            auto it = ref.find(gram);
            if (it != ref.end()) {
                matched += std::min(count, it->second);
            }
        }
        double p;
        if (n == 1) {
            p = total > 0 ? static_cast<double>(matched) / static_cast<double>(total) : 0.0;
        } else if (cfg.smooth_add_one && matched == 0) {
            p = static_cast<double>(matched + 1) / static_cast<double>(total + 1);
        } else {
            p = total > 0 ? static_cast<double>(matched) / static_cast<double>(total) : 0.0;
        }
        out.push_back(p);
    }
    return out;
}

inline double brevity_penalty(size_t candidate_len, size_t reference_len) {
    if (candidate_len == 0) return 0.0;
    if (candidate_len >= reference_len) return 1.0;
    return std::exp(1.0 - static_cast<double>(reference_len) / static_cast<double>(candidate_len));
}

// Sentence BLEU on [0, 100].
inline double bleu(const TokenSeq& candidate, const TokenSeq& reference,
                   const BleuConfig& cfg = {}) {
    if (candidate.empty()) return 0.0;
    std::vector<double> ps = ngram_precisions(candidate, reference, cfg);
    double log_sum = 0.0;
    for (double p : ps) {
        if (p <= 0.0) return 0.0;
        log_sum += std::log(p);
    }
    double geo = std::exp(log_sum / static_cast<double>(ps.size()));
    return 100.0 * brevity_penalty(candidate.size(), reference.size()) * geo;
}

struct CodeBleuConfig {
    double alpha = 0.25;  // BLEU
    double beta = 0.25;   // weighted n-gram
    double gamma = 0.25;  // AST match
    double delta = 0.25;  // dataflow match
    double keyword_weight = 4.0;
    BleuConfig bleu;
};

// Weighted modified n-gram precisions: every n-gram weighs the sum of its
// token weights (keyword_weight for keywords, 1 otherwise).
inline std::vector<double> weighted_ngram_precisions(const TokenSeq& candidate,
                                                     const TokenSeq& reference,
                                                     const CodeBleuConfig& cfg = {}) {
    auto weight_of = [&cfg](const std::string& tok) {
        return java_keywords().count(tok) ? cfg.keyword_weight : 1.0;
    };
    std::vector<double> out;
    for (int n = 1; n <= cfg.bleu.max_n; ++n) {
        auto cand = detail::ngram_counts(candidate, n);
        auto ref = detail::ngram_counts(reference, n);
        double total = 0.0;
        double matched = 0.0;
        for (const auto& [gram, count] : cand) {
            double w = 0.0;
            for (const std::string& tok : gram) w += weight_of(tok);
            total += w * static_cast<double>(count);
            auto it = ref.find(gram);
            if (it != ref.end()) {
                matched += w * static_cast<double>(std::min(count, it->second));
            }
        }
        double p;
        if (n == 1) {
            p = total > 0 ? matched / total : 0.0;
        } else if (cfg.bleu.smooth_add_one && matched == 0.0) {
            p = (matched + 1.0) / (total + 1.0);
        } else {
            p = total > 0 ? matched / total : 0.0;
        }
        out.push_back(p);
    }
    return out;
}

// Keyword-weighted n-gram match on [0, 1], combined over n like BLEU.
inline double weighted_ngram_match(const TokenSeq& candidate, const TokenSeq& reference,
                                   const CodeBleuConfig& cfg = {}) {
    if (candidate.empty()) return 0.0;
    std::vector<double> ps = weighted_ngram_precisions(candidate, reference, cfg);
    double log_sum = 0.0;
    for (double p : ps) {
        if (p <= 0.0) return 0.0;
        log_sum += std::log(p);
    }
    double geo = std::exp(log_sum / static_cast<double>(ps.size()));
    return brevity_penalty(candidate.size(), reference.size()) * geo;
}

struct MatchDiagnostics {
    bool candidate_parsed = true;
    bool reference_parsed = true;
};

namespace detail {

inline std::optional<AstNode> parse_flexible(std::string_view text) {
    ParseResult members = parse_members_snippet(text);
    if (members.ok) return std::move(members.root);
    ParseResult stmts = parse_statements_snippet(text);
    if (stmts.ok) return std::move(stmts.root);
    return std::nullopt;
}

inline void serialize_subtree(const AstNode& node, std::string& out) {
    if (node.kind == NodeKind::Leaf) {
        if (node.leaf_kind == Tok::Identifier) {
            out += "ID";
        } else {
            out += node.text;
        }
        return;
    }
    out += std::to_string(static_cast<int>(node.kind));
    out.push_back('(');
    for (const AstNode& child : node.children) {
        serialize_subtree(child, out);
        out.push_back(',');
    }
    out.push_back(')');
}

// All subtrees rooted at internal nodes (depth >= 2 counting the leaf level),
// excluding the synthetic snippet root.
inline void collect_subtrees(const AstNode& node, bool is_root, std::vector<std::string>& out) {
    if (node.kind != NodeKind::Leaf && !node.children.empty() && !is_root) {
        std::string repr;
        serialize_subtree(node, repr);
        out.push_back(std::move(repr));
    }
    for (const AstNode& child : node.children) {
        collect_subtrees(child, false, out);
    }
}

}  // namespace detail

// Share of candidate syntax subtrees (identifiers anonymized) found in the
// reference's subtree multiset; matches consume reference multiplicity.
inline double ast_match(std::string_view candidate_text, std::string_view reference_text,
                        MatchDiagnostics* diag = nullptr) {
    auto cand_tree = detail::parse_flexible(candidate_text);
    auto ref_tree = detail::parse_flexible(reference_text);
    if (diag != nullptr) {
        diag->candidate_parsed = cand_tree.has_value();
        diag->reference_parsed = ref_tree.has_value();
    }
    if (!cand_tree || !ref_tree) return 0.0;
    std::vector<std::string> cand_subtrees, ref_subtrees;
    detail::collect_subtrees(*cand_tree, true, cand_subtrees);
    detail::collect_subtrees(*ref_tree, true, ref_subtrees);
    if (cand_subtrees.empty()) {
        return ref_subtrees.empty() ? 1.0 : 0.0;
    }
    std::map<std::string, long> ref_counts;
    for (std::string& s : ref_subtrees) ref_counts[std::move(s)]++;
    long matched = 0;
    for (const std::string& s : cand_subtrees) {
        auto it = ref_counts.find(s);
        if (it != ref_counts.end() && it->second > 0) {
            ++matched;
            --it->second;
        }
    }
    return static_cast<double>(matched) / static_cast<double>(cand_subtrees.size());
}

struct DataflowEdge {
    int var_index = 0;    // variables numbered by first definition
    int def_ordinal = 0;  // which definition of that variable the use reads
    auto operator<=>(const DataflowEdge&) const = default;
};

// Def-use edges from the token stream: a definition is an identifier directly
// followed by an assignment operator; a use is any later occurrence of a
// defined variable that is neither a member access nor a call. Increment and
// decrement read as uses.
inline std::vector<DataflowEdge> extract_def_use_edges(std::string_view text) {
    LexResult lexed = lex_java(text);
    if (!lexed.ok) return {};
    static const std::unordered_set<std::string_view> assign_ops = {
        "=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>=",
    };
    struct VarState {
        int index;
        int def_ordinal;
    };
    std::map<std::string, VarState> vars;
    int next_index = 0;
    std::vector<DataflowEdge> edges;
    const std::vector<Token>& toks = lexed.tokens;
    for (size_t i = 0; i < toks.size(); ++i) {
        const Token& t = toks[i];
        if (t.kind != Tok::Identifier) continue;
        if (i > 0 && toks[i - 1].is(".")) continue;       // member access
        if (i + 1 < toks.size() && toks[i + 1].is("(")) continue;  // call
        bool is_assign = i + 1 < toks.size() && toks[i + 1].kind == Tok::Op &&
                         assign_ops.count(toks[i + 1].text) > 0;
        auto it = vars.find(t.text);
        if (is_assign) {
            bool compound = !toks[i + 1].is("=");
            if (compound && it != vars.end()) {
                edges.push_back({it->second.index, it->second.def_ordinal});
            }
            if (it == vars.end()) {
                vars.emplace(t.text, VarState{next_index++, 0});
            } else {
                it->second.def_ordinal++;
            }
            continue;
        }
        if (it != vars.end()) {
            edges.push_back({it->second.index, it->second.def_ordinal});
        }
    }
    return edges;
}

// Matched candidate def-use edges over total candidate edges; both-empty
// falls back to 1.
inline double dataflow_match(std::string_view candidate_text, std::string_view reference_text,
                             MatchDiagnostics* diag = nullptr) {
    auto cand_tree = detail::parse_flexible(candidate_text);
    auto ref_tree = detail::parse_flexible(reference_text);
    if (diag != nullptr) {
        diag->candidate_parsed = cand_tree.has_value();
        diag->reference_parsed = ref_tree.has_value();
    }
    if (!cand_tree || !ref_tree) return 0.0;
    std::vector<DataflowEdge> cand = extract_def_use_edges(candidate_text);
    std::vector<DataflowEdge> ref = extract_def_use_edges(reference_text);
    if (cand.empty()) {
        return ref.empty() ? 1.0 : 0.0;
    }
    std::map<DataflowEdge, long> ref_counts;
    for (const DataflowEdge& e : ref) ref_counts[e]++;
    long matched = 0;
    for (const DataflowEdge& e : cand) {
        auto it = ref_counts.find(e);
        if (it != ref_counts.end() && it->second > 0) {
            ++matched;
            --it->second;
        }
    }
    return static_cast<double>(matched) / static_cast<double>(cand.size());
}

struct CodeBleuBreakdown {
    double bleu_score = 0.0;       // [0,100]
    double weighted_ngram = 0.0;   // [0,1]
    double ast = 0.0;              // [0,1]
    double dataflow = 0.0;         // [0,1]
    double score = 0.0;            // [0,100]
};

inline double codebleu_combine(double bleu100, double weighted, double ast_component,
                               double dataflow_component, const CodeBleuConfig& cfg = {}) {
    return 100.0 * (cfg.alpha * bleu100 / 100.0 + cfg.beta * weighted + cfg.gamma * ast_component +
                    cfg.delta * dataflow_component);
}

inline CodeBleuBreakdown codebleu(std::string_view candidate_text, std::string_view reference_text,
                                  const CodeBleuConfig& cfg = {}) {
    CodeBleuBreakdown out;
    TokenSeq cand = tokenize_code(candidate_text);
    TokenSeq ref = tokenize_code(reference_text);
    out.bleu_score = bleu(cand, ref, cfg.bleu);
    out.weighted_ngram = weighted_ngram_match(cand, ref, cfg);
    out.ast = ast_match(candidate_text, reference_text);
    out.dataflow = dataflow_match(candidate_text, reference_text);
    out.score = codebleu_combine(out.bleu_score, out.weighted_ngram, out.ast, out.dataflow, cfg);
    return out;
}

// Corpus-level BLEU: n-gram counts pooled across all pairs, brevity penalty
// from the summed lengths. The alternative to averaging sentence scores.
inline double corpus_bleu(const std::vector<std::pair<TokenSeq, TokenSeq>>& pairs,
                          const BleuConfig& cfg = {}) {
    if (pairs.empty()) return 0.0;
    size_t cand_len = 0, ref_len = 0;
    double log_sum = 0.0;
    for (int n = 1; n <= cfg.max_n; ++n) {
        long matched = 0, total = 0;
        for (const auto& [cand, ref] : pairs) {
            auto cand_counts = detail::ngram_counts(cand, n);
            auto ref_counts = detail::ngram_counts(ref, n);
            for (const auto& [gram, count] : cand_counts) {
                total += count;
                auto it = ref_counts.find(gram);
                if (it != ref_counts.end()) {
                    matched += std::min(count, it->second);
                }
            }
        }
        double p;
        if (n == 1) {
            p = total > 0 ? static_cast<double>(matched) / static_cast<double>(total) : 0.0;
        } else if (cfg.smooth_add_one && matched == 0) {
            p = static_cast<double>(matched + 1) / static_cast<double>(total + 1);
        } else {
            p = total > 0 ? static_cast<double>(matched) / static_cast<double>(total) : 0.0;
        }
        if (p <= 0.0) return 0.0;
        log_sum += std::log(p);
    }
    for (const auto& [cand, ref] : pairs) {
        cand_len += cand.size();
        ref_len += ref.size();
    }
    if (cand_len == 0) return 0.0;
    return 100.0 * brevity_penalty(cand_len, ref_len) *
           std::exp(log_sum / static_cast<double>(cfg.max_n));
}

enum class CorpusAggregation { SentenceMean, CorpusPooled };

struct PairedScore {
    size_t index = 0;
    CodeBleuBreakdown breakdown;
};

struct PairedScoreBatch {
    std::vector<PairedScore> pairs;
    double bleu_aggregate = 0.0;
    double codebleu_mean = 0.0;
    size_t pair_count = 0;
};

struct PairedInputError : std::runtime_error {
    explicit PairedInputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Metric batch interface: candidate and reference files aligned line by line,
// each line [EOL]-flattened. The BLEU aggregate follows the chosen mode;
// CodeBLEU is always the arithmetic mean of sentence scores.
inline PairedScoreBatch score_paired_lines(
    std::string_view candidates_text, std::string_view references_text,
    const CodeBleuConfig& cfg = {}, CorpusAggregation mode = CorpusAggregation::SentenceMean) {
    std::vector<std::string> cand_lines, ref_lines;
    for (const std::string& l : split_lines(candidates_text)) {
        if (!l.empty()) cand_lines.push_back(l);
    }
    for (const std::string& l : split_lines(references_text)) {
        if (!l.empty()) ref_lines.push_back(l);
    }
    if (cand_lines.size() != ref_lines.size()) {
        throw PairedInputError("candidate and reference files differ in length: " +
                               std::to_string(cand_lines.size()) + " vs " +
                               std::to_string(ref_lines.size()));
    }
    PairedScoreBatch batch;
    batch.pair_count = cand_lines.size();
    std::vector<std::pair<TokenSeq, TokenSeq>> token_pairs;
    double bleu_sum = 0.0, codebleu_sum = 0.0;
    for (size_t i = 0; i < cand_lines.size(); ++i) {
        std::string cand = decode_flat(cand_lines[i]);
        std::string ref = decode_flat(ref_lines[i]);
        PairedScore score;
        score.index = i;
        score.breakdown = codebleu(cand, ref, cfg);
        bleu_sum += score.breakdown.bleu_score;
        codebleu_sum += score.breakdown.score;
        token_pairs.emplace_back(tokenize_code(cand), tokenize_code(ref));
        batch.pairs.push_back(std::move(score));
    }
    if (batch.pair_count > 0) {
        batch.codebleu_mean = codebleu_sum / static_cast<double>(batch.pair_count);
        batch.bleu_aggregate = mode == CorpusAggregation::SentenceMean
                                   ? bleu_sum / static_cast<double>(batch.pair_count)
                                   : corpus_bleu(token_pairs, cfg.bleu);
    }
    return batch;
}

}  // namespace testgen
