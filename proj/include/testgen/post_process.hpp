#pragma once

// Candidate post-processing: EOL restoration, duplicate renaming, truncation
// repair, parse filtering, injection into the covering test class, and
// one-at-a-time compile/run filtering through black-box command adapters.
// Statuses only move forward:
//   Raw -> Restored -> Named -> {Parsable | RepairedParsable | RejectedParse}
//       -> {Compilable | RejectedCompile} -> {Passing | Failing}

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "testgen/flatten.hpp"
#include "testgen/java_parser.hpp"
#include "testgen/process.hpp"
#include "testgen/record.hpp"
#include "testgen/util.hpp"

namespace testgen {

enum class CandidateStatus {
    Raw,
    Restored,
    Named,
    Parsable,
    RepairedParsable,
    RejectedParse,
    Compilable,
    RejectedCompile,
    Passing,
    Failing,
};

inline std::string_view to_string(CandidateStatus s) {
    switch (s) {
        case CandidateStatus::Raw: return "raw";
        case CandidateStatus::Restored: return "restored";
        case CandidateStatus::Named: return "named";
        case CandidateStatus::Parsable: return "parsable";
        case CandidateStatus::RepairedParsable: return "repaired_parsable";
        case CandidateStatus::RejectedParse: return "rejected_parse";
        case CandidateStatus::Compilable: return "compilable";
        case CandidateStatus::RejectedCompile: return "rejected_compile";
        case CandidateStatus::Passing: return "passing";
        case CandidateStatus::Failing: return "failing";
    }
    return "unknown";
}

struct InvalidTransition : std::logic_error {
    InvalidTransition(CandidateStatus from, CandidateStatus to)
        : std::logic_error("invalid candidate transition: " + std::string(to_string(from)) +
                           " -> " + std::string(to_string(to))) {}
};

struct CandidateTest {
    std::string id;
    std::string raw_text;  // verbatim backend output
    std::string text;      // current working text
    CandidateStatus status = CandidateStatus::Raw;
    std::string target_classpath;
    std::string method_name;
    std::vector<std::string> repair_log;

    bool parsable_kept() const {
        return status == CandidateStatus::Parsable || status == CandidateStatus::RepairedParsable ||
               status == CandidateStatus::Compilable || status == CandidateStatus::Passing ||
               status == CandidateStatus::Failing;
    }

    void advance(CandidateStatus next) {
        bool ok = false;
        switch (status) {
            case CandidateStatus::Raw:
                ok = next == CandidateStatus::Restored;
                break;
            case CandidateStatus::Restored:
                ok = next == CandidateStatus::Named;
                break;
            case CandidateStatus::Named:
                ok = next == CandidateStatus::Parsable || next == CandidateStatus::RepairedParsable ||
                     next == CandidateStatus::RejectedParse;
                break;
            case CandidateStatus::Parsable:
            case CandidateStatus::RepairedParsable:
                ok = next == CandidateStatus::Compilable || next == CandidateStatus::RejectedCompile;
                break;
            case CandidateStatus::Compilable:
                ok = next == CandidateStatus::Passing || next == CandidateStatus::Failing;
                break;
            default:
                ok = false;
        }
        if (!ok) {
            throw InvalidTransition(status, next);
        }
        status = next;
    }
};

struct CollisionAfterRename : std::logic_error {
    explicit CollisionAfterRename(const std::string& name)
        : std::logic_error("duplicate method name survived renaming: " + name) {}
};

// Method name of a candidate declaration: first identifier directly followed
// by '(' at bracket depth zero, before the body opens. Tolerates truncated
// input; returns the token offset too so the name can be spliced.
struct MethodNamePos {
    std::string name;
    size_t offset = 0;
};

inline std::optional<MethodNamePos> find_method_name(std::string_view text) {
    LexResult lexed = lex_java(text);
    const std::vector<Token>& toks = lexed.tokens;  // usable even if lexing failed midway
    int depth = 0;
    for (size_t i = 0; i + 1 < toks.size(); ++i) {
        const Token& t = toks[i];
        if (t.kind == Tok::Op && t.text.size() == 1) {
            char c = t.text[0];
            if (c == '(' || c == '[') ++depth;
            if (c == ')' || c == ']') --depth;
            if (c == '{' && depth == 0) return std::nullopt;  // body reached, no name seen
        }
        if (t.is("@") && toks[i + 1].kind == Tok::Identifier) {
            ++i;  // skip annotation name; its argument parens are depth-tracked
            continue;
        }
        if (depth == 0 && t.kind == Tok::Identifier && toks[i + 1].is("(")) {
            return MethodNamePos{t.text, t.offset};
        }
    }
    return std::nullopt;
}

inline std::string rename_method(std::string_view text, const MethodNamePos& pos,
                                 const std::string& new_name) {
    std::string out(text.substr(0, pos.offset));
    out += new_name;
    out += text.substr(pos.offset + pos.name.size());
    return out;
}

// Raw -> Named: decode [EOL] flattening; make duplicate method names unique by
// appending the smallest positive integer not yet in use for that name. The
// first occurrence keeps its name.
inline void restore_and_name(std::vector<CandidateTest>& candidates) {
    std::set<std::string> used;
    for (CandidateTest& c : candidates) {
        c.text = decode_flat(c.raw_text);
        c.advance(CandidateStatus::Restored);

        std::optional<MethodNamePos> name = find_method_name(c.text);
        if (name.has_value()) {
            if (used.count(name->name)) {
                int suffix = 1;
                std::string renamed;
                do {
                    renamed = name->name + std::to_string(suffix++);
                } while (used.count(renamed));
                c.text = rename_method(c.text, *name, renamed);
                c.repair_log.push_back("renamed duplicate " + name->name + " -> " + renamed);
                c.method_name = renamed;
            } else {
                c.method_name = name->name;
            }
            if (!used.insert(c.method_name).second) {
                throw CollisionAfterRename(c.method_name);
            }
        }
        c.advance(CandidateStatus::Named);
    }
}

struct RepairOutcome {
    bool repaired = false;
    std::string text;
    std::vector<std::string> log;
};

struct RepairRefused : std::logic_error {
    RepairRefused() : std::logic_error("repair_truncation called on parsable input") {}
};

// Truncation repair: drop the (usually cut-off) last line, append a closing
// bracket, re-parse; keep appending brackets up to the bound until the text
// parses. Rejected when the bound runs out.
inline RepairOutcome repair_truncation(std::string_view text, int max_extra_brackets = 8) {
    if (is_parsable(text).parsable) {
        throw RepairRefused();
    }
    RepairOutcome outcome;
    size_t last_newline = text.rfind('\n');
    std::string base(last_newline == std::string_view::npos ? std::string_view{}
                                                            : text.substr(0, last_newline));
    outcome.log.push_back("deleted last line");
    for (int brackets = 1; brackets <= max_extra_brackets; ++brackets) {
        std::string attempt = base + std::string(static_cast<size_t>(brackets), '}');
        outcome.log.push_back("appended closing bracket " + std::to_string(brackets));
        if (is_parsable(attempt).parsable) {
            outcome.repaired = true;
            outcome.text = std::move(attempt);
            return outcome;
        }
    }
    outcome.log.push_back("rejected: still unparsable after " +
                          std::to_string(max_extra_brackets) + " brackets");
    return outcome;
}

struct ParseFilterResult {
    int total = 0;
    int parsable_pre_repair = 0;
    int parsable_post_repair = 0;
    // Reported metric, computed before repair; NA when the batch is empty.
    std::optional<double> parse_rate_pre_repair;
    std::optional<double> parse_rate_post_repair;
};

inline ParseFilterResult parse_filter(std::vector<CandidateTest>& candidates) {
    ParseFilterResult result;
    result.total = static_cast<int>(candidates.size());
    for (CandidateTest& c : candidates) {
        if (c.status != CandidateStatus::Named) {
            continue;
        }
        if (is_parsable(c.text).parsable) {
            c.advance(CandidateStatus::Parsable);
            ++result.parsable_pre_repair;
            ++result.parsable_post_repair;
            continue;
        }
        RepairOutcome repair = repair_truncation(c.text);
        for (const std::string& step : repair.log) {
            c.repair_log.push_back(step);
        }
        if (repair.repaired) {
            c.text = repair.text;
            c.advance(CandidateStatus::RepairedParsable);
            ++result.parsable_post_repair;
        } else {
            c.advance(CandidateStatus::RejectedParse);
        }
    }
    if (result.total > 0) {
        result.parse_rate_pre_repair = 100.0 * result.parsable_pre_repair / result.total;
        result.parse_rate_post_repair = 100.0 * result.parsable_post_repair / result.total;
    }
    return result;
}

struct NoClassBody : std::runtime_error {
    explicit NoClassBody(const std::string& msg)
        : std::runtime_error("injection target has no class body: " + msg) {}
};

namespace detail {

inline const AstNode* first_type_decl(const AstNode& unit) {
    for (const AstNode& child : unit.children) {
        if (child.kind == NodeKind::ClassDecl || child.kind == NodeKind::InterfaceDecl ||
            child.kind == NodeKind::EnumDecl || child.kind == NodeKind::AnnotationDecl) {
            return &child;
        }
    }
    return nullptr;
}

inline const AstNode* class_body_of(const AstNode& type_decl) {
    for (const AstNode& child : type_decl.children) {
        if (child.kind == NodeKind::ClassBody) return &child;
    }
    return nullptr;
}

inline std::string indent_subsequent_lines(std::string_view text, std::string_view indent) {
    std::string out;
    for (size_t i = 0; i < text.size(); ++i) {
        out.push_back(text[i]);
        if (text[i] == '\n') out.append(indent);
    }
    return out;
}

// Member removal that also swallows the leading indentation and the trailing
// newline, so the remaining file stays tidy.
inline std::pair<size_t, size_t> widen_member_span(std::string_view source, size_t begin,
                                                   size_t end) {
    while (begin > 0 && (source[begin - 1] == ' ' || source[begin - 1] == '\t')) --begin;
    if (end < source.size() && source[end] == '\n') ++end;
    return {begin, end};
}

}  // namespace detail

// Insert the candidate method before the final closing brace of the target
// class. If the class already contains a method with the same name, its
// declaration is replaced instead, which makes re-injection of the same
// candidate byte-stable.
inline std::string inject_test(const CandidateTest& candidate, std::string_view test_class_source) {
    ParseResult parsed = parse_compilation_unit(test_class_source);
    if (!parsed.ok) {
        throw NoClassBody("target does not parse: " + parsed.error.message);
    }
    const AstNode* type_decl = detail::first_type_decl(parsed.root);
    if (type_decl == nullptr) {
        throw NoClassBody("no type declaration");
    }
    const AstNode* body = detail::class_body_of(*type_decl);
    if (body == nullptr || body->end_offset == 0 ||
        test_class_source[body->end_offset - 1] != '}') {
        throw NoClassBody(type_decl->name);
    }
    std::string indented = detail::indent_subsequent_lines(candidate.text, "    ");
    if (!candidate.method_name.empty()) {
        for (const AstNode& member : body->children) {
            if ((member.kind == NodeKind::MethodDecl || member.kind == NodeKind::CtorDecl) &&
                member.name == candidate.method_name) {
                std::string out(test_class_source.substr(0, member.start_offset));
                out += indented;
                out += test_class_source.substr(member.end_offset);
                return out;
            }
        }
    }
    size_t brace = body->end_offset - 1;
    std::string out(test_class_source.substr(0, brace));
    out += "    ";
    out += indented;
    out += "\n";
    out += test_class_source.substr(brace);
    return out;
}

// Clean shell for compile filtering: developer-written tests removed, helper
// members and dependencies kept.
inline std::string strip_developer_tests(std::string_view test_class_source) {
    ParseResult parsed = parse_compilation_unit(test_class_source);
    if (!parsed.ok) {
        throw NoClassBody("target does not parse: " + parsed.error.message);
    }
    const AstNode* type_decl = detail::first_type_decl(parsed.root);
    const AstNode* body = type_decl ? detail::class_body_of(*type_decl) : nullptr;
    if (body == nullptr) {
        throw NoClassBody("no type declaration");
    }
    std::vector<std::pair<size_t, size_t>> cut_spans;
    for (const AstNode& member : body->children) {
        if (member.kind != NodeKind::MethodDecl) continue;
        bool is_test = member.name.starts_with("test");
        for (size_t i = 0; i + 1 < member.children.size() && !is_test; ++i) {
            const AstNode& leaf = member.children[i];
            const AstNode& next = member.children[i + 1];
            if (leaf.kind == NodeKind::Leaf && leaf.text == "@" && next.kind == NodeKind::Leaf &&
                next.text == "Test") {
                is_test = true;
            }
        }
        if (is_test) {
            cut_spans.push_back(
                detail::widen_member_span(test_class_source, member.start_offset, member.end_offset));
        }
    }
    std::string out;
    size_t pos = 0;
    for (const auto& [begin, end] : cut_spans) {
        if (begin > pos) out += test_class_source.substr(pos, begin - pos);
        pos = end;
    }
    if (pos < test_class_source.size()) out += test_class_source.substr(pos);
    return out;
}

struct CompileAdapter {
    std::string command_template;  // {project_dir} and {test_file} placeholders
    double timeout_sec = 120.0;
};

struct PrecheckFailed : std::runtime_error {
    explicit PrecheckFailed(const std::string& msg)
        : std::runtime_error("clean project failed the adapter precheck: " + msg) {}
};

struct AdapterTimeout : std::runtime_error {
    std::string candidate_id;
    explicit AdapterTimeout(std::string id)
        : std::runtime_error("adapter timed out on candidate " + id), candidate_id(std::move(id)) {}
};

namespace detail {

inline std::string adapter_command(const CompileAdapter& adapter, const std::string& project_dir,
                                   const std::string& test_file) {
    std::string cmd = replace_all(adapter.command_template, "{project_dir}", project_dir);
    return replace_all(cmd, "{test_file}", test_file);
}

// Restores a set of files to their saved contents on destruction.
class FileRestorer {
public:
    void remember(const std::filesystem::path& path, std::string contents) {
        saved_.emplace(path.string(), std::move(contents));
    }
    ~FileRestorer() {
        for (const auto& [path, contents] : saved_) {
            try {
                write_file(path, contents);
            } catch (...) {
                // Destructor must not throw; a failed restore leaves the
                // mismatch visible to the tree-hash check.
            }
        }
    }

private:
    std::map<std::string, std::string> saved_;
};

}  // namespace detail

struct CompileFilterResult {
    int total = 0;       // all generated candidates, rejected-parse included
    int attempted = 0;   // parsable candidates that were injected
    int compilable = 0;
    std::optional<double> compile_rate;
};

// One candidate at a time: replace developer tests with a clean shell, inject
// the candidate alone, run the adapter, restore. Strictly sequential; the
// project tree is byte-identical afterwards. The rate denominator is the full
// candidate batch, so compile_rate <= post-repair parse rate by construction.
inline CompileFilterResult compile_filter(std::vector<CandidateTest>& candidates,
                                          const std::filesystem::path& project_dir,
                                          const CompileAdapter& adapter) {
    namespace fs = std::filesystem;
    CompileFilterResult result;
    result.total = static_cast<int>(candidates.size());

    detail::FileRestorer restorer;
    std::map<std::string, std::string> shells;  // classpath -> stripped source

    for (CandidateTest& c : candidates) {
        if (!(c.status == CandidateStatus::Parsable ||
              c.status == CandidateStatus::RepairedParsable)) {
            continue;
        }
        if (c.target_classpath.empty() || shells.count(c.target_classpath)) {
            continue;
        }
        fs::path target = project_dir / c.target_classpath;
        if (!fs::exists(target)) {
            continue;
        }
        std::string original = read_file(target);
        restorer.remember(target, original);
        shells.emplace(c.target_classpath, strip_developer_tests(original));
    }

    for (const auto& [classpath, shell] : shells) {
        write_file(project_dir / classpath, shell);
    }

    // Sanity precheck: the shelled project must pass the adapter on its own.
    CommandResult pre = run_command(
        detail::adapter_command(adapter, project_dir.string(), "/dev/null"), {},
        adapter.timeout_sec);
    if (pre.timed_out || pre.exit_code != 0) {
        throw PrecheckFailed(pre.timed_out ? "timeout" : "exit " + std::to_string(pre.exit_code));
    }

    for (CandidateTest& c : candidates) {
        if (!(c.status == CandidateStatus::Parsable ||
              c.status == CandidateStatus::RepairedParsable)) {
            continue;
        }
        auto shell_it = shells.find(c.target_classpath);
        if (shell_it == shells.end()) {
            c.advance(CandidateStatus::RejectedCompile);
            c.repair_log.push_back("no injection target: " + c.target_classpath);
            continue;
        }
        ++result.attempted;
        fs::path target = project_dir / c.target_classpath;
        std::string injected = inject_test(c, shell_it->second);
        write_file(target, injected);
        CommandResult run = run_command(
            detail::adapter_command(adapter, project_dir.string(), target.string()), {},
            adapter.timeout_sec);
        write_file(target, shell_it->second);
        if (run.timed_out) {
            throw AdapterTimeout(c.id);
        }
        if (run.exit_code == 0) {
            c.advance(CandidateStatus::Compilable);
            ++result.compilable;
        } else {
            c.advance(CandidateStatus::RejectedCompile);
        }
    }
    if (result.total > 0) {
        result.compile_rate = 100.0 * result.compilable / result.total;
    }
    return result;
}

struct RunFilterResult {
    int total = 0;
    int passing = 0;
    std::optional<double> pass_rate;
};

// Same adapter contract, marking Compilable candidates Passing/Failing. Only
// passing tests feed mutation scoring downstream.
inline RunFilterResult run_filter(std::vector<CandidateTest>& candidates,
                                  const std::filesystem::path& project_dir,
                                  const CompileAdapter& adapter) {
    namespace fs = std::filesystem;
    RunFilterResult result;
    result.total = static_cast<int>(candidates.size());

    detail::FileRestorer restorer;
    std::map<std::string, std::string> shells;
    for (CandidateTest& c : candidates) {
        if (c.status != CandidateStatus::Compilable || c.target_classpath.empty() ||
            shells.count(c.target_classpath)) {
            continue;
        }
        fs::path target = project_dir / c.target_classpath;
        if (!fs::exists(target)) continue;
        std::string original = read_file(target);
        restorer.remember(target, original);
        shells.emplace(c.target_classpath, strip_developer_tests(original));
    }
    for (CandidateTest& c : candidates) {
        if (c.status != CandidateStatus::Compilable) continue;
        auto shell_it = shells.find(c.target_classpath);
        if (shell_it == shells.end()) {
            c.advance(CandidateStatus::Failing);
            continue;
        }
        fs::path target = project_dir / c.target_classpath;
        write_file(target, inject_test(c, shell_it->second));
        CommandResult run = run_command(
            detail::adapter_command(adapter, project_dir.string(), target.string()), {},
            adapter.timeout_sec);
        write_file(target, shell_it->second);
        if (run.timed_out) {
            throw AdapterTimeout(c.id);
        }
        if (run.exit_code == 0) {
            c.advance(CandidateStatus::Passing);
            ++result.passing;
        } else {
            c.advance(CandidateStatus::Failing);
        }
    }
    if (result.total > 0) {
        result.pass_rate = 100.0 * result.passing / result.total;
    }
    return result;
}

inline std::vector<Record> summarize_batch(const std::vector<CandidateTest>& candidates,
                                           const ParseFilterResult& parse,
                                           const CompileFilterResult& compile) {
    std::map<std::string, int> by_status;
    for (const CandidateTest& c : candidates) {
        by_status[std::string(to_string(c.status))]++;
    }
    auto fmt = [](const std::optional<double>& v) {
        if (!v) return std::string("NA");
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f", *v);
        return std::string(buf);
    };
    std::vector<Record> records;
    records.push_back(Record{{"kind", "rates"},
                             {"total", std::to_string(parse.total)},
                             {"parse_rate", fmt(parse.parse_rate_pre_repair)},
                             {"parse_rate_post_repair", fmt(parse.parse_rate_post_repair)},
                             {"compile_rate", fmt(compile.compile_rate)}});
    for (const auto& [status, count] : by_status) {
        records.push_back(
            Record{{"kind", "status"}, {"status", status}, {"count", std::to_string(count)}});
    }
    return records;
}

}  // namespace testgen
