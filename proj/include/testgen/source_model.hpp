#pragma once

// Class model extraction and the focal-context encoding. Produces the three
// project-skeleton outputs (method names per file, method bodies with line
// spans, per-class context) and the single-line LINE+FM+FC+C+M+F encoding
// consumed by the dataset builder.

#include <future>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "testgen/flatten.hpp"
#include "testgen/java_parser.hpp"
#include "testgen/record.hpp"
#include "testgen/util.hpp"

namespace testgen {

struct SourceFile {
    std::string path;  // project-relative
    std::string text;
    int line_count = 0;

    static SourceFile from_text(std::string path, std::string text) {
        SourceFile f;
        f.path = std::move(path);
        f.line_count = count_lines(text);
        f.text = std::move(text);
        return f;
    }
};

struct MethodInfo {
    std::string name;
    std::string signature;  // normalized: modifiers, return type, name, parameters
    std::string body;       // exact source lines [start_line, end_line]
    int start_line = 0;     // 1-based, inclusive
    int end_line = 0;
    std::string owner_class;  // qualified: package.Outer.Inner
    bool is_constructor = false;
};

struct ClassContext {
    std::string class_name;  // qualified; doubles as the FC field
    std::vector<std::string> constructor_signatures;
    std::vector<std::string> public_method_signatures;
    std::vector<std::string> public_fields;
};

struct ClassModel {
    ClassContext context;
    std::vector<MethodInfo> methods;
};

struct SyntaxError : std::runtime_error {
    std::string path;
    int line;
    SyntaxError(std::string p, int l, const std::string& msg)
        : std::runtime_error(p + ":" + std::to_string(l) + ": " + msg),
          path(std::move(p)),
          line(l) {}
};

struct UnsupportedFile : std::runtime_error {
    std::string path;
    explicit UnsupportedFile(std::string p)
        : std::runtime_error("not a Java source file: " + p), path(std::move(p)) {}
};

struct MismatchedOwner : std::runtime_error {
    MismatchedOwner(const std::string& method_owner, const std::string& ctx_class)
        : std::runtime_error("method owner '" + method_owner + "' does not match context class '" +
                             ctx_class + "'") {}
};

namespace detail {

// Exact text of lines [l1, l2] (1-based, inclusive), without the trailing newline.
inline std::string line_span_text(std::string_view text, int l1, int l2) {
    size_t begin = 0;
    int line = 1;
    while (line < l1 && begin < text.size()) {
        size_t nl = text.find('\n', begin);
        if (nl == std::string_view::npos) break;
        begin = nl + 1;
        ++line;
    }
    size_t end = begin;
    while (line <= l2) {
        size_t nl = text.find('\n', end);
        if (nl == std::string_view::npos) {
            end = text.size();
            break;
        }
        if (line == l2) {
            end = nl;
            break;
        }
        end = nl + 1;
        ++line;
    }
    return std::string(text.substr(begin, end - begin));
}

inline bool has_modifier(const AstNode& member, std::string_view mod) {
    for (const AstNode& child : member.children) {
        if (child.kind != NodeKind::Leaf) break;  // modifiers precede structure
        if (child.leaf_kind == Tok::Keyword && child.text == mod) return true;
    }
    return false;
}

inline const AstNode* find_child(const AstNode& node, NodeKind kind) {
    for (const AstNode& child : node.children) {
        if (child.kind == kind) return &child;
    }
    return nullptr;
}

inline std::string normalize_slice(std::string_view file_text, size_t begin, size_t end) {
    if (end <= begin || end > file_text.size()) return {};
    return collapse_whitespace(strip_comments(file_text.substr(begin, end - begin)));
}

inline std::string member_signature(const AstNode& member, std::string_view file_text) {
    const AstNode* params = find_child(member, NodeKind::Params);
    size_t end = params ? params->end_offset : member.end_offset;
    return normalize_slice(file_text, member.start_offset, end);
}

struct ClassCollector {
    const SourceFile& file;
    std::vector<ClassModel> out;

    void collect(const AstNode& type_decl, const std::string& outer_qualified) {
        std::string qualified =
            outer_qualified.empty() ? type_decl.name : outer_qualified + "." + type_decl.name;
        bool implicit_public = type_decl.kind == NodeKind::InterfaceDecl ||
                               type_decl.kind == NodeKind::AnnotationDecl;
        ClassModel model;
        model.context.class_name = qualified;

        const AstNode* body = find_child(type_decl, NodeKind::ClassBody);
        if (body != nullptr) {
            for (const AstNode& member : body->children) {
                switch (member.kind) {
                    case NodeKind::MethodDecl:
                    case NodeKind::CtorDecl: {
                        MethodInfo info;
                        info.name = member.name;
                        info.signature = member_signature(member, file.text);
                        info.start_line = member.start_line;
                        info.end_line = member.end_line;
                        info.body = line_span_text(file.text, info.start_line, info.end_line);
                        info.owner_class = qualified;
                        info.is_constructor = member.kind == NodeKind::CtorDecl;
                        if (info.is_constructor) {
                            model.context.constructor_signatures.push_back(info.signature);
                        } else if (has_modifier(member, "public") ||
                                   (implicit_public && !has_modifier(member, "private"))) {
                            model.context.public_method_signatures.push_back(info.signature);
                        }
                        model.methods.push_back(std::move(info));
                        break;
                    }
                    case NodeKind::FieldDecl: {
                        if (has_modifier(member, "public") ||
                            (implicit_public && !has_modifier(member, "private"))) {
                            std::string prefix = normalize_slice(file.text, member.start_offset,
                                                                 member.aux_offset);
                            for (const std::string& name : member.decl_names) {
                                model.context.public_fields.push_back(
                                    prefix.empty() ? name : prefix + " " + name);
                            }
                        }
                        break;
                    }
                    case NodeKind::ClassDecl:
                    case NodeKind::InterfaceDecl:
                    case NodeKind::EnumDecl:
                    case NodeKind::AnnotationDecl:
                        collect(member, qualified);
                        break;
                    default:
                        break;
                }
            }
        }
        out.push_back(std::move(model));
    }
};

inline std::string package_of(const AstNode& unit) {
    for (const AstNode& child : unit.children) {
        if (child.kind != NodeKind::PackageDecl) continue;
        std::string name;
        for (const AstNode& leaf : child.children) {
            if (leaf.kind == NodeKind::Leaf &&
                (leaf.leaf_kind == Tok::Identifier || leaf.text == ".")) {
                name += leaf.text;
            }
        }
        return name;
    }
    return {};
}

}  // namespace detail

// One entry per parsed class (top-level and nested). Files that do not parse
// raise SyntaxError; non-Java paths raise UnsupportedFile.
inline std::vector<ClassModel> parse_class_model(const SourceFile& file) {
    if (!file.path.ends_with(".java")) {
        throw UnsupportedFile(file.path);
    }
    ParseResult parsed = parse_compilation_unit(file.text);
    if (!parsed.ok) {
        throw SyntaxError(file.path, parsed.error.line, parsed.error.message);
    }
    std::string pkg = detail::package_of(parsed.root);
    detail::ClassCollector collector{file, {}};
    for (const AstNode& child : parsed.root.children) {
        if (child.kind == NodeKind::ClassDecl || child.kind == NodeKind::InterfaceDecl ||
            child.kind == NodeKind::EnumDecl || child.kind == NodeKind::AnnotationDecl) {
            collector.collect(child, pkg);
        }
    }
    return std::move(collector.out);
}

struct SkeletonDiagnostic {
    std::string path;
    int line = 0;
    std::string message;
};

struct ProjectSkeleton {
    std::map<std::string, std::vector<std::string>> names_only;
    std::map<std::string, std::vector<MethodInfo>> bodies;
    std::map<std::string, ClassContext> class_contexts;
    std::vector<SkeletonDiagnostic> diagnostics;
};

struct SkeletonOptions {
    bool include_private_methods = true;
    unsigned max_parallel_files = 8;
};

// Per-file parsing runs concurrently; the merge below is ordered by path, so
// the result is independent of completion order. Unparsable files become
// diagnostics, never failures.
inline ProjectSkeleton build_project_skeletons(const std::vector<SourceFile>& files,
                                               const SkeletonOptions& options = {}) {
    ProjectSkeleton skeleton;

    struct FileResult {
        std::vector<ClassModel> models;
        std::optional<SkeletonDiagnostic> diagnostic;
    };
    std::vector<FileResult> results(files.size());

    unsigned lanes = options.max_parallel_files ? options.max_parallel_files : 1;
    for (size_t base = 0; base < files.size(); base += lanes) {
        size_t batch = std::min<size_t>(lanes, files.size() - base);
        std::vector<std::future<FileResult>> futures;
        futures.reserve(batch);
        for (size_t k = 0; k < batch; ++k) {
            const SourceFile& file = files[base + k];
            futures.push_back(std::async(std::launch::async, [&file]() -> FileResult {
                FileResult r;
                try {
                    r.models = parse_class_model(file);
                } catch (const SyntaxError& e) {
                    r.diagnostic = SkeletonDiagnostic{e.path, e.line, e.what()};
                } catch (const UnsupportedFile& e) {
                    r.diagnostic = SkeletonDiagnostic{e.path, 0, e.what()};
                }
                return r;
            }));
        }
        for (size_t k = 0; k < batch; ++k) {
            results[base + k] = futures[k].get();
        }
    }

    for (size_t i = 0; i < files.size(); ++i) {
        const SourceFile& file = files[i];
        FileResult& r = results[i];
        if (r.diagnostic) {
            skeleton.diagnostics.push_back(std::move(*r.diagnostic));
            continue;
        }
        std::vector<MethodInfo> methods;
        for (ClassModel& model : r.models) {
            for (MethodInfo& m : model.methods) {
                if (!options.include_private_methods) {
                    // Private methods are filtered from outputs 1 and 2 together
                    // so the name/body lists stay aligned.
                    bool is_private = m.signature.starts_with("private ") ||
                                      m.signature.find(" private ") != std::string::npos;
                    if (is_private) continue;
                }
                methods.push_back(std::move(m));
            }
            skeleton.class_contexts[model.context.class_name] = std::move(model.context);
        }
        std::sort(methods.begin(), methods.end(),
                  [](const MethodInfo& a, const MethodInfo& b) { return a.start_line < b.start_line; });
        std::vector<std::string> names;
        names.reserve(methods.size());
        for (const MethodInfo& m : methods) {
            names.push_back(m.name);
        }
        skeleton.names_only[file.path] = std::move(names);
        skeleton.bodies[file.path] = std::move(methods);
    }
    return skeleton;
}

struct FocalUnit {
    MethodInfo method;
    ClassContext context;
    std::string encoded_input;
};

namespace detail {

inline std::string encode_focal_field(std::string_view content) { return encode_flat(content); }

inline std::string join_focal_list(const std::vector<std::string>& items) {
    std::string out;
    for (size_t i = 0; i < items.size(); ++i) {
        if (i) {
            out += " ";
            out += kMarkItem;
            out += " ";
        }
        out += encode_focal_field(items[i]);
    }
    return out;
}

}  // namespace detail

// Single-line focal encoding, field order LINE? FM FC C M F. The M field
// lists the signatures of the *other* public methods of the class; the focal
// method's own signature is dropped from it.
inline FocalUnit build_focal_input(const MethodInfo& method, const ClassContext& ctx,
                                   const std::optional<std::string>& target_line = std::nullopt) {
    if (method.owner_class != ctx.class_name) {
        throw MismatchedOwner(method.owner_class, ctx.class_name);
    }
    FocalUnit unit;
    unit.method = method;
    unit.context = ctx;

    std::vector<std::string> other_methods;
    bool dropped_self = false;
    for (const std::string& sig : ctx.public_method_signatures) {
        if (!dropped_self && sig == method.signature) {
            dropped_self = true;
            continue;
        }
        other_methods.push_back(sig);
    }

    std::string& enc = unit.encoded_input;
    if (target_line.has_value()) {
        enc += kMarkLine;
        enc += " ";
        enc += detail::encode_focal_field(trim(*target_line));
        enc += " ";
    }
    enc += kMarkFm;
    enc += " ";
    enc += detail::encode_focal_field(collapse_whitespace(strip_comments(method.body)));
    enc += " ";
    enc += kMarkFc;
    enc += " ";
    enc += detail::encode_focal_field(ctx.class_name);
    enc += " ";
    enc += kMarkCtor;
    enc += " ";
    enc += detail::join_focal_list(ctx.constructor_signatures);
    enc += " ";
    enc += kMarkMethods;
    enc += " ";
    enc += detail::join_focal_list(other_methods);
    enc += " ";
    enc += kMarkFields;
    enc += " ";
    enc += detail::join_focal_list(ctx.public_fields);
    return unit;
}

struct DecodedFocal {
    std::optional<std::string> target_line;
    std::string fm;
    std::string fc;
    std::vector<std::string> constructors;
    std::vector<std::string> methods;
    std::vector<std::string> fields;
};

struct FocalDecodeError : std::runtime_error {
    explicit FocalDecodeError(const std::string& msg) : std::runtime_error(msg) {}
};

// --- skeleton files ------------------------------------------------------------

// Output 1: one record per file listing its method names.
inline std::string serialize_names_only(const ProjectSkeleton& skeleton) {
    std::vector<Record> records;
    for (const auto& [path, names] : skeleton.names_only) {
        records.push_back(Record{{"path", path}, {"names", join(names, ",")}});
    }
    return serialize_records(records);
}

// Output 2: one record per method with body and line span.
inline std::string serialize_method_bodies(const ProjectSkeleton& skeleton) {
    std::vector<Record> records;
    for (const auto& [path, methods] : skeleton.bodies) {
        for (const MethodInfo& m : methods) {
            records.push_back(Record{{"path", path},
                                     {"name", m.name},
                                     {"signature", m.signature},
                                     {"start_line", std::to_string(m.start_line)},
                                     {"end_line", std::to_string(m.end_line)},
                                     {"owner_class", m.owner_class},
                                     {"constructor", m.is_constructor ? "1" : "0"},
                                     {"body", m.body}});
        }
    }
    return serialize_records(records);
}

// Output 3: one record per class context.
inline std::string serialize_class_contexts(const ProjectSkeleton& skeleton) {
    std::vector<Record> records;
    auto join_list = [](const std::vector<std::string>& items) {
        std::string out;
        for (size_t i = 0; i < items.size(); ++i) {
            if (i) out += kMarkItem;
            out += items[i];
        }
        return out;
    };
    for (const auto& [name, ctx] : skeleton.class_contexts) {
        records.push_back(Record{{"class", ctx.class_name},
                                 {"constructors", join_list(ctx.constructor_signatures)},
                                 {"methods", join_list(ctx.public_method_signatures)},
                                 {"fields", join_list(ctx.public_fields)}});
    }
    return serialize_records(records);
}

inline ProjectSkeleton parse_skeleton(std::string_view names_text, std::string_view bodies_text,
                                      std::string_view contexts_text) {
    ProjectSkeleton skeleton;
    auto split_list = [](const std::string& joined) {
        std::vector<std::string> items;
        if (joined.empty()) return items;
        size_t start = 0;
        while (true) {
            size_t hit = joined.find(kMarkItem, start);
            if (hit == std::string::npos) {
                items.push_back(joined.substr(start));
                return items;
            }
            items.push_back(joined.substr(start, hit - start));
            start = hit + kMarkItem.size();
        }
    };
    for (const Record& rec : parse_records(names_text)) {
        std::string path = record_require(rec, "path");
        std::string names = record_get(rec, "names").value_or("");
        std::vector<std::string> list;
        if (!names.empty()) {
            size_t start = 0;
            while (start <= names.size()) {
                size_t comma = names.find(',', start);
                if (comma == std::string::npos) {
                    list.push_back(names.substr(start));
                    break;
                }
                list.push_back(names.substr(start, comma - start));
                start = comma + 1;
            }
        }
        skeleton.names_only[path] = std::move(list);
    }
    for (const Record& rec : parse_records(bodies_text)) {
        MethodInfo m;
        std::string path = record_require(rec, "path");
        m.name = record_require(rec, "name");
        m.signature = record_get(rec, "signature").value_or("");
        m.start_line = std::stoi(record_require(rec, "start_line"));
        m.end_line = std::stoi(record_require(rec, "end_line"));
        m.owner_class = record_get(rec, "owner_class").value_or("");
        m.is_constructor = record_get(rec, "constructor").value_or("0") == "1";
        m.body = record_get(rec, "body").value_or("");
        skeleton.bodies[path].push_back(std::move(m));
        if (!skeleton.names_only.count(path)) {
            skeleton.names_only[path] = {};
        }
    }
    for (const Record& rec : parse_records(contexts_text)) {
        ClassContext ctx;
        ctx.class_name = record_require(rec, "class");
        ctx.constructor_signatures = split_list(record_get(rec, "constructors").value_or(""));
        ctx.public_method_signatures = split_list(record_get(rec, "methods").value_or(""));
        ctx.public_fields = split_list(record_get(rec, "fields").value_or(""));
        skeleton.class_contexts[ctx.class_name] = std::move(ctx);
    }
    return skeleton;
}

inline DecodedFocal decode_focal_input(std::string_view encoded) {
    auto locate = [&](std::string_view marker, size_t from, bool required) -> size_t {
        size_t pos = find_unescaped(encoded, marker, from);
        if (pos == std::string_view::npos && required) {
            throw FocalDecodeError("missing focal marker " + std::string(marker));
        }
        return pos;
    };
    size_t p_line = locate(kMarkLine, 0, false);
    size_t p_fm = locate(kMarkFm, 0, true);
    size_t p_fc = locate(kMarkFc, p_fm, true);
    size_t p_c = locate(kMarkCtor, p_fc, true);
    size_t p_m = locate(kMarkMethods, p_c, true);
    size_t p_f = locate(kMarkFields, p_m, true);

    auto slice = [&](size_t marker_pos, size_t marker_len, size_t next_pos) -> std::string_view {
        size_t begin = marker_pos + marker_len;
        if (begin < encoded.size() && encoded[begin] == ' ') ++begin;
        size_t end = next_pos == std::string_view::npos ? encoded.size() : next_pos;
        if (end > begin && encoded[end - 1] == ' ') --end;
        if (end < begin) end = begin;
        return encoded.substr(begin, end - begin);
    };
    auto split_list = [&](std::string_view field) {
        std::vector<std::string> items;
        if (trim(field).empty()) return items;
        size_t start = 0;
        while (true) {
            size_t hit = find_unescaped(field, kMarkItem, start);
            if (hit == std::string_view::npos) {
                items.push_back(decode_flat(trim(field.substr(start))));
                return items;
            }
            items.push_back(decode_flat(trim(field.substr(start, hit - start))));
            start = hit + kMarkItem.size();
        }
    };

    DecodedFocal out;
    if (p_line != std::string_view::npos && p_line < p_fm) {
        out.target_line = decode_flat(slice(p_line, kMarkLine.size(), p_fm));
    }
    out.fm = decode_flat(slice(p_fm, kMarkFm.size(), p_fc));
    out.fc = decode_flat(slice(p_fc, kMarkFc.size(), p_c));
    out.constructors = split_list(slice(p_c, kMarkCtor.size(), p_m));
    out.methods = split_list(slice(p_m, kMarkMethods.size(), p_f));
    out.fields = split_list(slice(p_f, kMarkFields.size(), std::string_view::npos));
    return out;
}

}  // namespace testgen
