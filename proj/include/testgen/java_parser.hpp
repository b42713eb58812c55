#pragma once

// Recursive-descent parser for the Java subset the toolchain needs: classes,
// interfaces, enums, annotation types, nested types, constructors, methods,
// fields and the full statement grammar. Expressions are consumed as flat,
// bracket-balanced token runs rather than precedence trees; that keeps the
// parser robust against generics ambiguity while still rejecting the failure
// modes that matter here (unbalanced brackets, statements missing ';',
// truncated input).

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "testgen/java_lexer.hpp"

namespace testgen {

enum class NodeKind {
    CompilationUnit,
    PackageDecl,
    ImportDecl,
    ClassDecl,
    InterfaceDecl,
    EnumDecl,
    AnnotationDecl,
    ClassBody,
    EnumConstants,
    FieldDecl,
    MethodDecl,
    CtorDecl,
    InitBlock,
    EmptyMember,
    Params,
    Block,
    If,
    Cond,
    While,
    DoWhile,
    For,
    ForControl,
    Switch,
    SwitchBlock,
    SwitchLabel,
    Try,
    Resources,
    Catch,
    Finally,
    Return,
    Throw,
    Break,
    Continue,
    Assert,
    Sync,
    Labeled,
    ExprStmt,
    EmptyStmt,
    LocalType,
    Leaf,
};

struct AstNode {
    NodeKind kind = NodeKind::Leaf;
    std::string name;                 // declarations
    std::vector<std::string> decl_names;  // FieldDecl: all declarator names
    Tok leaf_kind = Tok::End;         // Leaf nodes
    std::string text;                 // Leaf nodes: exact source slice
    std::vector<AstNode> children;
    size_t start_offset = 0;
    size_t end_offset = 0;
    size_t aux_offset = 0;  // FieldDecl: offset of the first declarator name
    int start_line = 0;
    int end_line = 0;
};

struct ParseError {
    size_t offset = 0;
    int line = 0;
    int col = 0;
    std::string message;
};

struct ParseResult {
    bool ok = false;
    AstNode root;
    ParseError error;
};

namespace detail {

struct ParseFail {};

class JavaParser {
public:
    explicit JavaParser(std::string_view text) : lexed_(lex_java(text)) {}

    ParseResult run_unit() { return run([this] { return parse_unit(); }); }
    ParseResult run_members() { return run([this] { return parse_members_root(); }); }
    ParseResult run_statements() { return run([this] { return parse_statements_root(); }); }

private:
    LexResult lexed_;
    size_t pos_ = 0;
    ParseError err_;

    template <typename F>
    ParseResult run(F&& f) {
        ParseResult res;
        if (!lexed_.ok) {
            res.error = ParseError{lexed_.error.offset, lexed_.error.line, lexed_.error.col,
                                   lexed_.error.message};
            return res;
        }
        try {
            res.root = f();
            res.ok = true;
        } catch (const ParseFail&) {
            res.error = err_;
        }
        return res;
    }

    const Token& peek(size_t ahead = 0) const {
        size_t i = pos_ + ahead;
        if (i >= lexed_.tokens.size()) {
            return lexed_.tokens.back();
        }
        return lexed_.tokens[i];
    }
    bool at_end() const { return peek().kind == Tok::End; }
    bool at(std::string_view t) const { return peek().text == t; }
    bool at_kind(Tok k) const { return peek().kind == k; }

    [[noreturn]] void fail(std::string msg) {
        const Token& t = peek();
        err_ = ParseError{t.offset, t.line, t.col, std::move(msg)};
        throw ParseFail{};
    }

    Token eat() {
        if (at_end()) {
            fail("unexpected end of input");
        }
        return lexed_.tokens[pos_++];
    }

    void expect(std::string_view t) {
        if (!at(t)) {
            fail("expected '" + std::string(t) + "'");
        }
        eat();
    }

    static void add_leaf(AstNode& parent, const Token& t) {
        AstNode leaf;
        leaf.kind = NodeKind::Leaf;
        leaf.leaf_kind = t.kind;
        leaf.text = t.text;
        leaf.start_offset = t.offset;
        leaf.end_offset = t.offset + t.text.size();
        leaf.start_line = leaf.end_line = t.line;
        parent.children.push_back(std::move(leaf));
    }

    void eat_leaf(AstNode& parent) { add_leaf(parent, eat()); }

    size_t mark() const { return pos_; }

    void finish(AstNode& node, size_t from) {
        if (from >= lexed_.tokens.size() || from == pos_) {
            const Token& t = peek();
            node.start_offset = node.end_offset = t.offset;
            node.start_line = node.end_line = t.line;
            return;
        }
        const Token& first = lexed_.tokens[from];
        const Token& last = lexed_.tokens[pos_ - 1];
        node.start_offset = first.offset;
        node.end_offset = last.offset + last.text.size();
        node.start_line = first.line;
        node.end_line = last.line;
    }

    static bool is_modifier(const Token& t) {
        static const std::unordered_set<std::string_view> mods = {
            "public", "protected", "private", "static", "final",  "abstract",
            "native", "synchronized", "transient", "volatile", "strictfp", "default",
        };
        return t.kind == Tok::Keyword && mods.count(t.text) > 0;
    }

    static bool is_primitive(const Token& t) {
        static const std::unordered_set<std::string_view> prim = {
            "boolean", "byte", "short", "int", "long", "char", "float", "double", "void",
        };
        return t.kind == Tok::Keyword && prim.count(t.text) > 0;
    }

    static int closer_count(const Token& t) {
        if (t.kind != Tok::Op) return 0;
        for (char c : t.text) {
            if (c != '>') return 0;
        }
        return static_cast<int>(t.text.size());
    }

    // ---- shared scans ------------------------------------------------------

    void eat_annotation(AstNode& parent) {
        eat_leaf(parent);  // '@'
        if (at("interface")) {
            fail("annotation declaration in unexpected position");
        }
        if (!at_kind(Tok::Identifier)) {
            fail("expected annotation name");
        }
        eat_leaf(parent);
        while (at(".")) {
            eat_leaf(parent);
            if (!at_kind(Tok::Identifier)) {
                fail("expected identifier after '.'");
            }
            eat_leaf(parent);
        }
        if (at("(")) {
            scan_group(parent);
        }
    }

    // Balanced (...) / [...] / {...} group starting at the current opener.
    void scan_group(AstNode& parent) {
        std::vector<char> stack;
        while (true) {
            if (at_end()) {
                fail("unexpected end of input");
            }
            const Token& t = peek();
            if (t.kind == Tok::Op && t.text.size() == 1) {
                char c = t.text[0];
                if (c == '(' || c == '[' || c == '{') {
                    stack.push_back(c);
                } else if (c == ')' || c == ']' || c == '}') {
                    char open = c == ')' ? '(' : c == ']' ? '[' : '{';
                    if (stack.empty() || stack.back() != open) {
                        fail("mismatched bracket");
                    }
                    stack.pop_back();
                }
            }
            eat_leaf(parent);
            if (stack.empty()) {
                return;
            }
        }
    }

    void scan_paren_group(AstNode& parent) {
        if (!at("(")) {
            fail("expected '('");
        }
        scan_group(parent);
    }

    // Flat expression scan ending at an unnested ';' (consumed). `extra_stop`
    // optionally ends the scan at an unnested ',' (field declarators) without
    // consuming it.
    void scan_expr_until_semi(AstNode& parent, bool stop_at_comma = false) {
        std::vector<char> stack;
        while (true) {
            if (at_end()) {
                fail("unexpected end of input");
            }
            const Token& t = peek();
            if (t.kind == Tok::Op && t.text.size() == 1) {
                char c = t.text[0];
                if (c == ';' && stack.empty()) {
                    eat_leaf(parent);
                    return;
                }
                if (c == ',' && stack.empty() && stop_at_comma) {
                    return;
                }
                if (c == '(' || c == '[' || c == '{') {
                    stack.push_back(c);
                } else if (c == ')' || c == ']' || c == '}') {
                    char open = c == ')' ? '(' : c == ']' ? '[' : '{';
                    if (stack.empty()) {
                        fail("expected ';'");
                    }
                    if (stack.back() != open) {
                        fail("mismatched bracket");
                    }
                    stack.pop_back();
                }
            }
            eat_leaf(parent);
        }
    }

    void scan_type_arguments(AstNode& parent) {
        expect_angle_open(parent);
        int depth = 1;
        while (depth > 0) {
            if (at_end()) {
                fail("unterminated type arguments");
            }
            const Token& t = peek();
            int closers = closer_count(t);
            if (closers > 0) {
                if (closers > depth) {
                    fail("mismatched '>'");
                }
                depth -= closers;
                eat_leaf(parent);
                continue;
            }
            if (t.is("<")) {
                ++depth;
                eat_leaf(parent);
                continue;
            }
            if (t.kind == Tok::Identifier || is_primitive(t) || t.is("?") || t.is(",") ||
                t.is(".") || t.is("[") || t.is("]") || t.is("&") || t.is("@") ||
                t.is("extends") || t.is("super")) {
                eat_leaf(parent);
                continue;
            }
            fail("unexpected token in type arguments");
        }
    }

    void expect_angle_open(AstNode& parent) {
        if (!at("<")) {
            fail("expected '<'");
        }
        eat_leaf(parent);
    }

    void parse_type(AstNode& parent) {
        if (is_primitive(peek())) {
            eat_leaf(parent);
        } else if (at_kind(Tok::Identifier)) {
            eat_leaf(parent);
            if (at("<")) {
                scan_type_arguments(parent);
            }
            while (at(".") && peek(1).kind == Tok::Identifier) {
                eat_leaf(parent);
                eat_leaf(parent);
                if (at("<")) {
                    scan_type_arguments(parent);
                }
            }
        } else {
            fail("expected type");
        }
        while (at("[")) {
            eat_leaf(parent);
            expect_or_leaf(parent, "]");
        }
    }

    void expect_or_leaf(AstNode& parent, std::string_view t) {
        if (!at(t)) {
            fail("expected '" + std::string(t) + "'");
        }
        eat_leaf(parent);
    }

    void parse_qualified_name(AstNode& parent) {
        if (!at_kind(Tok::Identifier)) {
            fail("expected identifier");
        }
        eat_leaf(parent);
        while (at(".") && (peek(1).kind == Tok::Identifier || peek(1).is("*"))) {
            eat_leaf(parent);
            eat_leaf(parent);
        }
    }

    // ---- compilation unit --------------------------------------------------

    AstNode parse_unit() {
        AstNode unit;
        unit.kind = NodeKind::CompilationUnit;
        size_t from = mark();

        // Leading annotations may belong to the package declaration.
        size_t probe = pos_;
        while (peek().is("@") && peek(1).kind == Tok::Identifier) {
            AstNode scratch;
            eat_annotation(scratch);
        }
        bool package_next = at("package");
        pos_ = probe;

        if (package_next) {
            AstNode pkg;
            pkg.kind = NodeKind::PackageDecl;
            size_t pfrom = mark();
            while (peek().is("@")) {
                eat_annotation(pkg);
            }
            expect("package");
            parse_qualified_name(pkg);
            expect(";");
            finish(pkg, pfrom);
            unit.children.push_back(std::move(pkg));
        }
        while (at("import")) {
            AstNode imp;
            imp.kind = NodeKind::ImportDecl;
            size_t ifrom = mark();
            eat();  // import
            if (at("static")) {
                eat();
            }
            parse_qualified_name(imp);
            expect(";");
            finish(imp, ifrom);
            unit.children.push_back(std::move(imp));
        }
        while (!at_end()) {
            if (at(";")) {
                eat();
                continue;
            }
            unit.children.push_back(parse_type_decl());
        }
        finish(unit, from);
        return unit;
    }

    AstNode parse_members_root() {
        AstNode root;
        root.kind = NodeKind::ClassBody;
        size_t from = mark();
        while (!at_end()) {
            root.children.push_back(parse_member());
        }
        finish(root, from);
        return root;
    }

    AstNode parse_statements_root() {
        AstNode root;
        root.kind = NodeKind::Block;
        size_t from = mark();
        while (!at_end()) {
            root.children.push_back(parse_statement());
        }
        finish(root, from);
        return root;
    }

    // ---- type declarations -------------------------------------------------

    bool at_type_keyword() const {
        return at("class") || at("interface") || at("enum") ||
               (at("@") && peek(1).is("interface"));
    }

    AstNode parse_type_decl() {
        AstNode node;
        size_t from = mark();
        while (true) {
            if (is_modifier(peek())) {
                eat_leaf(node);
                continue;
            }
            if (at("@") && !peek(1).is("interface")) {
                eat_annotation(node);
                continue;
            }
            break;
        }
        if (at("class")) {
            node.kind = NodeKind::ClassDecl;
            eat_leaf(node);
        } else if (at("interface")) {
            node.kind = NodeKind::InterfaceDecl;
            eat_leaf(node);
        } else if (at("enum")) {
            node.kind = NodeKind::EnumDecl;
            eat_leaf(node);
        } else if (at("@") && peek(1).is("interface")) {
            node.kind = NodeKind::AnnotationDecl;
            eat_leaf(node);
            eat_leaf(node);
        } else {
            fail("expected type declaration");
        }
        if (!at_kind(Tok::Identifier)) {
            fail("expected type name");
        }
        Token name_tok = eat();
        node.name = name_tok.text;
        add_leaf(node, name_tok);
        if (at("<")) {
            scan_type_arguments(node);
        }
        if (at("extends")) {
            eat_leaf(node);
            parse_type(node);
            while (at(",")) {  // interfaces may extend several
                eat_leaf(node);
                parse_type(node);
            }
        }
        if (at("implements")) {
            eat_leaf(node);
            parse_type(node);
            while (at(",")) {
                eat_leaf(node);
                parse_type(node);
            }
        }
        if (node.kind == NodeKind::EnumDecl) {
            node.children.push_back(parse_enum_body());
        } else {
            node.children.push_back(parse_class_body());
        }
        finish(node, from);
        return node;
    }

    AstNode parse_class_body() {
        AstNode body;
        body.kind = NodeKind::ClassBody;
        size_t from = mark();
        expect("{");
        while (!at("}")) {
            if (at_end()) {
                fail("unterminated class body: expected '}'");
            }
            body.children.push_back(parse_member());
        }
        eat();  // '}'
        finish(body, from);
        return body;
    }

    AstNode parse_enum_body() {
        AstNode body;
        body.kind = NodeKind::ClassBody;
        size_t from = mark();
        expect("{");
        AstNode constants;
        constants.kind = NodeKind::EnumConstants;
        size_t cfrom = mark();
        bool expect_constant = !at(";") && !at("}");
        while (expect_constant) {
            while (at("@")) {
                eat_annotation(constants);
            }
            if (!at_kind(Tok::Identifier)) {
                fail("expected enum constant");
            }
            eat_leaf(constants);
            if (at("(")) {
                scan_group(constants);
            }
            if (at("{")) {
                scan_group(constants);  // constant class body, structure not needed
            }
            if (at(",")) {
                eat_leaf(constants);
                expect_constant = !at(";") && !at("}");  // trailing comma allowed
                continue;
            }
            break;
        }
        finish(constants, cfrom);
        body.children.push_back(std::move(constants));
        if (at(";")) {
            eat();
            while (!at("}")) {
                if (at_end()) {
                    fail("unterminated enum body: expected '}'");
                }
                body.children.push_back(parse_member());
            }
        }
        expect("}");
        finish(body, from);
        return body;
    }

    // ---- class members -----------------------------------------------------

    AstNode parse_member() {
        AstNode node;
        size_t from = mark();
        while (true) {
            if (is_modifier(peek())) {
                eat_leaf(node);
                continue;
            }
            if (at("@") && !peek(1).is("interface")) {
                eat_annotation(node);
                continue;
            }
            break;
        }
        if (at(";")) {
            node.kind = NodeKind::EmptyMember;
            eat();
            finish(node, from);
            return node;
        }
        if (at("{")) {
            node.kind = NodeKind::InitBlock;
            node.children.push_back(parse_block());
            finish(node, from);
            return node;
        }
        if (at_type_keyword()) {
            // Nested type; re-parse from the member start so its modifiers stay attached.
            pos_ = from;
            return parse_type_decl();
        }
        if (at("<")) {
            scan_type_arguments(node);  // method type parameters
        }
        // Constructor: identifier directly followed by '('.
        if (at_kind(Tok::Identifier) && peek(1).is("(")) {
            node.kind = NodeKind::CtorDecl;
            Token name_tok = eat();
            node.name = name_tok.text;
            add_leaf(node, name_tok);
            node.children.push_back(parse_params());
            parse_method_tail(node);
            finish(node, from);
            return node;
        }
        parse_type(node);
        if (!at_kind(Tok::Identifier)) {
            fail("expected member name");
        }
        Token name_tok = eat();
        node.name = name_tok.text;
        add_leaf(node, name_tok);
        if (at("(")) {
            node.kind = NodeKind::MethodDecl;
            node.children.push_back(parse_params());
            parse_method_tail(node);
            finish(node, from);
            return node;
        }
        node.kind = NodeKind::FieldDecl;
        node.aux_offset = name_tok.offset;
        node.decl_names.push_back(name_tok.text);
        parse_field_rest(node);
        finish(node, from);
        return node;
    }

    AstNode parse_params() {
        AstNode params;
        params.kind = NodeKind::Params;
        size_t from = mark();
        expect_or_leaf(params, "(");
        if (!at(")")) {
            while (true) {
                while (at("@")) {
                    eat_annotation(params);
                }
                while (at("final")) {
                    eat_leaf(params);
                }
                parse_type(params);
                if (at("...")) {
                    eat_leaf(params);
                }
                if (at("this")) {
                    eat_leaf(params);  // receiver parameter
                } else {
                    if (!at_kind(Tok::Identifier)) {
                        fail("expected parameter name");
                    }
                    eat_leaf(params);
                }
                while (at("[")) {
                    eat_leaf(params);
                    expect_or_leaf(params, "]");
                }
                if (at(",")) {
                    eat_leaf(params);
                    continue;
                }
                break;
            }
        }
        expect_or_leaf(params, ")");
        finish(params, from);
        return params;
    }

    void parse_method_tail(AstNode& node) {
        while (at("[")) {
            eat_leaf(node);
            expect_or_leaf(node, "]");
        }
        if (at("throws")) {
            eat_leaf(node);
            parse_type(node);
            while (at(",")) {
                eat_leaf(node);
                parse_type(node);
            }
        }
        if (at("default")) {  // annotation type element default value
            eat_leaf(node);
            scan_expr_until_semi(node);
            return;
        }
        if (at(";")) {
            eat();
            return;
        }
        node.children.push_back(parse_block());
    }

    void parse_field_rest(AstNode& node) {
        while (true) {
            while (at("[")) {
                eat_leaf(node);
                expect_or_leaf(node, "]");
            }
            if (at("=")) {
                eat_leaf(node);
                scan_expr_until_semi(node, /*stop_at_comma=*/true);
                if (node.children.back().text == ";") {
                    return;  // scan consumed the terminating ';'
                }
            }
            if (at(";")) {
                eat();
                return;
            }
            if (at(",")) {
                eat_leaf(node);
                if (!at_kind(Tok::Identifier)) {
                    fail("expected field name");
                }
                Token name_tok = eat();
                node.decl_names.push_back(name_tok.text);
                add_leaf(node, name_tok);
                continue;
            }
            fail("expected ';' in field declaration");
        }
    }

    // ---- statements --------------------------------------------------------

    AstNode parse_block() {
        AstNode block;
        block.kind = NodeKind::Block;
        size_t from = mark();
        expect("{");
        while (!at("}")) {
            if (at_end()) {
                fail("unterminated block: expected '}'");
            }
            block.children.push_back(parse_statement());
        }
        eat();  // '}'
        finish(block, from);
        return block;
    }

    bool local_type_ahead() const {
        size_t i = 0;
        while (true) {
            const Token& t = peek(i);
            if (t.is("final") || t.is("abstract") || t.is("static")) {
                ++i;
                continue;
            }
            if (t.is("@") && peek(i + 1).kind == Tok::Identifier) {
                i += 2;
                while (peek(i).is(".") && peek(i + 1).kind == Tok::Identifier) {
                    i += 2;
                }
                if (peek(i).is("(")) {  // annotation arguments
                    int depth = 0;
                    while (true) {
                        const Token& a = peek(i);
                        if (a.kind == Tok::End) return false;
                        if (a.is("(")) ++depth;
                        if (a.is(")") && --depth == 0) {
                            ++i;
                            break;
                        }
                        ++i;
                    }
                }
                continue;
            }
            return t.is("class") || t.is("interface") || t.is("enum");
        }
    }

    AstNode parse_statement() {
        AstNode node;
        size_t from = mark();
        if (at("{")) {
            return parse_block();
        }
        if (at(";")) {
            node.kind = NodeKind::EmptyStmt;
            eat();
            finish(node, from);
            return node;
        }
        if (at("if")) {
            node.kind = NodeKind::If;
            eat();
            node.children.push_back(parse_cond());
            node.children.push_back(parse_statement());
            if (at("else")) {
                eat();
                node.children.push_back(parse_statement());
            }
            finish(node, from);
            return node;
        }
        if (at("while")) {
            node.kind = NodeKind::While;
            eat();
            node.children.push_back(parse_cond());
            node.children.push_back(parse_statement());
            finish(node, from);
            return node;
        }
        if (at("do")) {
            node.kind = NodeKind::DoWhile;
            eat();
            node.children.push_back(parse_statement());
            expect("while");
            node.children.push_back(parse_cond());
            expect(";");
            finish(node, from);
            return node;
        }
        if (at("for")) {
            node.kind = NodeKind::For;
            eat();
            AstNode control;
            control.kind = NodeKind::ForControl;
            size_t cfrom = mark();
            scan_paren_group(control);
            finish(control, cfrom);
            node.children.push_back(std::move(control));
            node.children.push_back(parse_statement());
            finish(node, from);
            return node;
        }
        if (at("switch")) {
            node.kind = NodeKind::Switch;
            eat();
            node.children.push_back(parse_cond());
            node.children.push_back(parse_switch_block());
            finish(node, from);
            return node;
        }
        if (at("try")) {
            node.kind = NodeKind::Try;
            eat();
            bool has_resources = false;
            if (at("(")) {
                AstNode res;
                res.kind = NodeKind::Resources;
                size_t rfrom = mark();
                scan_paren_group(res);
                finish(res, rfrom);
                node.children.push_back(std::move(res));
                has_resources = true;
            }
            node.children.push_back(parse_block());
            bool has_handler = false;
            while (at("catch")) {
                AstNode handler;
                handler.kind = NodeKind::Catch;
                size_t hfrom = mark();
                eat();
                scan_paren_group(handler);
                handler.children.push_back(parse_block());
                finish(handler, hfrom);
                node.children.push_back(std::move(handler));
                has_handler = true;
            }
            if (at("finally")) {
                AstNode fin;
                fin.kind = NodeKind::Finally;
                size_t ffrom = mark();
                eat();
                fin.children.push_back(parse_block());
                finish(fin, ffrom);
                node.children.push_back(std::move(fin));
                has_handler = true;
            }
            if (!has_handler && !has_resources) {
                fail("try statement needs catch, finally or resources");
            }
            finish(node, from);
            return node;
        }
        if (at("return")) {
            node.kind = NodeKind::Return;
            eat_leaf(node);
            if (at(";")) {
                eat_leaf(node);
            } else {
                scan_expr_until_semi(node);
            }
            finish(node, from);
            return node;
        }
        if (at("throw")) {
            node.kind = NodeKind::Throw;
            eat_leaf(node);
            scan_expr_until_semi(node);
            finish(node, from);
            return node;
        }
        if (at("break") || at("continue")) {
            node.kind = at("break") ? NodeKind::Break : NodeKind::Continue;
            eat_leaf(node);
            if (at_kind(Tok::Identifier)) {
                eat_leaf(node);
            }
            expect(";");
            finish(node, from);
            return node;
        }
        if (at("assert")) {
            node.kind = NodeKind::Assert;
            eat_leaf(node);
            scan_expr_until_semi(node);
            finish(node, from);
            return node;
        }
        if (at("synchronized")) {
            node.kind = NodeKind::Sync;
            eat();
            node.children.push_back(parse_cond());
            node.children.push_back(parse_block());
            finish(node, from);
            return node;
        }
        if (at("else") || at("catch") || at("finally") || at("case")) {
            fail("unexpected '" + peek().text + "'");
        }
        if (local_type_ahead()) {
            node.kind = NodeKind::LocalType;
            node.children.push_back(parse_type_decl());
            finish(node, from);
            return node;
        }
        if (at_kind(Tok::Identifier) && peek(1).is(":")) {
            node.kind = NodeKind::Labeled;
            eat_leaf(node);
            eat_leaf(node);
            node.children.push_back(parse_statement());
            finish(node, from);
            return node;
        }
        node.kind = NodeKind::ExprStmt;
        scan_expr_until_semi(node);
        finish(node, from);
        return node;
    }

    AstNode parse_cond() {
        AstNode cond;
        cond.kind = NodeKind::Cond;
        size_t from = mark();
        scan_paren_group(cond);
        finish(cond, from);
        return cond;
    }

    AstNode parse_switch_block() {
        AstNode block;
        block.kind = NodeKind::SwitchBlock;
        size_t from = mark();
        expect("{");
        while (!at("}")) {
            if (at_end()) {
                fail("unterminated switch block: expected '}'");
            }
            if (at("case") || at("default")) {
                AstNode label;
                label.kind = NodeKind::SwitchLabel;
                size_t lfrom = mark();
                eat_leaf(label);
                // Tokens of the label up to ':' or '->'.
                std::vector<char> stack;
                bool arrow = false;
                while (true) {
                    if (at_end()) {
                        fail("unterminated switch label");
                    }
                    const Token& t = peek();
                    if (stack.empty() && t.is(":")) {
                        eat_leaf(label);
                        break;
                    }
                    if (stack.empty() && t.is("->")) {
                        eat_leaf(label);
                        arrow = true;
                        break;
                    }
                    if (t.is(";") && stack.empty()) {
                        fail("expected ':' or '->' in switch label");
                    }
                    if (t.kind == Tok::Op && t.text.size() == 1) {
                        char c = t.text[0];
                        if (c == '(' || c == '[' || c == '{') {
                            stack.push_back(c);
                        } else if (c == ')' || c == ']' || c == '}') {
                            char open = c == ')' ? '(' : c == ']' ? '[' : '{';
                            if (stack.empty() || stack.back() != open) {
                                fail("mismatched bracket in switch label");
                            }
                            stack.pop_back();
                        }
                    }
                    eat_leaf(label);
                }
                if (arrow) {
                    label.children.push_back(parse_statement());
                }
                finish(label, lfrom);
                block.children.push_back(std::move(label));
                continue;
            }
            block.children.push_back(parse_statement());
        }
        eat();  // '}'
        finish(block, from);
        return block;
    }
};

}  // namespace detail

inline ParseResult parse_compilation_unit(std::string_view text) {
    return detail::JavaParser(text).run_unit();
}

// Members as they would appear inside a class body (the "minimal class
// shell" wrap, without offset remapping).
inline ParseResult parse_members_snippet(std::string_view text) {
    return detail::JavaParser(text).run_members();
}

// Statements as they would appear inside a method body.
inline ParseResult parse_statements_snippet(std::string_view text) {
    return detail::JavaParser(text).run_statements();
}

struct ParsableCheck {
    bool parsable = false;
    int error_line = 0;
    int error_col = 0;
    size_t error_offset = 0;
    std::string message;
};

// True iff the text parses as one or more class members (a method declaration
// wrapped in a minimal class shell) or, failing that, as a method body's
// statement list. The reported error is the one of the attempt that got
// furthest through the input.
inline ParsableCheck is_parsable(std::string_view test_text) {
    ParsableCheck check;
    bool blank = true;
    for (char c : test_text) {
        if (!std::isspace(static_cast<unsigned char>(c))) {
            blank = false;
            break;
        }
    }
    if (blank) {
        check.message = "empty input";
        return check;
    }
    ParseResult members = parse_members_snippet(test_text);
    if (members.ok) {
        check.parsable = true;
        return check;
    }
    ParseResult stmts = parse_statements_snippet(test_text);
    if (stmts.ok) {
        check.parsable = true;
        return check;
    }
    const ParseError& err =
        members.error.offset >= stmts.error.offset ? members.error : stmts.error;
    check.error_line = err.line;
    check.error_col = err.col;
    check.error_offset = err.offset;
    check.message = err.message;
    return check;
}

}  // namespace testgen
