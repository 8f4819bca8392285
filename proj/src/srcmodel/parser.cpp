#include "blocktrace/srcmodel.hpp"

#include <unordered_set>

namespace blocktrace::srcmodel {

namespace {

const std::unordered_set<std::string_view> kModifiers = {
    "public",   "protected", "private",  "static",  "abstract", "final",   "native",
    "synchronized", "transient", "volatile", "strictfp", "default"};

bool is_word(const Token& t) {
    return t.kind == TokenKind::identifier || t.kind == TokenKind::keyword || t.kind == TokenKind::literal;
}

/// Joins type tokens without spaces except between adjacent words.
std::string compact_join(const std::vector<Token>& toks, std::size_t begin, std::size_t end) {
    std::string out;
    for (std::size_t k = begin; k < end; ++k) {
        if (k != begin && is_word(toks[k]) && (is_word(toks[k - 1]) || toks[k - 1].is("?"))) out.push_back(' ');
        out += toks[k].text;
    }
    return out;
}

bool looks_like_pipeline(const std::vector<Token>& toks) {
    static const std::unordered_set<std::string_view> streams = {"Stream", "IntStream", "LongStream",
                                                                  "DoubleStream", "StreamSupport"};
    for (std::size_t k = 0; k + 2 < toks.size(); ++k) {
        if (toks[k].is(".") && toks[k + 2].is("(")) {
            const auto& name = toks[k + 1].text;
            if (name == "stream" || name == "parallelStream" || name == "forEach") return true;
            if (k > 0 && streams.count(toks[k - 1].text)) return true;
            if (name == "stream" && k > 0 && toks[k - 1].is("Arrays")) return true;
        }
    }
    return false;
}

class Parser {
public:
    Parser(std::vector<Token> tokens, std::string path) : t_(std::move(tokens)), path_(std::move(path)) {}

    std::shared_ptr<CompilationUnit> parse_unit() {
        auto unit = std::make_shared<CompilationUnit>();
        unit->path = path_;
        if (peek().is("module") || (peek().is("open") && peek(1).is("module"))) return unit;
        std::size_t save = pos_;
        skip_annotations();
        if (at("package")) {
            ++pos_;
            std::size_t b = pos_;
            while (!at(";")) {
                if (at_end()) fail("unterminated package declaration");
                ++pos_;
            }
            unit->package = compact_join(t_, b, pos_);
            ++pos_;
        } else {
            pos_ = save;
        }
        package_ = unit->package;
        source_folder_ = source_folder_of(path_, package_);
        while (at("import") || at(";")) {
            if (at(";")) {
                ++pos_;
                continue;
            }
            ++pos_;
            std::size_t b = pos_;
            while (!at(";")) {
                if (at_end()) fail("unterminated import");
                ++pos_;
            }
            unit->imports.push_back(compact_join(t_, b, pos_));
            ++pos_;
        }
        while (!at_end()) {
            if (at(";")) {
                ++pos_;
                continue;
            }
            std::size_t member_start = pos_;
            skip_modifiers();
            if (!at_type_keyword()) fail("expected a type declaration");
            auto types = parse_type({}, member_start);
            for (auto& ty : types) unit->types.push_back(std::move(ty));
        }
        for (auto& ty : unit->types) {
            for (auto& m : ty.methods) m.container = &ty;
        }
        return unit;
    }

private:
    std::vector<Token> t_;
    std::string path_;
    std::size_t pos_{0};
    std::string package_;
    std::string source_folder_;
    Token eof_{TokenKind::op, "", 0, 0};

    const Token& peek(std::size_t k = 0) const {
        if (pos_ + k < t_.size()) return t_[pos_ + k];
        return eof_;
    }
    bool at_end() const { return pos_ >= t_.size(); }
    bool at(std::string_view s) const { return !at_end() && t_[pos_].is(s); }

    [[noreturn]] void fail(const std::string& message) const {
        if (at_end()) {
            int line = t_.empty() ? 1 : t_.back().line;
            throw ParseError(message + " (at end of file)", line, 1, path_);
        }
        throw ParseError(message + " near '" + t_[pos_].text + "'", t_[pos_].line, t_[pos_].column, path_);
    }

    void expect(std::string_view s) {
        if (!at(s)) fail("expected '" + std::string(s) + "'");
        ++pos_;
    }

    std::string expect_identifier() {
        if (at_end() || t_[pos_].kind != TokenKind::identifier) fail("expected identifier");
        return t_[pos_++].text;
    }

    /// Index one past the bracket closing the one at `open`.
    std::size_t matching(std::size_t open) const {
        int depth = 0;
        for (std::size_t k = open; k < t_.size(); ++k) {
            const auto& s = t_[k].text;
            if (t_[k].kind != TokenKind::op) continue;
            if (s == "(" || s == "[" || s == "{") {
                ++depth;
            } else if (s == ")" || s == "]" || s == "}") {
                if (--depth == 0) return k + 1;
                if (depth < 0) break;
            }
        }
        throw ParseError("unbalanced '" + t_[open].text + "'", t_[open].line, t_[open].column, path_);
    }

    void skip_balanced() { pos_ = matching(pos_); }

    void skip_angles() {
        int depth = 0;
        do {
            if (at_end()) fail("unterminated type arguments");
            if (at("<")) ++depth;
            else if (at(">")) --depth;
            else if (at("(") || at("{") || at(";")) fail("unexpected token in type arguments");
            ++pos_;
        } while (depth > 0);
    }

    std::string skip_annotation() {
        std::size_t b = pos_;
        ++pos_;  // '@'
        expect_identifier();
        while (at(".") && peek(1).kind == TokenKind::identifier) pos_ += 2;
        if (at("(")) skip_balanced();
        return compact_join(t_, b, pos_);
    }

    void skip_annotations() {
        while (at("@") && !peek(1).is("interface")) skip_annotation();
    }

    bool at_modifier() const {
        if (at_end()) return false;
        if (kModifiers.count(peek().text) && peek().kind == TokenKind::keyword) {
            // `default:` / `default ->` are switch labels, never modifiers.
            return !(peek().is("default") && (peek(1).is(":") || peek(1).is("->")));
        }
        if (peek().is("sealed") && (peek(1).kind == TokenKind::keyword || peek(1).is("sealed"))) return true;
        if (peek().is("non") && peek(1).is("-") && peek(2).is("sealed")) return true;
        return false;
    }

    /// Consumes annotations and modifiers; returns (modifiers, annotations).
    std::pair<std::vector<std::string>, std::vector<std::string>> skip_modifiers() {
        std::vector<std::string> mods, annos;
        while (true) {
            if (at("@") && !peek(1).is("interface")) {
                annos.push_back(skip_annotation());
            } else if (peek().is("non") && peek(1).is("-") && peek(2).is("sealed")) {
                mods.push_back("non-sealed");
                pos_ += 3;
            } else if (at_modifier()) {
                mods.push_back(t_[pos_++].text);
            } else {
                break;
            }
        }
        return {mods, annos};
    }

    bool at_type_keyword() const {
        if (at("class") || at("interface") || at("enum")) return true;
        if (at("@") && peek(1).is("interface")) return true;
        return peek().is("record") && peek(1).kind == TokenKind::identifier &&
               (peek(2).is("(") || peek(2).is("<"));
    }

    std::vector<std::string> simple_type_list(std::size_t b, std::size_t e) const {
        std::vector<std::string> out;
        int angle = 0;
        std::string last;
        for (std::size_t k = b; k < e; ++k) {
            const auto& s = t_[k].text;
            if (s == "<") ++angle;
            else if (s == ">") --angle;
            else if (angle == 0 && s == ",") {
                if (!last.empty()) out.push_back(last);
                last.clear();
            } else if (angle == 0 && t_[k].kind == TokenKind::identifier) {
                last = s;
            }
        }
        if (!last.empty()) out.push_back(last);
        return out;
    }

    std::vector<TypeDeclarationInfo> parse_type(const std::vector<std::string>& chain, std::size_t decl_start) {
        TypeDeclarationInfo ty;
        ty.path = path_;
        ty.package = package_;
        ty.source_folder = source_folder_;
        ty.nesting_chain = chain;
        ty.start_line = t_[decl_start].line;
        if (at("class")) {
            ty.kind = TypeKind::class_;
            ++pos_;
        } else if (at("interface")) {
            ty.kind = TypeKind::interface_;
            ++pos_;
        } else if (at("enum")) {
            ty.kind = TypeKind::enum_;
            ++pos_;
        } else if (at("@")) {
            ty.kind = TypeKind::annotation;
            pos_ += 2;
        } else {
            ty.kind = TypeKind::record_;
            ++pos_;
        }
        ty.name = expect_identifier();
        if (at("<")) skip_angles();
        if (ty.kind == TypeKind::record_) {
            if (!at("(")) fail("expected record components");
            std::size_t close = matching(pos_);
            auto comps = split_top_level(pos_ + 1, close - 1, ",");
            for (auto [b, e] : comps) {
                if (e > b && t_[e - 1].kind == TokenKind::identifier) ty.field_names.push_back(t_[e - 1].text);
            }
            pos_ = close;
        }
        // Header clauses up to the body.
        while (!at("{")) {
            if (at_end()) fail("expected type body");
            std::string clause = peek().text;
            if (clause == "extends" || clause == "implements" || clause == "permits") {
                ++pos_;
                std::size_t b = pos_;
                int angle = 0;
                while (!at_end() && !(angle == 0 && (at("{") || at("implements") || at("permits") || at("extends")))) {
                    if (at("<")) ++angle;
                    else if (at(">")) --angle;
                    ++pos_;
                }
                auto names = simple_type_list(b, pos_);
                if (clause == "implements" || (clause == "extends" && ty.kind == TypeKind::interface_)) {
                    auto& dst = clause == "implements" ? ty.implements : ty.extends;
                    dst.insert(dst.end(), names.begin(), names.end());
                } else if (clause == "extends") {
                    ty.extends.insert(ty.extends.end(), names.begin(), names.end());
                }
            } else {
                fail("unexpected token in type header");
            }
        }
        std::vector<TypeDeclarationInfo> nested;
        auto inner_chain = chain;
        inner_chain.push_back(ty.name);
        expect("{");
        if (ty.kind == TypeKind::enum_) parse_enum_constants();
        while (!at("}")) {
            if (at_end()) fail("unterminated type body");
            parse_member(ty, inner_chain, nested);
        }
        ty.end_line = t_[pos_].line;
        ++pos_;
        std::vector<TypeDeclarationInfo> out;
        out.push_back(std::move(ty));
        for (auto& n : nested) out.push_back(std::move(n));
        return out;
    }

    void parse_enum_constants() {
        while (!at_end()) {
            if (at(";")) {
                ++pos_;
                return;
            }
            if (at("}")) return;
            skip_annotations();
            expect_identifier();
            if (at("(")) skip_balanced();
            if (at("{")) skip_balanced();
            if (at(",")) {
                ++pos_;
                continue;
            }
            if (at(";")) {
                ++pos_;
                return;
            }
            if (at("}")) return;
            fail("unexpected token in enum constants");
        }
    }

    std::vector<std::pair<std::size_t, std::size_t>> split_top_level(std::size_t b, std::size_t e,
                                                                      std::string_view sep,
                                                                      bool count_angles = true) const {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        int depth = 0;
        std::size_t start = b;
        for (std::size_t k = b; k < e; ++k) {
            const auto& s = t_[k].text;
            if (t_[k].kind == TokenKind::op) {
                if (s == "(" || s == "[" || s == "{" || (count_angles && s == "<")) ++depth;
                else if (s == ")" || s == "]" || s == "}" || (count_angles && s == ">")) --depth;
            }
            if (depth == 0 && s == sep && t_[k].kind == TokenKind::op) {
                out.emplace_back(start, k);
                start = k + 1;
            }
        }
        if (start < e || !out.empty()) out.emplace_back(start, e);
        return out;
    }

    void parse_member(TypeDeclarationInfo& ty, const std::vector<std::string>& chain,
                      std::vector<TypeDeclarationInfo>& nested) {
        if (at(";")) {
            ++pos_;
            return;
        }
        if (at("{")) {
            skip_balanced();
            return;
        }
        if (at("static") && peek(1).is("{")) {
            ++pos_;
            skip_balanced();
            return;
        }
        const std::size_t member_start = pos_;
        auto [mods, annos] = skip_modifiers();
        if (at_type_keyword()) {
            auto types = parse_type(chain, member_start);
            for (auto& n : types) nested.push_back(std::move(n));
            return;
        }
        if (at("<")) skip_angles();
        MethodDeclarationInfo m;
        m.modifiers = mods;
        m.annotations = annos;
        m.start_line = t_[member_start].line;
        if (peek().kind == TokenKind::identifier && peek(1).is("(")) {
            m.is_constructor = true;
            m.name = t_[pos_++].text;
        } else if (ty.kind == TypeKind::record_ && peek().is(ty.name) && peek(1).is("{")) {
            // compact canonical constructor
            m.is_constructor = true;
            m.name = t_[pos_++].text;
            finish_method(m, member_start);
            ty.methods.push_back(std::move(m));
            return;
        } else {
            std::size_t type_begin = pos_;
            parse_type_ref();
            std::size_t type_end = pos_;
            if (peek().kind != TokenKind::identifier) fail("expected member name");
            std::string name = t_[pos_++].text;
            if (!at("(")) {
                ty.field_names.push_back(name);
                skip_field_rest(ty);
                return;
            }
            m.name = name;
            m.return_type = compact_join(t_, type_begin, type_end);
        }
        // parameters
        std::size_t close = matching(pos_);
        for (auto [b, e] : split_top_level(pos_ + 1, close - 1, ",")) {
            if (e <= b) continue;
            parse_parameter(m, b, e);
        }
        pos_ = close;
        finish_method(m, member_start);
        ty.methods.push_back(std::move(m));
    }

    void parse_parameter(MethodDeclarationInfo& m, std::size_t b, std::size_t e) {
        while (b < e && (t_[b].is("@") || t_[b].is("final"))) {
            if (t_[b].is("final")) {
                ++b;
                continue;
            }
            ++b;
            if (b < e) ++b;
            while (b + 1 < e && t_[b].is(".") && t_[b + 1].kind == TokenKind::identifier) b += 2;
            if (b < e && t_[b].is("(")) {
                std::size_t save = pos_;
                pos_ = b;
                b = matching(b);
                pos_ = save;
            }
        }
        if (e > b && t_[e - 1].is("this")) return;  // receiver parameter
        int dims = 0;
        while (e >= b + 2 && t_[e - 1].is("]") && t_[e - 2].is("[")) {
            e -= 2;
            ++dims;
        }
        if (e <= b) return;
        std::string name = t_[e - 1].text;
        std::string type = compact_join(t_, b, e - 1);
        for (int d = 0; d < dims; ++d) type += "[]";
        m.parameter_types.push_back(type);
        m.parameter_names.push_back(name);
    }

    void parse_type_ref() {
        if (at("?")) ++pos_;
        if (at_end() || (peek().kind != TokenKind::identifier && !is_primitive_type(peek().text))) {
            fail("expected type");
        }
        ++pos_;
        while (true) {
            if (at("<")) {
                skip_angles();
            } else if (at(".") && peek(1).kind == TokenKind::identifier) {
                pos_ += 2;
            } else if (at("[") && peek(1).is("]")) {
                pos_ += 2;
            } else if (at("...")) {
                ++pos_;
            } else if (at("@")) {
                skip_annotation();
            } else {
                break;
            }
        }
    }

    void skip_field_rest(TypeDeclarationInfo& ty) {
        int depth = 0;
        while (!at_end()) {
            const auto& s = t_[pos_].text;
            if (t_[pos_].kind == TokenKind::op) {
                if (s == "(" || s == "[" || s == "{") ++depth;
                else if (s == ")" || s == "]" || s == "}") {
                    if (depth == 0) fail("unexpected closing bracket in field");
                    --depth;
                } else if (depth == 0 && s == ";") {
                    ++pos_;
                    return;
                } else if (depth == 0 && s == "," && peek(1).kind == TokenKind::identifier) {
                    ty.field_names.push_back(peek(1).text);
                }
            }
            ++pos_;
        }
        fail("unterminated field declaration");
    }

    void finish_method(MethodDeclarationInfo& m, std::size_t member_start) {
        while (at("[") && peek(1).is("]")) {
            pos_ += 2;
            if (m.return_type) *m.return_type += "[]";
        }
        if (at("throws")) {
            while (!at_end() && !at("{") && !at(";")) ++pos_;
        }
        if (at("default")) {
            while (!at_end() && !at(";")) {
                if (at("{") || at("(")) skip_balanced();
                else ++pos_;
            }
        }
        if (at(";")) {
            m.end_line = t_[pos_].line;
            ++pos_;
        } else if (at("{")) {
            auto root = std::make_shared<StatementNode>(parse_block());
            finalize(*root, nullptr, 0, 0);
            m.body_text = root->body_text;
            m.body_hash = root->body_hash;
            m.end_line = root->end_line;
            m.body = std::move(root);
        } else {
            fail("expected method body");
        }
        m.declaration_text = join_tokens(t_, member_start, pos_);
    }

    // ---- statements ----

    StatementNode make_node(StatementKind kind, std::size_t b, std::size_t e) const {
        StatementNode n;
        n.kind = kind;
        n.start_line = t_[b].line;
        n.end_line = t_[e - 1].line;
        n.text = join_tokens(t_, b, e);
        return n;
    }

    void add_expression(StatementNode& n, std::size_t b, std::size_t e) const {
        n.expressions.push_back(join_tokens(t_, b, e));
        n.expression_tokens.emplace_back(t_.begin() + static_cast<std::ptrdiff_t>(b),
                                         t_.begin() + static_cast<std::ptrdiff_t>(e));
    }

    /// Consumes `( ... )`, returning the inner token range.
    std::pair<std::size_t, std::size_t> paren_range() {
        if (!at("(")) fail("expected '('");
        std::size_t close = matching(pos_);
        std::pair<std::size_t, std::size_t> r{pos_ + 1, close - 1};
        pos_ = close;
        return r;
    }

    static void append_flattened(StatementNode& parent, std::optional<StatementNode> child) {
        if (!child) return;
        if (child->kind == StatementKind::block) {
            for (auto& c : child->children) parent.children.push_back(std::move(c));
        } else {
            parent.children.push_back(std::move(*child));
        }
    }

    StatementNode parse_block() {
        std::size_t b = pos_;
        expect("{");
        std::vector<StatementNode> kids;
        while (!at("}")) {
            if (at_end()) fail("unterminated block");
            auto s = parse_statement();
            if (s) kids.push_back(std::move(*s));
        }
        ++pos_;
        auto n = make_node(StatementKind::block, b, pos_);
        n.children = std::move(kids);
        return n;
    }

    std::optional<StatementNode> parse_statement() {
        if (at_end()) fail("expected statement");
        const Token& tk = peek();
        if (tk.is("{")) return parse_block();
        if (tk.is(";")) {
            ++pos_;
            return std::nullopt;
        }
        if (tk.kind == TokenKind::keyword) {
            if (tk.is("if")) return parse_if();
            if (tk.is("for")) return parse_for();
            if (tk.is("while")) return parse_while();
            if (tk.is("do")) return parse_do();
            if (tk.is("try")) return parse_try();
            if (tk.is("switch")) return parse_switch();
            if (tk.is("synchronized") && peek(1).is("(")) return parse_synchronized();
            if (tk.is("else") || tk.is("catch") || tk.is("finally") || tk.is("case")) fail("misplaced keyword");
        }
        if (tk.kind == TokenKind::identifier && peek(1).is(":")) {
            pos_ += 2;  // label
            return parse_statement();
        }
        if (at_local_type()) return parse_local_type();
        return parse_leaf();
    }

    bool at_local_type() {
        std::size_t save = pos_;
        try {
            skip_modifiers();
        } catch (const ParseError&) {
            pos_ = save;
            return false;
        }
        bool yes = at("class") || at("interface") || at("enum") ||
                   (peek().is("record") && peek(1).kind == TokenKind::identifier &&
                    (peek(2).is("(") || peek(2).is("<")));
        pos_ = save;
        return yes;
    }

    StatementNode parse_local_type() {
        std::size_t b = pos_;
        while (!at("{")) {
            if (at_end()) fail("unterminated local type");
            if (at("(")) skip_balanced();
            else ++pos_;
        }
        skip_balanced();
        auto n = make_node(StatementKind::leaf, b, pos_);
        n.tokens.assign(t_.begin() + static_cast<std::ptrdiff_t>(b), t_.begin() + static_cast<std::ptrdiff_t>(pos_));
        return n;
    }

    StatementNode parse_leaf() {
        std::size_t b = pos_;
        int depth = 0;
        while (true) {
            if (at_end()) fail("expected ';'");
            const Token& tk = t_[pos_];
            if (tk.kind == TokenKind::op) {
                if (tk.is("(") || tk.is("[") || tk.is("{")) {
                    ++depth;
                } else if (tk.is(")") || tk.is("]") || tk.is("}")) {
                    if (depth == 0) fail("expected ';'");
                    --depth;
                } else if (tk.is(";") && depth == 0) {
                    ++pos_;
                    break;
                }
            }
            ++pos_;
        }
        auto n = make_node(StatementKind::leaf, b, pos_);
        n.tokens.assign(t_.begin() + static_cast<std::ptrdiff_t>(b), t_.begin() + static_cast<std::ptrdiff_t>(pos_));
        n.is_pipeline = looks_like_pipeline(n.tokens);
        return n;
    }

    StatementNode parse_if() {
        std::size_t b = pos_;
        expect("if");
        auto [cb, ce] = paren_range();
        StatementNode n;
        add_expression(n, cb, ce);
        append_flattened(n, parse_statement());
        if (at("else")) {
            ++pos_;
            n.else_start = static_cast<int>(n.children.size());
            append_flattened(n, parse_statement());
        }
        auto shell = make_node(StatementKind::if_, b, pos_);
        n.kind = shell.kind;
        n.start_line = shell.start_line;
        n.end_line = shell.end_line;
        n.text = std::move(shell.text);
        return n;
    }

    StatementNode parse_for() {
        std::size_t b = pos_;
        expect("for");
        auto [hb, he] = paren_range();
        StatementNode n;
        auto parts = split_top_level(hb, he, ";", false);
        if (parts.size() == 3) {
            n.kind = StatementKind::for_;
            for (auto [pb, pe] : parts) add_expression(n, pb, pe);
        } else {
            n.kind = StatementKind::enhanced_for;
            std::size_t colon = he;
            int depth = 0;
            for (std::size_t k = hb; k < he; ++k) {
                if (t_[k].is("(") || t_[k].is("[") || t_[k].is("{")) ++depth;
                else if (t_[k].is(")") || t_[k].is("]") || t_[k].is("}")) --depth;
                else if (depth == 0 && t_[k].is(":")) {
                    colon = k;
                    break;
                }
            }
            if (colon == he) fail("malformed for header");
            add_expression(n, hb, colon);
            add_expression(n, colon + 1, he);
        }
        append_flattened(n, parse_statement());
        auto shell = make_node(n.kind, b, pos_);
        n.start_line = shell.start_line;
        n.end_line = shell.end_line;
        n.text = std::move(shell.text);
        return n;
    }

    StatementNode parse_while() {
        std::size_t b = pos_;
        expect("while");
        auto [cb, ce] = paren_range();
        StatementNode n;
        n.kind = StatementKind::while_;
        add_expression(n, cb, ce);
        append_flattened(n, parse_statement());
        auto shell = make_node(n.kind, b, pos_);
        n.start_line = shell.start_line;
        n.end_line = shell.end_line;
        n.text = std::move(shell.text);
        return n;
    }

    StatementNode parse_do() {
        std::size_t b = pos_;
        expect("do");
        StatementNode n;
        n.kind = StatementKind::do_while;
        append_flattened(n, parse_statement());
        expect("while");
        auto [cb, ce] = paren_range();
        add_expression(n, cb, ce);
        expect(";");
        auto shell = make_node(n.kind, b, pos_);
        n.start_line = shell.start_line;
        n.end_line = shell.end_line;
        n.text = std::move(shell.text);
        return n;
    }

    StatementNode parse_synchronized() {
        std::size_t b = pos_;
        expect("synchronized");
        auto [cb, ce] = paren_range();
        StatementNode n;
        n.kind = StatementKind::synchronized_;
        add_expression(n, cb, ce);
        if (!at("{")) fail("expected '{'");
        append_flattened(n, parse_block());
        auto shell = make_node(n.kind, b, pos_);
        n.start_line = shell.start_line;
        n.end_line = shell.end_line;
        n.text = std::move(shell.text);
        return n;
    }

    StatementNode parse_try() {
        std::size_t b = pos_;
        expect("try");
        StatementNode n;
        n.kind = StatementKind::try_;
        if (at("(")) {
            auto [rb, re] = paren_range();
            for (auto [pb, pe] : split_top_level(rb, re, ";", false)) {
                if (pe > pb) add_expression(n, pb, pe);
            }
        }
        if (!at("{")) fail("expected '{'");
        append_flattened(n, parse_block());
        while (at("catch")) {
            std::size_t cb0 = pos_;
            ++pos_;
            auto [pb, pe] = paren_range();
            StatementNode c;
            c.kind = StatementKind::catch_;
            add_expression(c, pb, pe);
            if (!at("{")) fail("expected '{'");
            append_flattened(c, parse_block());
            auto shell = make_node(c.kind, cb0, pos_);
            c.start_line = shell.start_line;
            c.end_line = shell.end_line;
            c.text = std::move(shell.text);
            n.children.push_back(std::move(c));
        }
        if (at("finally")) {
            std::size_t fb = pos_;
            ++pos_;
            StatementNode f;
            f.kind = StatementKind::finally_;
            if (!at("{")) fail("expected '{'");
            append_flattened(f, parse_block());
            auto shell = make_node(f.kind, fb, pos_);
            f.start_line = shell.start_line;
            f.end_line = shell.end_line;
            f.text = std::move(shell.text);
            n.children.push_back(std::move(f));
        }
        auto shell = make_node(n.kind, b, pos_);
        n.start_line = shell.start_line;
        n.end_line = shell.end_line;
        n.text = std::move(shell.text);
        return n;
    }

    StatementNode parse_switch() {
        std::size_t b = pos_;
        expect("switch");
        auto [sb, se] = paren_range();
        StatementNode n;
        n.kind = StatementKind::switch_;
        add_expression(n, sb, se);
        expect("{");
        while (!at("}")) {
            if (at_end()) fail("unterminated switch");
            if (at("case") || (at("default") && (peek(1).is(":") || peek(1).is("->")))) {
                std::size_t lb = pos_;
                int depth = 0;
                bool arrow = false;
                while (true) {
                    if (at_end()) fail("unterminated case label");
                    if (at("(") || at("[") || at("{")) ++depth;
                    else if (at(")") || at("]") || at("}")) --depth;
                    else if (depth == 0 && (at(":") || at("->"))) {
                        arrow = at("->");
                        ++pos_;
                        break;
                    }
                    ++pos_;
                }
                auto label = make_node(StatementKind::leaf, lb, pos_);
                label.tokens.assign(t_.begin() + static_cast<std::ptrdiff_t>(lb),
                                    t_.begin() + static_cast<std::ptrdiff_t>(pos_));
                label.is_case_label = true;
                n.children.push_back(std::move(label));
                if (arrow) append_flattened(n, parse_statement());
                continue;
            }
            append_flattened(n, parse_statement());
        }
        ++pos_;
        auto shell = make_node(n.kind, b, pos_);
        n.start_line = shell.start_line;
        n.end_line = shell.end_line;
        n.text = std::move(shell.text);
        return n;
    }

    static void finalize(StatementNode& n, const StatementNode* parent, int index, int depth) {
        n.parent = parent;
        n.index_in_parent = index;
        n.depth = depth;
        for (std::size_t i = 0; i < n.children.size(); ++i) {
            finalize(n.children[i], &n, static_cast<int>(i), depth + 1);
        }
        if (n.is_leaf()) {
            n.body_text = n.text;
        } else {
            std::string body;
            for (std::size_t i = 0; i < n.children.size(); ++i) {
                const auto& c = n.children[i];
                if (n.kind == StatementKind::try_ &&
                    (c.kind == StatementKind::catch_ || c.kind == StatementKind::finally_)) {
                    continue;
                }
                if (static_cast<int>(i) == n.else_start) body += body.empty() ? "else" : " else";
                if (!body.empty()) body.push_back(' ');
                body += c.text;
            }
            if (n.else_start == static_cast<int>(n.children.size())) body += body.empty() ? "else" : " else";
            n.body_text = std::move(body);
        }
        n.body_hash = fnv1a(n.body_text);
        n.text_hash = fnv1a(n.text);
    }
};

}  // namespace

std::shared_ptr<const CompilationUnit> parse_file(std::string_view text, const std::string& path) {
    std::vector<Token> tokens;
    try {
        tokens = tokenize(text);
    } catch (const ParseError& e) {
        throw ParseError(e.message(), e.line(), e.column(), path);
    }
    Parser parser(std::move(tokens), path);
    return parser.parse_unit();
}

}  // namespace blocktrace::srcmodel
