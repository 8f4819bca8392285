#include "blocktrace/srcmodel.hpp"

#include <algorithm>

namespace blocktrace::srcmodel {

namespace {

struct KindName {
    StatementKind kind;
    std::string_view name;
};

constexpr KindName kKindNames[] = {
    {StatementKind::if_, "if"},
    {StatementKind::for_, "for"},
    {StatementKind::enhanced_for, "enhanced-for"},
    {StatementKind::while_, "while"},
    {StatementKind::do_while, "do-while"},
    {StatementKind::try_, "try"},
    {StatementKind::catch_, "catch"},
    {StatementKind::finally_, "finally"},
    {StatementKind::switch_, "switch"},
    {StatementKind::synchronized_, "synchronized"},
    {StatementKind::block, "block"},
    {StatementKind::leaf, "leaf"},
};

void join_into(std::string& out, const std::vector<std::string>& parts, char sep) {
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out.push_back(sep);
        out += parts[i];
    }
}

}  // namespace

std::string to_string(StatementKind kind) {
    for (const auto& kn : kKindNames) {
        if (kn.kind == kind) return std::string(kn.name);
    }
    return "leaf";
}

std::optional<StatementKind> parse_statement_kind(std::string_view text) {
    for (const auto& kn : kKindNames) {
        if (kn.name == text) return kn.kind;
    }
    return std::nullopt;
}

bool is_trackable(StatementKind kind) {
    return kind != StatementKind::block && kind != StatementKind::leaf;
}

const std::vector<StatementKind>& trackable_kinds() {
    static const std::vector<StatementKind> kinds = {
        StatementKind::if_,      StatementKind::for_,    StatementKind::enhanced_for, StatementKind::while_,
        StatementKind::do_while, StatementKind::try_,    StatementKind::catch_,       StatementKind::finally_,
        StatementKind::switch_,  StatementKind::synchronized_};
    return kinds;
}

// ---- StatementNode ----

std::string StatementNode::block_type() const {
    if (kind == StatementKind::leaf && is_pipeline) return "pipeline";
    return to_string(kind);
}

std::vector<const StatementNode*> StatementNode::handlers() const {
    std::vector<const StatementNode*> out;
    if (kind != StatementKind::try_) return out;
    for (const auto& c : children) {
        if (c.kind == StatementKind::catch_ || c.kind == StatementKind::finally_) out.push_back(&c);
    }
    return out;
}

std::vector<const StatementNode*> StatementNode::body_children() const {
    std::vector<const StatementNode*> out;
    for (const auto& c : children) {
        if (kind == StatementKind::try_ && (c.kind == StatementKind::catch_ || c.kind == StatementKind::finally_)) {
            continue;
        }
        out.push_back(&c);
    }
    return out;
}

void StatementNode::visit(const std::function<void(const StatementNode&)>& fn) const {
    fn(*this);
    for (const auto& c : children) c.visit(fn);
}

std::vector<const StatementNode*> StatementNode::preorder() const {
    std::vector<const StatementNode*> out;
    std::vector<const StatementNode*> stack{this};
    while (!stack.empty()) {
        const auto* n = stack.back();
        stack.pop_back();
        out.push_back(n);
        for (auto it = n->children.rbegin(); it != n->children.rend(); ++it) stack.push_back(&*it);
    }
    return out;
}

std::size_t StatementNode::subtree_size() const {
    std::size_t n = 1;
    for (const auto& c : children) n += c.subtree_size();
    return n;
}

bool StatementNode::is_descendant_of(const StatementNode& ancestor) const {
    for (const auto* p = parent; p; p = p->parent) {
        if (p == &ancestor) return true;
    }
    return false;
}

// ---- MethodDeclarationInfo ----

std::string MethodDeclarationInfo::overload_key() const {
    std::string out = name + "(";
    join_into(out, parameter_types, ',');
    out += ")";
    return out;
}

std::string MethodDeclarationInfo::signature() const {
    auto out = overload_key();
    if (return_type) out += ":" + *return_type;
    return out;
}

bool MethodDeclarationInfo::same_signature(const MethodDeclarationInfo& other) const {
    return name == other.name && parameter_types == other.parameter_types && return_type == other.return_type;
}

std::set<std::string> MethodDeclarationInfo::called_names() const {
    std::set<std::string> out;
    if (!body) return out;
    auto scan = [&](const std::vector<Token>& toks) {
        for (std::size_t k = 0; k + 1 < toks.size(); ++k) {
            if (toks[k].kind != TokenKind::identifier) continue;
            bool is_new = k > 0 && toks[k - 1].is("new");
            if (toks[k + 1].is("(") && !is_new) out.insert(toks[k].text);
            if (k > 0 && toks[k - 1].is("::")) out.insert(toks[k].text);
        }
        if (!toks.empty() && toks.back().kind == TokenKind::identifier && toks.size() > 1 &&
            toks[toks.size() - 2].is("::")) {
            out.insert(toks.back().text);
        }
    };
    body->visit([&](const StatementNode& n) {
        scan(n.tokens);
        for (const auto& e : n.expression_tokens) scan(e);
    });
    return out;
}

// ---- TypeDeclarationInfo ----

std::string TypeDeclarationInfo::type_chain() const {
    std::string out;
    for (const auto& n : nesting_chain) out += n + ".";
    return out + name;
}

std::string TypeDeclarationInfo::qualified_name() const {
    return package.empty() ? type_chain() : package + "." + type_chain();
}

std::string TypeDeclarationInfo::key() const { return source_folder + "|" + qualified_name(); }

const MethodDeclarationInfo* TypeDeclarationInfo::find_method(const std::string& overload_key) const {
    for (const auto& m : methods) {
        if (m.overload_key() == overload_key) return &m;
    }
    return nullptr;
}

std::string source_folder_of(const std::string& path, const std::string& package) {
    auto slash = path.rfind('/');
    std::string dir = slash == std::string::npos ? std::string() : path.substr(0, slash);
    if (package.empty()) return dir;
    std::string pkg_dir = package;
    std::replace(pkg_dir.begin(), pkg_dir.end(), '.', '/');
    if (dir == pkg_dir) return "";
    if (dir.size() > pkg_dir.size() && dir.compare(dir.size() - pkg_dir.size(), pkg_dir.size(), pkg_dir) == 0 &&
        dir[dir.size() - pkg_dir.size() - 1] == '/') {
        return dir.substr(0, dir.size() - pkg_dir.size() - 1);
    }
    return dir;
}

// ---- SourceModel ----

const CompilationUnit* SourceModel::file(const std::string& path) const {
    auto it = files.find(path);
    return it == files.end() ? nullptr : it->second.get();
}

std::vector<const TypeDeclarationInfo*> SourceModel::types() const {
    std::vector<const TypeDeclarationInfo*> out;
    for (const auto& [path, unit] : files) {
        for (const auto& t : unit->types) out.push_back(&t);
    }
    return out;
}

const TypeDeclarationInfo* SourceModel::find_type(const std::string& key) const {
    for (const auto* t : types()) {
        if (t->key() == key) return t;
    }
    return nullptr;
}

std::size_t SourceModel::method_count() const {
    std::size_t n = 0;
    for (const auto* t : types()) n += t->methods.size();
    return n;
}

// ---- identifiers ----

std::string BlockIdentifier::key() const {
    std::string out = container.source_folder + "|" + container.package + "|";
    join_into(out, container.type_chain, '.');
    out += "|" + container.method_signature + "|" + block_type + "|" + parent_signature + "|" + hex64(body_hash);
    return out;
}

bool BlockIdentifier::same_element(const BlockIdentifier& other) const {
    return container == other.container && block_type == other.block_type &&
           parent_signature == other.parent_signature && body_hash == other.body_hash;
}

std::string parent_signature(const StatementNode& block) {
    const StatementNode* p = block.parent;
    if (!p) return "";
    std::string prefix = p->parent ? parent_signature(*p) : std::string();
    std::string label = p->parent ? p->block_type() : std::string("body");
    return prefix + "/" + label + "[" + std::to_string(block.index_in_parent) + "]";
}

BlockIdentifier block_identifier(const StatementNode& block, const MethodDeclarationInfo& method,
                                 const std::string& commit) {
    BlockIdentifier id;
    id.version = commit;
    if (method.container) {
        const auto& t = *method.container;
        id.container.source_folder = t.source_folder;
        id.container.package = t.package;
        id.container.type_chain = t.nesting_chain;
        id.container.type_chain.push_back(t.name);
        id.path = t.path;
    }
    id.container.method_signature = method.signature();
    id.block_type = block.block_type();
    id.parent_signature = parent_signature(block);
    id.body_hash = block.body_hash;
    id.start_line = block.start_line;
    id.end_line = block.end_line;
    return id;
}

// ---- location ----

namespace {

const StatementNode* root_of(const StatementNode& n) {
    const StatementNode* r = &n;
    while (r->parent) r = r->parent;
    return r;
}

bool is_locatable(const StatementNode& n) {
    return n.parent && (is_trackable(n.kind) || (n.is_leaf() && n.is_pipeline));
}

}  // namespace

std::vector<BlockLocation> blocks_at_line(const SourceModel& model, const std::string& path, int line) {
    std::vector<BlockLocation> out;
    const auto* unit = model.file(path);
    if (!unit) return out;
    for (const auto& t : unit->types) {
        for (const auto& m : t.methods) {
            if (!m.body || line < m.start_line || line > m.end_line) continue;
            for (const auto* n : m.body->preorder()) {
                if (n->start_line == line && is_locatable(*n)) out.push_back({n, &m, &t});
            }
        }
    }
    return out;
}

BlockLocation locate_block(const SourceModel& model, const std::string& path, const std::string& block_type,
                           int start_line) {
    if (!model.file(path)) throw CodeElementNotFound("file not in model: " + path);
    for (const auto& loc : blocks_at_line(model, path, start_line)) {
        if (loc.block->block_type() == block_type) return loc;
    }
    throw CodeElementNotFound("no " + block_type + " block starts at " + path + ":" + std::to_string(start_line));
}

std::optional<BlockLocation> owner_of(const SourceModel& model, const StatementNode& block) {
    const auto* root = root_of(block);
    for (const auto* t : model.types()) {
        for (const auto& m : t->methods) {
            if (m.body.get() == root) return BlockLocation{&block, &m, t};
        }
    }
    return std::nullopt;
}

SourceModel build_partial_model(const gitio::Repository& repo, const gitio::CommitRef& commit,
                                const std::set<std::string>& paths) {
    SourceModel model;
    model.commit = commit.id;
    for (const auto& path : paths) {
        std::optional<std::string> text;
        try {
            text = repo.read_file(commit, path);
        } catch (const gitio::DecodeError& e) {
            throw gitio::DecodeError(path + ": " + e.what());
        }
        if (!text) throw gitio::UnknownPath(path, commit.id);
        model.files.emplace(path, parse_file(*text, path));
    }
    return model;
}

}  // namespace blocktrace::srcmodel
