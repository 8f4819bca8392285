#pragma once

#include "blocktrace/error.hpp"
#include "blocktrace/gitio.hpp"
#include "blocktrace/java_lexer.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace blocktrace::srcmodel {

enum class StatementKind {
    if_,
    for_,
    enhanced_for,
    while_,
    do_while,
    try_,
    catch_,
    finally_,
    switch_,
    synchronized_,
    block,
    leaf,
};

/// "if", "for", "enhanced-for", "while", "do-while", "try", "catch",
/// "finally", "switch", "synchronized", "block", "leaf".
std::string to_string(StatementKind kind);
std::optional<StatementKind> parse_statement_kind(std::string_view text);

/// The ten block kinds a user can track.
bool is_trackable(StatementKind kind);
const std::vector<StatementKind>& trackable_kinds();

class CodeElementNotFound : public Error {
public:
    using Error::Error;
};

class StatementNode {
public:
    StatementNode() = default;
    StatementNode(const StatementNode&) = delete;
    StatementNode& operator=(const StatementNode&) = delete;
    StatementNode(StatementNode&&) = default;
    StatementNode& operator=(StatementNode&&) = default;

    StatementKind kind{StatementKind::leaf};
    std::vector<std::string> expressions;
    std::vector<std::vector<Token>> expression_tokens;
    std::vector<StatementNode> children;
    /// For `if`: index of the first else-branch child, or -1 without else.
    int else_start{-1};
    int index_in_parent{0};
    int depth{0};
    int start_line{0};
    int end_line{0};
    const StatementNode* parent{nullptr};

    std::string text;       // normalized tokens of the whole statement
    std::uint64_t text_hash{0};
    std::string body_text;  // normalized tokens of the nested statements
    std::uint64_t body_hash{0};

    /// Leaves only: the statement's tokens.
    std::vector<Token> tokens;
    bool is_pipeline{false};    // leaf holding a stream/forEach call chain
    bool is_case_label{false};  // `case X:` / `default ->` inside a switch

    bool is_leaf() const noexcept { return kind == StatementKind::leaf; }
    bool is_composite() const noexcept { return kind != StatementKind::leaf; }

    /// Label used in identifiers and the wire format; pipeline leaves read "pipeline".
    std::string block_type() const;

    /// Catch and finally children of a try node.
    std::vector<const StatementNode*> handlers() const;
    /// Children excluding catch/finally nodes.
    std::vector<const StatementNode*> body_children() const;

    /// Pre-order visit of this node and all descendants.
    void visit(const std::function<void(const StatementNode&)>& fn) const;
    std::vector<const StatementNode*> preorder() const;
    std::size_t subtree_size() const;
    bool is_descendant_of(const StatementNode& ancestor) const;
};

class TypeDeclarationInfo;

class MethodDeclarationInfo {
public:
    std::string name;
    std::vector<std::string> parameter_types;
    std::vector<std::string> parameter_names;
    std::optional<std::string> return_type;  // absent for constructors
    std::vector<std::string> modifiers;
    std::vector<std::string> annotations;
    bool is_constructor{false};
    std::shared_ptr<const StatementNode> body;  // null for abstract/native
    std::uint64_t body_hash{0};
    std::string body_text;
    /// Normalized tokens of the full declaration, annotations included.
    std::string declaration_text;
    int start_line{0};
    int end_line{0};
    const TypeDeclarationInfo* container{nullptr};

    /// "name(T1,T2)", the overload key.
    std::string overload_key() const;
    /// "name(T1,T2):R", constructors omit ":R".
    std::string signature() const;
    bool same_signature(const MethodDeclarationInfo& other) const;

    /// Simple names of methods invoked in the body (`foo(` and `x.foo(`).
    std::set<std::string> called_names() const;
};

enum class TypeKind { class_, interface_, enum_, record_, annotation };

class TypeDeclarationInfo {
public:
    TypeDeclarationInfo() = default;
    TypeDeclarationInfo(const TypeDeclarationInfo&) = delete;
    TypeDeclarationInfo& operator=(const TypeDeclarationInfo&) = delete;
    TypeDeclarationInfo(TypeDeclarationInfo&&) = default;
    TypeDeclarationInfo& operator=(TypeDeclarationInfo&&) = default;

    std::string path;
    std::string source_folder;
    std::string package;
    std::string name;
    std::vector<std::string> nesting_chain;  // enclosing types, outermost first
    TypeKind kind{TypeKind::class_};
    std::vector<std::string> extends;     // simple names
    std::vector<std::string> implements;  // simple names
    std::vector<MethodDeclarationInfo> methods;
    std::vector<std::string> field_names;
    int start_line{0};
    int end_line{0};

    /// "Outer.Inner.Name"
    std::string type_chain() const;
    /// "pkg.Outer.Name" (no source folder)
    std::string qualified_name() const;
    /// source_folder + qualified_name; unique within one model.
    std::string key() const;

    const MethodDeclarationInfo* find_method(const std::string& overload_key) const;
};

struct CompilationUnit {
    std::string path;
    std::string package;
    std::vector<std::string> imports;
    std::vector<TypeDeclarationInfo> types;  // nested types flattened after their parents
};

/// Parses one Java file. Throws ParseError tagged with `path`.
std::shared_ptr<const CompilationUnit> parse_file(std::string_view text, const std::string& path);

/// Directory prefix preceding the package directories, or the full directory
/// when the path does not end with the package chain.
std::string source_folder_of(const std::string& path, const std::string& package);

class SourceModel {
public:
    std::string commit;
    std::map<std::string, std::shared_ptr<const CompilationUnit>> files;

    const CompilationUnit* file(const std::string& path) const;
    std::vector<const TypeDeclarationInfo*> types() const;
    const TypeDeclarationInfo* find_type(const std::string& key) const;
    std::size_t method_count() const;
};

struct ContainerChain {
    std::string source_folder;
    std::string package;
    std::vector<std::string> type_chain;
    std::string method_signature;

    bool operator==(const ContainerChain&) const = default;
};

struct BlockIdentifier {
    std::string version;
    ContainerChain container;
    std::string block_type;
    std::string parent_signature;
    std::uint64_t body_hash{0};
    // Not part of identity.
    std::string path;
    int start_line{0};
    int end_line{0};

    /// Identity without the version, e.g.
    /// "src/main/java|org.p.A|run(int):void|if|/body[2]/if[0]|<hash>".
    std::string key() const;
    bool same_element(const BlockIdentifier& other) const;
};

/// Recursive position string: "/body[i]" for method-body children, the
/// parent's own chain plus "/kind[i]" below that.
std::string parent_signature(const StatementNode& block);

BlockIdentifier block_identifier(const StatementNode& block, const MethodDeclarationInfo& method,
                                 const std::string& commit);

struct BlockLocation {
    const StatementNode* block{nullptr};
    const MethodDeclarationInfo* method{nullptr};
    const TypeDeclarationInfo* type{nullptr};
};

/// The unique block of `kind` (a block_type label such as "if" or
/// "pipeline") starting at `start_line` in `path`.
BlockLocation locate_block(const SourceModel& model, const std::string& path, const std::string& block_type,
                           int start_line);

/// Blocks starting on `line`, innermost last. Empty when the line holds none.
std::vector<BlockLocation> blocks_at_line(const SourceModel& model, const std::string& path, int line);

/// Finds the method in `model` whose body contains `block`.
std::optional<BlockLocation> owner_of(const SourceModel& model, const StatementNode& block);

/// Parses exactly the requested files at `commit`; parse errors carry the path.
SourceModel build_partial_model(const gitio::Repository& repo, const gitio::CommitRef& commit,
                                const std::set<std::string>& paths);

}  // namespace blocktrace::srcmodel
