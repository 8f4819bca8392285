#pragma once

#include "blocktrace/error.hpp"
#include "blocktrace/srcmodel.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace blocktrace::stmtmap {

using srcmodel::StatementNode;

enum class ReplacementKind { identifier, literal, type, method_call, expression };

std::string to_string(ReplacementKind kind);

struct Replacement {
    std::string before;
    std::string after;
    ReplacementKind kind{ReplacementKind::identifier};

    bool operator==(const Replacement&) const = default;
};

enum class TransformationKind {
    if_else_if_to_switch,
    if_to_while,
    iterator_while_to_enhanced_for,
    for_to_while,
    for_to_pipeline,
    for_to_if,
    try_to_try_with_resources,
    try_to_synchronized,
    catch_to_finally,
};

enum class Direction { forward, inverse };

struct BlockTransformation {
    TransformationKind kind;
    Direction direction{Direction::forward};

    /// e.g. "if-else-if to switch" or, inverse, "switch to if-else-if".
    std::string label() const;
    bool operator==(const BlockTransformation&) const = default;
};

struct StatementMapping {
    const StatementNode* left{nullptr};
    const StatementNode* right{nullptr};
    std::vector<Replacement> replacements;
    std::optional<BlockTransformation> transformation;

    bool exact() const { return left->text == right->text; }
};

/// One node corresponding to several nodes on the other side (merge or split).
struct MultiMapping {
    std::vector<const StatementNode*> left;
    std::vector<const StatementNode*> right;
    /// The plain pair the assignment chose before the group was recognized.
    const StatementNode* primary_left{nullptr};
    const StatementNode* primary_right{nullptr};
};

class MappingSet {
public:
    std::vector<StatementMapping> mappings;
    std::vector<const StatementNode*> unmatched_left;
    std::vector<const StatementNode*> unmatched_right;
    std::vector<MultiMapping> multi;

    const StatementMapping* for_left(const StatementNode* n) const;
    const StatementMapping* for_right(const StatementNode* n) const;
    const MultiMapping* multi_for_left(const StatementNode* n) const;
    const MultiMapping* multi_for_right(const StatementNode* n) const;
    /// Partner of a node, looking at plain mappings and multi groups (primary pair).
    const StatementNode* partner_of_left(const StatementNode* n) const;
    const StatementNode* partner_of_right(const StatementNode* n) const;

    std::size_t total_replacements() const;
    /// Multi groups collapsed back to their primary pair.
    MappingSet one_to_one() const;
    /// Rebuilds lookup indexes; call after editing the vectors by hand.
    void reindex();

private:
    std::unordered_map<const StatementNode*, std::size_t> by_left_;
    std::unordered_map<const StatementNode*, std::size_t> by_right_;
};

class SizeLimit : public Error {
public:
    using Error::Error;
};

struct MapperOptions {
    std::size_t size_limit{20000};
    /// Names of methods known to be extracted from / inlined into the mapped
    /// bodies. A block whose body calls one of them may match without child
    /// pairs.
    std::set<std::string> bridging_calls;
    /// Cap on relaxation solves in the branch-and-bound search.
    int search_budget{256};
};

/// Lexicographic cost: unmatched nodes, replacements, child-ratio penalty,
/// parent-context penalty, line distance, order distance.
using Cost = std::array<std::int64_t, 6>;

struct PairEvaluation {
    Cost cost{};
    std::vector<Replacement> replacements;
    std::optional<BlockTransformation> transformation;
    /// True when the pair is valid on its own (leaf pair, identical non-empty
    /// expressions, a transformation, or bridging-call evidence); false when it
    /// needs at least one matched descendant pair.
    bool self_valid{false};
};

/// Context shared by pair evaluation: line bases of the two bodies.
struct PairContext {
    int left_base_line{0};
    int right_base_line{0};
    const MapperOptions* options{nullptr};
};

/// Cost and admissibility of matching `l` with `r`, ignoring the rest of the
/// assignment; nullopt when the two can never be paired.
std::optional<PairEvaluation> evaluate_pair(const StatementNode& l, const StatementNode& r, const PairContext& ctx);

/// Token-level replacements turning `a` into `b`; nullopt when less than half
/// the tokens align or the statements differ in their leading keyword.
std::optional<std::vector<Replacement>> token_replacements(const std::vector<srcmodel::Token>& a,
                                                           const std::vector<srcmodel::Token>& b);

std::optional<std::vector<Replacement>> leaf_replacements(const StatementNode& l, const StatementNode& r);

/// Replacements between the expression lists of two composites; unalignable
/// expressions count as one whole-expression replacement.
std::vector<Replacement> expression_replacements(const StatementNode& l, const StatementNode& r);

/// Some leaf under `l` pairs, exactly or through replacements, with a leaf under `r`.
bool bodies_overlap(const StatementNode& l, const StatementNode& r);

std::optional<BlockTransformation> detect_transformation(const StatementNode& l, const StatementNode& r);

/// Matched pairs below (l, r) divided by the larger direct child count.
double child_match_ratio(const StatementNode& l, const StatementNode& r, const MappingSet& m);

/// Maps every node of the left subtrees to the right subtrees. Roots are the
/// statements themselves (not their parents).
MappingSet map_statements(const std::vector<const StatementNode*>& left_roots,
                          const std::vector<const StatementNode*>& right_roots, const MapperOptions& options = {});

MappingSet map_bodies(const srcmodel::MethodDeclarationInfo& left, const srcmodel::MethodDeclarationInfo& right,
                      const MapperOptions& options = {});

/// Objective value used for optimality comparisons: (unmatched nodes, total replacements).
std::pair<std::size_t, std::size_t> objective(const MappingSet& m);

}  // namespace blocktrace::stmtmap
