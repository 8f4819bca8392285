#pragma once

#include "blocktrace/error.hpp"
#include "blocktrace/gitio.hpp"
#include "blocktrace/srcmodel.hpp"
#include "blocktrace/stmtmap.hpp"

#include <filesystem>
#include <set>
#include <string>
#include <vector>

namespace blocktrace::refdetect {

using srcmodel::MethodDeclarationInfo;
using srcmodel::SourceModel;
using srcmodel::StatementNode;
using srcmodel::TypeDeclarationInfo;

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Thresholds and text patterns. Patterns are ECMAScript regular expressions;
/// `{type}` and `{method}` are replaced by the escaped simple type or method name.
struct Config {
    /// Class rename requires more than this fraction of the smaller member set matched.
    double class_member_overlap{0.5};
    /// Signature-changed and moved methods require a match score above this.
    double method_match_score{0.5};
    /// Extracted/inlined/merged/split fragments must cover at least this
    /// fraction of the new (or removed) method's statements.
    double fragment_coverage{0.5};
    bool prune_identical_methods{true};

    std::string deprecated_method_pattern{R"(@deprecated[\s\S]{0,300}?\{@link\s+[\w.]*#{method}\s*[(}])"};
    std::string deprecated_type_pattern{R"(@deprecated[\s\S]{0,300}?\b{type}\b)"};
    std::string same_type_pattern{R"(\b(class|interface|enum|record)\s+{type}\b)"};
    std::string instantiation_pattern{R"(\bnew\s+{type}\s*(<[^>]*>)?\s*\()"};
    std::string subtype_pattern{R"(\b(class|interface)\s+\w+\b[^{]*?\b(extends|implements)\b[^{]*?\b{type}\b)"};
    /// Qualified call of the tracked method; pulls in the caller of an extract-and-move.
    std::string caller_pattern{R"(\.\s*{method}\s*\()"};

    stmtmap::MapperOptions mapper;
};

/// Reads `key = value` lines; blank lines and lines starting with '#' are
/// ignored. Unknown keys and malformed values throw ConfigError.
Config parse_config(std::string_view text);
Config load_config(const std::filesystem::path& path);

enum class PairingKind {
    identical_signature,
    signature_changed,
    extracted,
    inlined,
    merged,
    split,
    moved,
    pulled_up,
    pushed_down,
    extracted_and_moved,
};

std::string to_string(PairingKind kind);

struct MethodPairing {
    PairingKind kind{PairingKind::identical_signature};
    std::vector<const MethodDeclarationInfo*> left;
    std::vector<const MethodDeclarationInfo*> right;
    /// Statements of the left side (whole bodies, or the moved fragment for
    /// extract/inline) mapped to the right side.
    stmtmap::MappingSet mapping;
    double score{0};

    bool involves_right(const MethodDeclarationInfo* m) const;
    bool involves_left(const MethodDeclarationInfo* m) const;
};

using PruneSet = std::set<const MethodDeclarationInfo*>;

/// Matched statement pairs divided by the larger node count; identical
/// empty bodies score 1.
double match_score(const MethodDeclarationInfo& left, const MethodDeclarationInfo& right,
                   const stmtmap::MappingSet& mapping);

/// Identical-signature pairs first, then the best scoring combinations of
/// the leftovers (signature-changed).
std::vector<MethodPairing> match_methods(const TypeDeclarationInfo& left, const TypeDeclarationInfo& right,
                                         const Config& config = {}, const PruneSet* pruned = nullptr);

/// Methods of one side not consumed by any pairing.
std::vector<const MethodDeclarationInfo*> unpaired_left(const TypeDeclarationInfo& left,
                                                        const std::vector<MethodPairing>& pairings,
                                                        const PruneSet* pruned = nullptr);
std::vector<const MethodDeclarationInfo*> unpaired_right(const TypeDeclarationInfo& right,
                                                         const std::vector<MethodPairing>& pairings,
                                                         const PruneSet* pruned = nullptr);

/// Extract/inline/merge/split among the types of one file pair. Merged and
/// split pairings replace signature-changed pairings they absorb.
std::vector<MethodPairing> detect_intra_file(const std::vector<const TypeDeclarationInfo*>& left_types,
                                             const std::vector<const TypeDeclarationInfo*>& right_types,
                                             std::vector<MethodPairing>& pairings, const Config& config = {},
                                             const PruneSet* pruned = nullptr);

/// Convenience: match_methods on same-key types plus detect_intra_file for one file pair.
std::vector<MethodPairing> diff_file(const srcmodel::CompilationUnit* left, const srcmodel::CompilationUnit* right,
                                     const Config& config = {}, const PruneSet* pruned = nullptr);

enum class ClassPairingKind { moved, renamed, extracted, merged, split };

std::string to_string(ClassPairingKind kind);

struct ClassPairing {
    ClassPairingKind kind{ClassPairingKind::moved};
    std::vector<const TypeDeclarationInfo*> left;
    std::vector<const TypeDeclarationInfo*> right;
    /// Method pairings between the paired types' members.
    std::vector<MethodPairing> methods;
};

std::vector<ClassPairing> detect_class_level(const SourceModel& left, const SourceModel& right,
                                             const Config& config = {}, const PruneSet* pruned = nullptr);

/// Move/pull-up/push-down/extract-and-move between files, over methods not
/// already explained by same-key types or class pairings.
std::vector<MethodPairing> detect_inter_file(const SourceModel& left, const SourceModel& right,
                                             const std::vector<ClassPairing>& classes, const Config& config = {},
                                             const PruneSet* pruned = nullptr);

struct AugmentTarget {
    std::string type_name;  // simple name of the container type at r
    std::string package;
    std::string method_name;
};

struct AugmentedModels {
    SourceModel right;  // commit r
    SourceModel left;   // commit p
    /// Methods removed from both models (identical across same-path files).
    PruneSet pruned;
    /// Files added to the r side by the text heuristics.
    std::vector<std::string> heuristic_files;
    /// p-side files dropped as unchanged or comment/import-only changes.
    std::vector<std::string> excluded_files;
    std::vector<std::string> diagnostics;
};

AugmentedModels augment_models(const gitio::Repository& repo, const gitio::CommitRef& r, const gitio::CommitRef& p,
                               const std::set<std::string>& base_right_paths, const AugmentTarget& target,
                               const Config& config = {});

/// The text heuristics on their own: which of `candidates` (path, text at r)
/// qualify for inclusion in the r-side model.
std::vector<std::string> heuristic_matches(const std::vector<std::pair<std::string, std::string>>& candidates,
                                           const AugmentTarget& target, const Config& config = {});

enum class BodyRefactoringKind {
    replace_loop_with_pipeline,
    replace_pipeline_with_loop,
    invert_condition,
    split_conditional,
    merge_conditional,
    merge_catch,
};

std::string to_string(BodyRefactoringKind kind);

struct BodyRefactoring {
    BodyRefactoringKind kind;
    std::vector<const StatementNode*> left;
    std::vector<const StatementNode*> right;
};

std::vector<BodyRefactoring> detect_body_refactorings(const stmtmap::MappingSet& mapping);
std::vector<BodyRefactoring> detect_body_refactorings(const MethodPairing& pairing);

/// Unmatched nodes whose parent is matched (or the method root): the
/// statements a fragment search starts from.
std::vector<const StatementNode*> unmatched_roots(const std::vector<const StatementNode*>& unmatched);

}  // namespace blocktrace::refdetect
