#pragma once

#include "blocktrace/refdetect.hpp"

#include <optional>

namespace blocktrace::refdetect::detail {

std::vector<const StatementNode*> body_nodes(const MethodDeclarationInfo& m);
std::vector<const StatementNode*> body_roots(const MethodDeclarationInfo& m);
stmtmap::MappingSet identity_mapping(const MethodDeclarationInfo& l, const MethodDeclarationInfo& r);
stmtmap::MappingSet map_methods(const MethodDeclarationInfo& l, const MethodDeclarationInfo& r, const Config& config);
std::size_t matched_left(const stmtmap::MappingSet& m);
std::size_t matched_right(const stmtmap::MappingSet& m);
bool calls(const MethodDeclarationInfo& caller, const std::string& name);
double coverage(const std::vector<const StatementNode*>& side, const stmtmap::MappingSet& m, bool left_side);
std::optional<stmtmap::MappingSet> try_map(const std::vector<const StatementNode*>& l,
                                           const std::vector<const StatementNode*>& r, const Config& config);
bool anyone_calls(const std::vector<const MethodDeclarationInfo*>& callers, const MethodDeclarationInfo& target);

std::vector<const MethodDeclarationInfo*> methods_of(const TypeDeclarationInfo& t, const PruneSet* pruned);

/// Identical signatures first; with `phase_two`, best-scoring leftovers after.
std::vector<MethodPairing> pair_methods(const std::vector<const MethodDeclarationInfo*>& lefts,
                                        const std::vector<const MethodDeclarationInfo*>& rights, const Config& config,
                                        bool phase_two);

/// Merge/split/extract(/inline) search over the free methods; updates the
/// free lists and drops absorbed signature-changed pairings.
std::vector<MethodPairing> fragment_pairings(std::vector<MethodPairing>& pairings,
                                             std::vector<const MethodDeclarationInfo*>& free_left,
                                             std::vector<const MethodDeclarationInfo*>& free_right,
                                             const std::vector<const MethodDeclarationInfo*>& all_left,
                                             const std::vector<const MethodDeclarationInfo*>& all_right,
                                             const Config& config, PairingKind extract_kind);

}  // namespace blocktrace::refdetect::detail
