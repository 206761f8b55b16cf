#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "coherent/rules.hpp"

namespace coherent {

/// Dependency graph of a rule set: an edge b -> head for every body atom b,
/// positive or negative according to the literal. Edge lists are sorted and unique.
struct DependencyGraph {
    std::size_t num_nodes = 0;
    std::vector<std::pair<ClassId, ClassId>> pos_edges;
    std::vector<std::pair<ClassId, ClassId>> neg_edges;
};

DependencyGraph build_dependency_graph(const RuleSet& rs);

/// Outcome of the stratifiability test. When `stratified` is false, `cycle`
/// holds a closed walk c0 -> c1 -> ... -> c0 (first node repeated at the end)
/// whose first edge is negative.
struct StratificationCheck {
    bool stratified = true;
    std::vector<ClassId> cycle;
};

StratificationCheck check_stratified(const DependencyGraph& g);

class NotStratifiedError : public SemanticError {
public:
    NotStratifiedError(const std::string& msg, std::vector<ClassId> cycle)
        : SemanticError(msg), cycle_(std::move(cycle)) {}
    const std::vector<ClassId>& cycle() const noexcept { return cycle_; }

private:
    std::vector<ClassId> cycle_;
};

/// Strongly connected components in a deterministic order: components are
/// numbered in the order Tarjan's algorithm completes them, starting the
/// search from the lowest unvisited class and visiting successors ascending.
/// Completion order is a reverse topological order of the condensation.
struct SccResult {
    std::vector<std::uint32_t> component;  // class -> component id
    std::size_t count = 0;
};

SccResult strongly_connected_components(const DependencyGraph& g);

/// Strata assignment produced by CompStrata. Strata are numbered 1..num_strata;
/// `strata_rules[i - 1]` lists indices into the rule set of the rules whose
/// head lies in stratum i, in rule-set order.
struct Stratification {
    std::size_t num_strata = 1;
    std::vector<std::uint32_t> class_stratum;
    std::vector<std::vector<std::size_t>> strata_rules;
};

/// Throws NotStratifiedError carrying a witness cycle.
Stratification comp_strata(const RuleSet& rs);

struct ClosureOptions {
    std::size_t max_rules = 1'000'000;
};

/// Intra-stratum closure of stratum `stratum` (1-based). Original rules come
/// first, followed by generated rules in generation order. Rules whose head
/// occurs in their positive body are dropped, as are rules whose body strictly
/// contains the body of a same-head rule of the stratum. Contradictory bodies
/// are kept. Throws SemanticError when the closure exceeds `opts.max_rules`.
RuleSet close_stratum(const RuleSet& rs, const Stratification& strat, std::size_t stratum,
                      const ClosureOptions& opts = {});

/// True if `a`'s body (both polarities) is a subset of `b`'s body.
bool body_subset(const Rule& a, const Rule& b);

}  // namespace coherent
