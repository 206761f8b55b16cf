#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coherent/common.hpp"
#include "coherent/rules.hpp"
#include "coherent/strata.hpp"

namespace coherent {

/// Sparse, evaluation-friendly layout of one stratum's closed rules.
/// Rules are grouped by head (heads ascending); within a head they keep their
/// order in the closed rule list. Literals of a rule are its positive atoms
/// ascending followed by its negative atoms ascending.
struct StratumLayout {
    std::vector<ClassId> heads;
    std::vector<std::uint32_t> head_begin;  // heads.size() + 1 offsets into `rules`
    std::vector<std::uint32_t> rules;       // indices into the closed rule list
    std::vector<std::uint32_t> lit_begin;   // closed-rule index -> offset, size p + 1
    std::vector<ClassId> lit_class;
    std::vector<std::uint8_t> lit_neg;
};

/// Compiled constraint module: the closed rule sets of every stratum plus the
/// derived matrices. Immutable after construction.
class ConstraintCircuit {
public:
    ConstraintCircuit() = default;
    /// `strata[i]` is the closed rule list of stratum i + 1.
    ConstraintCircuit(ClassTable classes, std::vector<std::uint32_t> class_stratum,
                      std::vector<std::vector<Rule>> strata,
                      std::optional<std::vector<std::pair<ClassId, ClassId>>> hierarchy_edges = std::nullopt);

    const ClassTable& classes() const noexcept { return classes_; }
    std::size_t num_classes() const noexcept { return classes_.size(); }
    std::size_t num_strata() const noexcept { return strata_.size(); }
    const std::vector<std::uint32_t>& class_stratum() const noexcept { return class_stratum_; }

    /// Closed rules of stratum k (0-based).
    const std::vector<Rule>& stratum_rules(std::size_t k) const { return strata_.at(k); }
    const StratumLayout& layout(std::size_t k) const { return layouts_.at(k); }
    std::size_t total_rules() const;

    /// p_k x L indicator of positive / negative bodies.
    Matrix body_pos_matrix(std::size_t k) const;
    Matrix body_neg_matrix(std::size_t k) const;
    /// L x p_k head incidence: (c, j) = 1 iff class c is the head of rule j.
    Matrix head_matrix(std::size_t k) const;

    /// Present when the source rules form a class hierarchy (every rule `B -> A`).
    bool is_hierarchy() const noexcept { return hierarchy_edges_.has_value(); }
    const std::vector<std::pair<ClassId, ClassId>>& hierarchy_edges() const;
    /// L x L, entry (i, j) = 1 iff class j is a (reflexive, transitive) subclass of class i.
    const Matrix& descendant_mask() const;

    bool all_definite() const;

    friend bool operator==(const ConstraintCircuit& a, const ConstraintCircuit& b) {
        return a.classes_ == b.classes_ && a.class_stratum_ == b.class_stratum_ && a.strata_ == b.strata_ &&
               a.hierarchy_edges_ == b.hierarchy_edges_;
    }

private:
    ClassTable classes_;
    std::vector<std::uint32_t> class_stratum_;
    std::vector<std::vector<Rule>> strata_;
    std::vector<StratumLayout> layouts_;
    std::optional<std::vector<std::pair<ClassId, ClassId>>> hierarchy_edges_;
    Matrix descendants_;
};

ConstraintCircuit compile(const RuleSet& rs, const ClosureOptions& opts = {});

/// Reflexive-transitive subclass mask for `child -> parent` edges over L classes.
Matrix descendant_mask(std::size_t num_classes, const std::vector<std::pair<ClassId, ClassId>>& edges);

/// Versioned JSON document (format "coherent-circuit", version 1).
std::string circuit_to_json(const ConstraintCircuit& c);
ConstraintCircuit circuit_from_json(std::string_view text);

}  // namespace coherent
