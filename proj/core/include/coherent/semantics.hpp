#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "coherent/rules.hpp"

namespace coherent {

/// Subset of the class table.
class ClassSet {
public:
    ClassSet() = default;
    explicit ClassSet(std::size_t num_classes) : bits_(num_classes, false) {}
    ClassSet(std::size_t num_classes, std::initializer_list<ClassId> members);

    /// Classes whose score is strictly above `threshold`.
    static ClassSet from_scores(std::span<const double> scores, double threshold = 0.5);

    std::size_t universe() const noexcept { return bits_.size(); }
    bool contains(ClassId c) const { return bits_.at(c); }
    void insert(ClassId c) { bits_.at(c) = true; }
    void erase(ClassId c) { bits_.at(c) = false; }
    std::size_t count() const;
    std::vector<ClassId> members() const;
    bool subset_of(const ClassSet& other) const;

    std::string to_string(const ClassTable& classes) const;

    friend bool operator==(const ClassSet&, const ClassSet&) = default;

private:
    std::vector<bool> bits_;
};

/// Indices of rules whose body holds in `predicted` while the head is missing.
std::vector<std::size_t> check_logical_violation(const RuleSet& rs, const ClassSet& predicted);

bool is_coherent(const RuleSet& rs, const ClassSet& m);

/// Indices of rules with min(body values) > head score, where a negative
/// literal's value is 1 - score and an empty body has value 1.
std::vector<std::size_t> check_constraint_violation(const RuleSet& rs, std::span<const double> scores);

/// Every class of `m` is in `base` or heads a rule whose body holds in `m`.
bool check_supported(const RuleSet& rs, const ClassSet& base, const ClassSet& m);

/// No coherent m' with base ⊆ m' ⊊ m exists. Exhaustive; at most
/// kMaxMinimalityFree classes of m may lie outside base.
inline constexpr std::size_t kMaxMinimalityFree = 20;
bool check_minimal(const RuleSet& rs, const ClassSet& base, const ClassSet& m);

/// Definite program obtained by deleting rules with a negated atom in `m`
/// and dropping the remaining negative literals.
RuleSet reduct(const RuleSet& rs, const ClassSet& m);

/// Least superset of `start` closed under the definite rules of `rs`
/// (negative literals are ignored).
ClassSet least_closure(const RuleSet& rs, const ClassSet& start);

/// Stable model of rs ∪ {-> A : A ∈ base}, computed stratum by stratum.
/// Throws NotStratifiedError for non-stratified rule sets.
ClassSet stable_model(const RuleSet& rs, const ClassSet& base);

/// Fixed-point test: m equals the least model of the reduct of rs ∪ facts(base) relative to m.
bool is_stable_model(const RuleSet& rs, const ClassSet& base, const ClassSet& m);

}  // namespace coherent
