#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "coherent/common.hpp"

namespace coherent {

using ClassId = std::uint32_t;

/// Ordered set of class identifiers with dense indices 0..L-1.
class ClassTable {
public:
    ClassTable() = default;
    explicit ClassTable(const std::vector<std::string>& names);

    /// Returns the index of `name`, appending it if unseen.
    ClassId intern(std::string_view name);
    std::optional<ClassId> find(std::string_view name) const;
    /// Throws SemanticError for unknown names.
    ClassId at(std::string_view name) const;

    const std::string& name(ClassId id) const { return names_.at(id); }
    const std::vector<std::string>& names() const noexcept { return names_; }
    std::size_t size() const noexcept { return names_.size(); }

    static bool valid_identifier(std::string_view name);

    friend bool operator==(const ClassTable& a, const ClassTable& b) { return a.names_ == b.names_; }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, ClassId> index_;
};

/// A normal rule `body_pos, !body_neg -> head`. Bodies are sorted and duplicate-free.
struct Rule {
    ClassId head = 0;
    std::vector<ClassId> body_pos;
    std::vector<ClassId> body_neg;

    Rule() = default;
    Rule(ClassId head, std::vector<ClassId> pos, std::vector<ClassId> neg = {});

    bool is_fact() const noexcept { return body_pos.empty() && body_neg.empty(); }
    bool is_definite() const noexcept { return body_neg.empty(); }
    /// True when some class occurs both positively and negatively.
    bool is_contradictory() const;

    friend bool operator==(const Rule&, const Rule&) = default;
    friend auto operator<=>(const Rule&, const Rule&) = default;
};

struct RuleHash {
    std::size_t operator()(const Rule& r) const noexcept;
};

/// Set of constraints over a class table. Rules keep insertion order.
class RuleSet {
public:
    RuleSet() = default;
    explicit RuleSet(ClassTable classes) : classes_(std::move(classes)) {}

    /// Appends a rule; throws SemanticError on duplicates or unknown classes.
    void add(Rule rule);

    const ClassTable& classes() const noexcept { return classes_; }
    ClassTable& classes() noexcept { return classes_; }
    const std::vector<Rule>& rules() const noexcept { return rules_; }
    std::size_t size() const noexcept { return rules_.size(); }
    bool empty() const noexcept { return rules_.empty(); }

    bool all_definite() const;
    /// Every rule is `B -> A` with a single positive body atom.
    bool is_hierarchy() const;

    std::string format_rule(const Rule& r) const;

    friend bool operator==(const RuleSet& a, const RuleSet& b) {
        return a.classes_ == b.classes_ && a.rules_ == b.rules_;
    }

private:
    ClassTable classes_;
    std::vector<Rule> rules_;
};

/// Parses the line-oriented rule language:
///
///     # comment
///     class: A, B          (optional declarations, fixes class order)
///     A1, A2, !A3 -> A     (rule)
///     -> A                 (fact)
RuleSet parse_rules(std::string_view text);

/// Canonical text form: one `class:` declaration line followed by one rule per line.
std::string serialize_rules(const RuleSet& rs);

/// One `child -> parent` rule per edge. Throws SemanticError if the edges contain a cycle.
RuleSet hierarchy_to_rules(const std::vector<std::pair<std::string, std::string>>& edges);

/// Parses `CHILD < PARENT` lines (`#` comments, blank lines ignored).
std::vector<std::pair<std::string, std::string>> parse_hierarchy(std::string_view text);

/// Reads a rule file, or a hierarchy listing (`CHILD < PARENT` lines, no `->`).
RuleSet load_rules_file(const std::string& path);
std::string read_text_file(const std::string& path);

}  // namespace coherent
