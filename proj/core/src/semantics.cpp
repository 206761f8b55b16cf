#include "coherent/semantics.hpp"

#include <algorithm>

#include "coherent/strata.hpp"

namespace coherent {

ClassSet::ClassSet(std::size_t num_classes, std::initializer_list<ClassId> members) : bits_(num_classes, false) {
    for (auto c : members) insert(c);
}

ClassSet ClassSet::from_scores(std::span<const double> scores, double threshold) {
    ClassSet s(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i)
        if (scores[i] > threshold) s.insert(static_cast<ClassId>(i));
    return s;
}

std::size_t ClassSet::count() const { return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), true)); }

std::vector<ClassId> ClassSet::members() const {
    std::vector<ClassId> out;
    for (std::size_t i = 0; i < bits_.size(); ++i)
        if (bits_[i]) out.push_back(static_cast<ClassId>(i));
    return out;
}

bool ClassSet::subset_of(const ClassSet& other) const {
    if (other.bits_.size() != bits_.size()) throw DimensionError("class sets over different universes");
    for (std::size_t i = 0; i < bits_.size(); ++i)
        if (bits_[i] && !other.bits_[i]) return false;
    return true;
}

std::string ClassSet::to_string(const ClassTable& classes) const {
    std::string out = "{";
    for (auto c : members()) {
        if (out.size() > 1) out += ", ";
        out += classes.name(c);
    }
    return out + "}";
}

namespace {

void check_universe(const RuleSet& rs, const ClassSet& s) {
    if (s.universe() != rs.classes().size()) throw DimensionError("class set size differs from the class table");
}

bool body_holds(const Rule& r, const ClassSet& m) {
    return std::all_of(r.body_pos.begin(), r.body_pos.end(), [&](ClassId c) { return m.contains(c); }) &&
           std::none_of(r.body_neg.begin(), r.body_neg.end(), [&](ClassId c) { return m.contains(c); });
}

}  // namespace

std::vector<std::size_t> check_logical_violation(const RuleSet& rs, const ClassSet& predicted) {
    check_universe(rs, predicted);
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < rs.rules().size(); ++j) {
        const auto& r = rs.rules()[j];
        if (body_holds(r, predicted) && !predicted.contains(r.head)) out.push_back(j);
    }
    return out;
}

bool is_coherent(const RuleSet& rs, const ClassSet& m) { return check_logical_violation(rs, m).empty(); }

std::vector<std::size_t> check_constraint_violation(const RuleSet& rs, std::span<const double> scores) {
    if (scores.size() != rs.classes().size()) throw DimensionError("score vector size differs from the class table");
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < rs.rules().size(); ++j) {
        const auto& r = rs.rules()[j];
        double v = 1.0;
        for (auto c : r.body_pos) v = std::min(v, scores[c]);
        for (auto c : r.body_neg) v = std::min(v, 1.0 - scores[c]);
        if (v > scores[r.head]) out.push_back(j);
    }
    return out;
}

bool check_supported(const RuleSet& rs, const ClassSet& base, const ClassSet& m) {
    check_universe(rs, base);
    check_universe(rs, m);
    for (auto c : m.members()) {
        if (base.contains(c)) continue;
        bool supported = false;
        for (const auto& r : rs.rules()) {
            if (r.head == c && body_holds(r, m)) {
                supported = true;
                break;
            }
        }
        if (!supported) return false;
    }
    return true;
}

bool check_minimal(const RuleSet& rs, const ClassSet& base, const ClassSet& m) {
    check_universe(rs, base);
    check_universe(rs, m);
    if (!base.subset_of(m)) return false;
    std::vector<ClassId> free;
    for (auto c : m.members())
        if (!base.contains(c)) free.push_back(c);
    if (free.size() > kMaxMinimalityFree) {
        throw DimensionError("minimality check limited to " + std::to_string(kMaxMinimalityFree) + " free classes");
    }
    const std::uint64_t full = (std::uint64_t{1} << free.size()) - 1;
    for (std::uint64_t mask = 0; mask < full; ++mask) {
        ClassSet cand = base;
        for (std::size_t i = 0; i < free.size(); ++i)
            if (mask >> i & 1u) cand.insert(free[i]);
        if (is_coherent(rs, cand)) return false;
    }
    return true;
}

RuleSet reduct(const RuleSet& rs, const ClassSet& m) {
    check_universe(rs, m);
    RuleSet out(rs.classes());
    for (const auto& r : rs.rules()) {
        if (std::any_of(r.body_neg.begin(), r.body_neg.end(), [&](ClassId c) { return m.contains(c); })) continue;
        Rule d(r.head, r.body_pos);
        // Distinct normal rules can share a reduct.
        if (std::find(out.rules().begin(), out.rules().end(), d) == out.rules().end()) out.add(std::move(d));
    }
    return out;
}

ClassSet least_closure(const RuleSet& rs, const ClassSet& start) {
    check_universe(rs, start);
    ClassSet m = start;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& r : rs.rules()) {
            if (m.contains(r.head)) continue;
            if (std::all_of(r.body_pos.begin(), r.body_pos.end(), [&](ClassId c) { return m.contains(c); })) {
                m.insert(r.head);
                changed = true;
            }
        }
    }
    return m;
}

ClassSet stable_model(const RuleSet& rs, const ClassSet& base) {
    check_universe(rs, base);
    const auto strat = comp_strata(rs);
    ClassSet m = base;
    for (const auto& idx : strat.strata_rules) {
        // Negative atoms of this stratum refer to earlier strata, already final in m.
        RuleSet layer(rs.classes());
        for (auto j : idx) {
            const auto& r = rs.rules()[j];
            if (std::any_of(r.body_neg.begin(), r.body_neg.end(), [&](ClassId c) { return m.contains(c); })) continue;
            Rule d(r.head, r.body_pos);
            if (std::find(layer.rules().begin(), layer.rules().end(), d) == layer.rules().end()) layer.add(d);
        }
        m = least_closure(layer, m);
    }
    return m;
}

bool is_stable_model(const RuleSet& rs, const ClassSet& base, const ClassSet& m) {
    return least_closure(reduct(rs, m), base) == m;
}

}  // namespace coherent
