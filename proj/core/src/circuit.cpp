#include "coherent/circuit.hpp"

#include <algorithm>
#include <numeric>

#include "json.hpp"

namespace coherent {

namespace {

StratumLayout make_layout(const std::vector<Rule>& rules) {
    StratumLayout lay;
    std::vector<std::uint32_t> order(rules.size());
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return rules[a].head < rules[b].head; });
    for (std::size_t i = 0; i < order.size(); ++i) {
        auto h = rules[order[i]].head;
        if (lay.heads.empty() || lay.heads.back() != h) {
            lay.heads.push_back(h);
            lay.head_begin.push_back(static_cast<std::uint32_t>(i));
        }
    }
    lay.head_begin.push_back(static_cast<std::uint32_t>(order.size()));
    lay.rules = std::move(order);

    lay.lit_begin.push_back(0);
    for (const auto& r : rules) {
        for (auto c : r.body_pos) {
            lay.lit_class.push_back(c);
            lay.lit_neg.push_back(0);
        }
        for (auto c : r.body_neg) {
            lay.lit_class.push_back(c);
            lay.lit_neg.push_back(1);
        }
        lay.lit_begin.push_back(static_cast<std::uint32_t>(lay.lit_class.size()));
    }
    return lay;
}

}  // namespace

Matrix descendant_mask(std::size_t num_classes, const std::vector<std::pair<ClassId, ClassId>>& edges) {
    std::vector<std::vector<ClassId>> children(num_classes);
    for (auto [c, p] : edges) {
        if (c >= num_classes || p >= num_classes) throw DimensionError("hierarchy edge outside class table");
        children[p].push_back(c);
    }
    Matrix m(num_classes, num_classes);
    for (std::size_t i = 0; i < num_classes; ++i) {
        std::vector<ClassId> todo{static_cast<ClassId>(i)};
        while (!todo.empty()) {
            auto x = todo.back();
            todo.pop_back();
            if (m(i, x) != 0.0) continue;
            m(i, x) = 1.0;
            for (auto c : children[x]) todo.push_back(c);
        }
    }
    return m;
}

ConstraintCircuit::ConstraintCircuit(ClassTable classes, std::vector<std::uint32_t> class_stratum,
                                     std::vector<std::vector<Rule>> strata,
                                     std::optional<std::vector<std::pair<ClassId, ClassId>>> hierarchy_edges)
    : classes_(std::move(classes)),
      class_stratum_(std::move(class_stratum)),
      strata_(std::move(strata)),
      hierarchy_edges_(std::move(hierarchy_edges)) {
    const auto L = classes_.size();
    if (class_stratum_.size() != L) throw DimensionError("class_stratum size differs from class count");
    if (strata_.empty()) strata_.emplace_back();
    std::vector<int> head_stratum(L, -1);
    for (std::size_t k = 0; k < strata_.size(); ++k) {
        for (const auto& r : strata_[k]) {
            auto in_range = [L](ClassId c) { return c < L; };
            if (!in_range(r.head) || !std::all_of(r.body_pos.begin(), r.body_pos.end(), in_range) ||
                !std::all_of(r.body_neg.begin(), r.body_neg.end(), in_range)) {
                throw DimensionError("circuit rule references a class outside the class table");
            }
            if (head_stratum[r.head] >= 0 && head_stratum[r.head] != static_cast<int>(k)) {
                throw SemanticError("class '" + classes_.name(r.head) + "' heads rules in two strata");
            }
            head_stratum[r.head] = static_cast<int>(k);
            // Bodies may only read values that are final before this stratum starts
            // or classes of this stratum that are read through their input value.
            for (auto c : r.body_neg) {
                if (class_stratum_[c] > k) throw SemanticError("negative body atom not in an earlier stratum");
            }
        }
        layouts_.push_back(make_layout(strata_[k]));
    }
    if (hierarchy_edges_) descendants_ = coherent::descendant_mask(L, *hierarchy_edges_);
}

std::size_t ConstraintCircuit::total_rules() const {
    std::size_t n = 0;
    for (const auto& s : strata_) n += s.size();
    return n;
}

Matrix ConstraintCircuit::body_pos_matrix(std::size_t k) const {
    const auto& rules = strata_.at(k);
    Matrix m(rules.size(), num_classes());
    for (std::size_t j = 0; j < rules.size(); ++j)
        for (auto c : rules[j].body_pos) m(j, c) = 1.0;
    return m;
}

Matrix ConstraintCircuit::body_neg_matrix(std::size_t k) const {
    const auto& rules = strata_.at(k);
    Matrix m(rules.size(), num_classes());
    for (std::size_t j = 0; j < rules.size(); ++j)
        for (auto c : rules[j].body_neg) m(j, c) = 1.0;
    return m;
}

Matrix ConstraintCircuit::head_matrix(std::size_t k) const {
    const auto& rules = strata_.at(k);
    Matrix m(num_classes(), rules.size());
    for (std::size_t j = 0; j < rules.size(); ++j) m(rules[j].head, j) = 1.0;
    return m;
}

const std::vector<std::pair<ClassId, ClassId>>& ConstraintCircuit::hierarchy_edges() const {
    if (!hierarchy_edges_) throw SemanticError("circuit was not compiled from a class hierarchy");
    return *hierarchy_edges_;
}

const Matrix& ConstraintCircuit::descendant_mask() const {
    if (!hierarchy_edges_) throw SemanticError("circuit was not compiled from a class hierarchy");
    return descendants_;
}

bool ConstraintCircuit::all_definite() const {
    for (const auto& s : strata_)
        for (const auto& r : s)
            if (!r.body_neg.empty()) return false;
    return true;
}

ConstraintCircuit compile(const RuleSet& rs, const ClosureOptions& opts) {
    const auto strat = comp_strata(rs);
    std::vector<std::vector<Rule>> strata;
    for (std::size_t i = 1; i <= strat.num_strata; ++i) strata.push_back(close_stratum(rs, strat, i, opts).rules());

    std::optional<std::vector<std::pair<ClassId, ClassId>>> edges;
    if (rs.is_hierarchy()) {
        edges.emplace();
        for (const auto& r : rs.rules()) edges->emplace_back(r.body_pos.front(), r.head);
    }
    return ConstraintCircuit(rs.classes(), strat.class_stratum, std::move(strata), std::move(edges));
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

std::string circuit_to_json(const ConstraintCircuit& c) {
    using nlohmann::json;
    json doc;
    doc["format"] = "coherent-circuit";
    doc["version"] = 1;
    doc["classes"] = c.classes().names();
    doc["class_stratum"] = c.class_stratum();
    json strata = json::array();
    for (std::size_t k = 0; k < c.num_strata(); ++k) {
        json rules = json::array();
        for (const auto& r : c.stratum_rules(k)) {
            rules.push_back({{"head", r.head}, {"pos", r.body_pos}, {"neg", r.body_neg}});
        }
        strata.push_back({{"rules", rules}});
    }
    doc["strata"] = strata;
    if (c.is_hierarchy()) {
        json edges = json::array();
        for (auto [child, parent] : c.hierarchy_edges()) edges.push_back({child, parent});
        doc["hierarchy_edges"] = edges;
    }
    return doc.dump(1) + "\n";
}

ConstraintCircuit circuit_from_json(std::string_view text) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("circuit file: ") + e.what());
    }
    try {
        if (doc.at("format").get<std::string>() != "coherent-circuit") throw ParseError("not a circuit file");
        if (doc.at("version").get<int>() != 1) {
            throw ParseError("unsupported circuit version " + std::to_string(doc.at("version").get<int>()));
        }
        ClassTable classes(doc.at("classes").get<std::vector<std::string>>());
        auto class_stratum = doc.at("class_stratum").get<std::vector<std::uint32_t>>();
        std::vector<std::vector<Rule>> strata;
        for (const auto& s : doc.at("strata")) {
            auto& rules = strata.emplace_back();
            for (const auto& r : s.at("rules")) {
                rules.emplace_back(r.at("head").get<ClassId>(), r.at("pos").get<std::vector<ClassId>>(),
                                   r.at("neg").get<std::vector<ClassId>>());
            }
        }
        std::optional<std::vector<std::pair<ClassId, ClassId>>> edges;
        if (doc.contains("hierarchy_edges")) {
            edges = doc["hierarchy_edges"].get<std::vector<std::pair<ClassId, ClassId>>>();
        }
        return ConstraintCircuit(std::move(classes), std::move(class_stratum), std::move(strata), std::move(edges));
    } catch (const json::exception& e) {
        throw ParseError(std::string("circuit file: ") + e.what());
    }
}

}  // namespace coherent
