#include "coherent/strata.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <unordered_set>

namespace coherent {

namespace {

template <typename It>
bool sorted_subset(It a0, It a1, It b0, It b1) {
    return std::includes(b0, b1, a0, a1);
}

std::vector<std::vector<ClassId>> successors(const DependencyGraph& g) {
    std::vector<std::vector<ClassId>> succ(g.num_nodes);
    for (auto [u, v] : g.pos_edges) succ[u].push_back(v);
    for (auto [u, v] : g.neg_edges) succ[u].push_back(v);
    for (auto& s : succ) {
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
    }
    return succ;
}

}  // namespace

bool body_subset(const Rule& a, const Rule& b) {
    return sorted_subset(a.body_pos.begin(), a.body_pos.end(), b.body_pos.begin(), b.body_pos.end()) &&
           sorted_subset(a.body_neg.begin(), a.body_neg.end(), b.body_neg.begin(), b.body_neg.end());
}

DependencyGraph build_dependency_graph(const RuleSet& rs) {
    DependencyGraph g;
    g.num_nodes = rs.classes().size();
    for (const auto& r : rs.rules()) {
        for (auto b : r.body_pos) g.pos_edges.emplace_back(b, r.head);
        for (auto b : r.body_neg) g.neg_edges.emplace_back(b, r.head);
    }
    for (auto* edges : {&g.pos_edges, &g.neg_edges}) {
        std::sort(edges->begin(), edges->end());
        edges->erase(std::unique(edges->begin(), edges->end()), edges->end());
    }
    return g;
}

SccResult strongly_connected_components(const DependencyGraph& g) {
    const auto n = g.num_nodes;
    const auto succ = successors(g);
    constexpr auto kUnset = std::numeric_limits<std::uint32_t>::max();

    SccResult out;
    out.component.assign(n, kUnset);
    std::vector<std::uint32_t> index(n, kUnset), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<ClassId> stack;
    std::uint32_t counter = 0;

    struct Frame {
        ClassId node;
        std::size_t next;
    };
    for (ClassId root = 0; root < n; ++root) {
        if (index[root] != kUnset) continue;
        std::vector<Frame> call{{root, 0}};
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            auto& f = call.back();
            if (f.next < succ[f.node].size()) {
                auto w = succ[f.node][f.next++];
                if (index[w] == kUnset) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[f.node] = std::min(low[f.node], index[w]);
                }
                continue;
            }
            auto v = f.node;
            call.pop_back();
            if (!call.empty()) low[call.back().node] = std::min(low[call.back().node], low[v]);
            if (low[v] == index[v]) {
                ClassId w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    out.component[w] = static_cast<std::uint32_t>(out.count);
                } while (w != v);
                ++out.count;
            }
        }
    }
    return out;
}

StratificationCheck check_stratified(const DependencyGraph& g) {
    auto scc = strongly_connected_components(g);
    for (auto [u, v] : g.neg_edges) {
        if (scc.component[u] != scc.component[v]) continue;
        // Close the cycle with a shortest path v ~> u inside the component.
        const auto succ = successors(g);
        const auto comp = scc.component[u];
        constexpr auto kNone = std::numeric_limits<ClassId>::max();
        std::vector<ClassId> prev(g.num_nodes, kNone);
        std::deque<ClassId> queue{v};
        prev[v] = v;
        while (!queue.empty() && prev[u] == kNone) {
            auto x = queue.front();
            queue.pop_front();
            for (auto w : succ[x]) {
                if (scc.component[w] != comp || prev[w] != kNone) continue;
                prev[w] = x;
                queue.push_back(w);
            }
        }
        std::vector<ClassId> path;
        for (auto x = u; x != v; x = prev[x]) path.push_back(x);
        path.push_back(v);
        std::reverse(path.begin(), path.end());  // v ... u
        StratificationCheck res;
        res.stratified = false;
        res.cycle.push_back(u);
        res.cycle.insert(res.cycle.end(), path.begin(), path.end());
        if (res.cycle.back() != u) res.cycle.push_back(u);
        return res;
    }
    return {};
}

Stratification comp_strata(const RuleSet& rs) {
    const auto g = build_dependency_graph(rs);
    if (auto chk = check_stratified(g); !chk.stratified) {
        std::string msg = "rules are not stratified: cycle through negation ";
        for (std::size_t i = 0; i < chk.cycle.size(); ++i) {
            if (i) msg += (i == 1 ? " ~> " : " -> ");
            msg += rs.classes().name(chk.cycle[i]);
        }
        throw NotStratifiedError(msg, chk.cycle);
    }

    const auto scc = strongly_connected_components(g);
    // Longest path counting negative edges over the condensation, processed in
    // topological order (reverse of Tarjan completion order).
    std::vector<std::vector<std::pair<std::uint32_t, bool>>> comp_in(scc.count);
    for (auto [u, v] : g.pos_edges) {
        if (scc.component[u] != scc.component[v]) comp_in[scc.component[v]].emplace_back(scc.component[u], false);
    }
    for (auto [u, v] : g.neg_edges) comp_in[scc.component[v]].emplace_back(scc.component[u], true);

    std::vector<std::uint32_t> depth(scc.count, 0);
    for (std::size_t k = scc.count; k-- > 0;) {
        for (auto [from, neg] : comp_in[k]) depth[k] = std::max(depth[k], depth[from] + (neg ? 1u : 0u));
    }

    Stratification st;
    st.class_stratum.resize(g.num_nodes);
    std::uint32_t s = 1;
    for (ClassId c = 0; c < g.num_nodes; ++c) {
        st.class_stratum[c] = depth[scc.component[c]] + 1;
        s = std::max(s, st.class_stratum[c]);
    }
    st.num_strata = s;
    st.strata_rules.assign(s, {});
    for (std::size_t j = 0; j < rs.rules().size(); ++j) {
        st.strata_rules[st.class_stratum[rs.rules()[j].head] - 1].push_back(j);
    }
    return st;
}

RuleSet close_stratum(const RuleSet& rs, const Stratification& strat, std::size_t stratum,
                      const ClosureOptions& opts) {
    if (stratum == 0 || stratum > strat.num_strata) throw DimensionError("stratum index out of range");
    const auto& idx = strat.strata_rules[stratum - 1];
    const auto L = rs.classes().size();

    std::vector<Rule> base;
    std::vector<std::vector<std::size_t>> by_head(L);
    for (auto j : idx) {
        const auto& r = rs.rules()[j];
        if (strat.class_stratum[r.head] != stratum) {
            throw SemanticError("rule head assigned to a different stratum than its rules");
        }
        by_head[r.head].push_back(base.size());
        base.push_back(r);
    }

    auto head_in_body = [](const Rule& r) {
        return std::binary_search(r.body_pos.begin(), r.body_pos.end(), r.head);
    };

    std::vector<Rule> out;
    std::unordered_set<Rule, RuleHash> seen;
    for (const auto& r : base) {
        seen.insert(r);
        if (!head_in_body(r)) out.push_back(r);
    }

    for (std::size_t next = 0; next < out.size(); ++next) {
        // `out` may reallocate while we append, so work on a copy.
        const Rule r = out[next];
        for (auto a : r.body_pos) {
            if (strat.class_stratum[a] != stratum) continue;
            for (auto k : by_head[a]) {
                const auto& sub = base[k];
                std::vector<ClassId> pos;
                pos.reserve(r.body_pos.size() + sub.body_pos.size());
                for (auto b : r.body_pos)
                    if (b != a) pos.push_back(b);
                pos.insert(pos.end(), sub.body_pos.begin(), sub.body_pos.end());
                std::vector<ClassId> neg = r.body_neg;
                neg.insert(neg.end(), sub.body_neg.begin(), sub.body_neg.end());
                Rule gen(r.head, std::move(pos), std::move(neg));
                if (head_in_body(gen) || !seen.insert(gen).second) continue;
                if (out.size() >= opts.max_rules) {
                    throw SemanticError("closure of stratum " + std::to_string(stratum) + " exceeds " +
                                        std::to_string(opts.max_rules) + " rules");
                }
                out.push_back(std::move(gen));
            }
        }
    }

    RuleSet closed(rs.classes());
    for (auto& r : out) {
        bool subsumed = false;
        for (auto k : by_head[r.head]) {
            const auto& other = base[k];
            if (other != r && body_subset(other, r)) {
                subsumed = true;
                break;
            }
        }
        if (!subsumed) closed.add(std::move(r));
    }
    return closed;
}

}  // namespace coherent
