// Shared single-row evaluation loop for the constraint module and the
// constraint-loss targets. Not installed.
#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "coherent/circuit.hpp"
#include "coherent/constraint_module.hpp"

namespace coherent::detail {

struct Literal {
    double value;
    std::int8_t coef;  // 0: constant; otherwise value = const + coef * prev[class]
};

inline std::size_t route_stride(const ConstraintCircuit& c) {
    std::size_t n = 0;
    for (std::size_t k = 0; k < c.num_strata(); ++k) n += c.layout(k).heads.size();
    return n;
}

/// Evaluates every stratum on one row. `lit(head, cls, negated, prev)` returns
/// the value of a body literal. `cur` holds the input on entry and the result
/// on exit; `prev` is scratch of the same length. Routes are written when
/// `src`/`coef` are non-null.
template <typename LitFn>
void eval_row(const ConstraintCircuit& c, double* cur, double* prev, LitFn&& lit, std::int32_t* src,
              std::int8_t* coef, EvalTrace* trace) {
    const auto L = c.num_classes();
    std::size_t e = 0;
    for (std::size_t k = 0; k < c.num_strata(); ++k) {
        const auto& lay = c.layout(k);
        const auto* heads = lay.heads.data();
        const auto* head_begin = lay.head_begin.data();
        const auto* rules = lay.rules.data();
        const auto* lit_begin = lay.lit_begin.data();
        const auto* lit_class = lay.lit_class.data();
        const auto* lit_neg = lay.lit_neg.data();
        std::copy(cur, cur + L, prev);
        std::vector<double>* body = nullptr;
        if (trace) body = &trace->body_values.emplace_back(c.stratum_rules(k).size(), 1.0);
        for (std::size_t t = 0; t < lay.heads.size(); ++t, ++e) {
            const auto o = heads[t];
            double best = prev[o];
            std::int32_t best_src = static_cast<std::int32_t>(o);
            std::int8_t best_coef = 1;
            for (auto ri = head_begin[t]; ri < head_begin[t + 1]; ++ri) {
                const auto j = rules[ri];
                const auto lb = lit_begin[j], le = lit_begin[j + 1];
                double v = 1.0;  // a fact
                std::int32_t v_src = -1;
                std::int8_t v_coef = 0;
                if (lb < le) {
                    v = std::numeric_limits<double>::infinity();
                    for (auto l = lb; l < le; ++l) {
                        const auto cls = lit_class[l];
                        const Literal x = lit(o, cls, lit_neg[l] != 0, prev);
                        if (x.value < v) {
                            v = x.value;
                            v_src = x.coef ? static_cast<std::int32_t>(cls) : -1;
                            v_coef = x.coef;
                        }
                    }
                }
                if (body) (*body)[j] = v;
                if (v > best) {
                    best = v;
                    best_src = v_src;
                    best_coef = v_coef;
                }
            }
            cur[o] = best;
            if (src) {
                src[e] = best_src;
                coef[e] = best_coef;
            }
        }
        if (trace) trace->outputs.emplace_back(cur, cur + L);
    }
}

/// Standard literal: p or 1 - p.
struct CmLiteral {
    Literal operator()(ClassId, ClassId cls, bool neg, const double* prev) const {
        return neg ? Literal{1.0 - prev[cls], -1} : Literal{prev[cls], 1};
    }
};

}  // namespace coherent::detail
