#include "coherent/constraint_module.hpp"

#include <algorithm>
#include <cmath>

#include "stratum_eval.hpp"

namespace coherent {

namespace detail {

void check_scores(std::span<const double> v, std::size_t expected, const char* what) {
    if (v.size() != expected) {
        throw DimensionError(std::string(what) + ": expected " + std::to_string(expected) + " values, got " +
                             std::to_string(v.size()));
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] >= 0.0 && v[i] <= 1.0)) {
            throw DimensionError(std::string(what) + ": entry " + std::to_string(i) + " is outside [0, 1]");
        }
    }
}

}  // namespace detail

std::vector<double> cm_forward(const ConstraintCircuit& c, std::span<const double> h, EvalTrace* trace) {
    detail::check_scores(h, c.num_classes(), "scores");
    std::vector<double> cur(h.begin(), h.end()), prev(h.size());
    if (trace) {
        *trace = EvalTrace{};
        trace->input = cur;
    }
    detail::eval_row(c, cur.data(), prev.data(), detail::CmLiteral{}, nullptr, nullptr, trace);
    return cur;
}

Matrix cm_forward(const ConstraintCircuit& c, const Matrix& h, RouteTape* tape) {
    const auto L = c.num_classes();
    if (h.cols() != L) throw DimensionError("score matrix has " + std::to_string(h.cols()) + " columns, circuit has " +
                                            std::to_string(L) + " classes");
    detail::check_scores(h.data(), h.data().size(), "scores");
    Matrix out = h;
    std::vector<double> prev(L);
    if (tape) {
        tape->rows = h.rows();
        tape->stride = detail::route_stride(c);
        tape->src.assign(tape->rows * tape->stride, -1);
        tape->coef.assign(tape->rows * tape->stride, 0);
    }
    for (std::size_t n = 0; n < h.rows(); ++n) {
        auto* src = tape ? tape->src.data() + n * tape->stride : nullptr;
        auto* coef = tape ? tape->coef.data() + n * tape->stride : nullptr;
        detail::eval_row(c, out.row(n).data(), prev.data(), detail::CmLiteral{}, src, coef, nullptr);
    }
    return out;
}

Matrix cm_forward_dense(const ConstraintCircuit& c, const Matrix& h) {
    const auto L = c.num_classes();
    if (h.cols() != L) throw DimensionError("score matrix width differs from class count");
    detail::check_scores(h.data(), h.data().size(), "scores");
    Matrix out(h.rows(), L);
    for (std::size_t n = 0; n < h.rows(); ++n) {
        std::vector<double> cm(h.row(n).begin(), h.row(n).end());
        for (std::size_t k = 0; k < c.num_strata(); ++k) {
            const Matrix bp = c.body_pos_matrix(k);
            const Matrix bn = c.body_neg_matrix(k);
            const Matrix hm = c.head_matrix(k);
            const auto p = bp.rows();
            std::vector<double> v(p);
            for (std::size_t j = 0; j < p; ++j) {
                double vp = bp(j, 0) * cm[0] + (1.0 - bp(j, 0));
                double vn = bn(j, 0) * (1.0 - cm[0]) + (1.0 - bn(j, 0));
                for (std::size_t q = 1; q < L; ++q) {
                    vp = std::min(vp, bp(j, q) * cm[q] + (1.0 - bp(j, q)));
                    vn = std::min(vn, bn(j, q) * (1.0 - cm[q]) + (1.0 - bn(j, q)));
                }
                v[j] = L == 0 ? 1.0 : std::min(vp, vn);
            }
            // Row a of IH ⊙ V: identity block then head block, maximised.
            std::vector<double> next(L);
            for (std::size_t a = 0; a < L; ++a) {
                double m = 0.0;
                for (std::size_t q = 0; q < L; ++q) m = std::max(m, (a == q ? 1.0 : 0.0) * cm[q]);
                for (std::size_t j = 0; j < p; ++j) m = std::max(m, hm(a, j) * v[j]);
                next[a] = m;
            }
            cm = std::move(next);
        }
        std::copy(cm.begin(), cm.end(), out.row(n).begin());
    }
    return out;
}

std::vector<double> cm_forward_hmc(const Matrix& mask, std::span<const double> h) {
    const auto L = mask.rows();
    if (mask.cols() != L) throw DimensionError("descendant mask must be square");
    detail::check_scores(h, L, "scores");
    std::vector<double> out(L);
    for (std::size_t a = 0; a < L; ++a) {
        double m = 0.0;
        for (std::size_t b = 0; b < L; ++b) m = std::max(m, mask(a, b) * h[b]);
        out[a] = m;
    }
    return out;
}

Matrix cm_forward_hmc(const Matrix& mask, const Matrix& h) {
    if (h.cols() != mask.rows()) throw DimensionError("score matrix width differs from mask size");
    Matrix out(h.rows(), h.cols());
    for (std::size_t n = 0; n < h.rows(); ++n) {
        auto r = cm_forward_hmc(mask, h.row(n));
        std::copy(r.begin(), r.end(), out.row(n).begin());
    }
    return out;
}

Matrix route_backward(const ConstraintCircuit& c, const RouteTape& tape, Matrix g) {
    const auto L = c.num_classes();
    if (g.rows() != tape.rows || g.cols() != L) throw DimensionError("gradient shape differs from recorded tape");
    std::vector<double> tmp;
    for (std::size_t n = 0; n < g.rows(); ++n) {
        auto gr = g.row(n);
        const auto* src = tape.src.data() + n * tape.stride;
        const auto* coef = tape.coef.data() + n * tape.stride;
        std::size_t end = tape.stride;
        for (std::size_t k = c.num_strata(); k-- > 0;) {
            const auto& heads = c.layout(k).heads;
            const std::size_t begin = end - heads.size();
            tmp.resize(heads.size());
            for (std::size_t t = 0; t < heads.size(); ++t) {
                tmp[t] = gr[heads[t]];
                gr[heads[t]] = 0.0;
            }
            for (std::size_t t = 0; t < heads.size(); ++t) {
                const auto e = begin + t;
                if (coef[e] != 0) gr[static_cast<std::size_t>(src[e])] += coef[e] * tmp[t];
            }
            end = begin;
        }
    }
    return g;
}

Matrix predict(const Matrix& scores, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) throw DimensionError("threshold must lie in (0, 1)");
    Matrix out(scores.rows(), scores.cols());
    for (std::size_t i = 0; i < scores.data().size(); ++i) out.data()[i] = scores.data()[i] > threshold ? 1.0 : 0.0;
    return out;
}

std::optional<std::string> threshold_warning(const ConstraintCircuit& c, double threshold) {
    if (threshold == 0.5 || c.all_definite()) return std::nullopt;
    return "threshold " + std::to_string(threshold) +
           " with negated rule bodies: coherence of thresholded predictions is not guaranteed (negation is 1 - v)";
}

double delegation_rate(const ConstraintCircuit& c, const Matrix& h, ClassId a) {
    const auto& mask = c.descendant_mask();
    if (a >= c.num_classes()) throw DimensionError("class index out of range");
    if (h.cols() != c.num_classes()) throw DimensionError("score matrix width differs from class count");
    if (h.rows() == 0) return 0.0;
    std::size_t delegated = 0;
    for (std::size_t n = 0; n < h.rows(); ++n) {
        const auto r = h.row(n);
        for (std::size_t b = 0; b < c.num_classes(); ++b) {
            if (b != a && mask(a, b) != 0.0 && r[b] > r[a]) {
                ++delegated;
                break;
            }
        }
    }
    return static_cast<double>(delegated) / static_cast<double>(h.rows());
}

}  // namespace coherent
