#include "coherent/constraint_loss.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

#include "stratum_eval.hpp"

namespace coherent {

namespace detail {

void check_labels(std::span<const double> y, std::size_t expected) {
    if (y.size() != expected) {
        throw DimensionError("labels: expected " + std::to_string(expected) + " values, got " +
                             std::to_string(y.size()));
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] != 0.0 && y[i] != 1.0) throw DimensionError("labels: entry " + std::to_string(i) + " is not 0 or 1");
    }
}

void bce_terms(std::span<const double> t, std::span<const double> y, double& loss, std::span<double> grad) {
    using Arr = Eigen::Map<const Eigen::ArrayXd>;
    const Arr ta(t.data(), Eigen::Index(t.size()));
    const Arr ya(y.data(), Eigen::Index(y.size()));
    // y is 0 or 1, so these blends are exact and stay vectorised.
    const Eigen::ArrayXd q = (ya * ta + (1.0 - ya) * (1.0 - ta)).max(kLogClamp).min(1.0 - kLogClamp);
    loss -= q.log().sum();
    Eigen::Map<Eigen::ArrayXd>(grad.data(), Eigen::Index(grad.size())) = (1.0 - 2.0 * ya) / q;
}

namespace {

// Body literal under the ground-truth mask. With y_head = 1 only literals the
// ground truth satisfies keep their score (others collapse to 0); with
// y_head = 0 only literals the ground truth falsifies keep it (others become 1).
struct MaskedLiteral {
    const double* y;
    Literal operator()(ClassId head, ClassId cls, bool neg, const double* prev) const {
        const bool yh = y[head] != 0.0;
        const bool yc = y[cls] != 0.0;
        const bool live = yh ? (yc != neg) : (yc == neg);
        if (!live) return {yh ? 0.0 : 1.0, 0};
        return neg ? Literal{1.0 - prev[cls], -1} : Literal{prev[cls], 1};
    }
};

void check_shapes(const Matrix& h, const Matrix& y, std::size_t L) {
    if (h.cols() != L || y.cols() != L || h.rows() != y.rows()) {
        throw DimensionError("score/label shapes do not match the class count");
    }
    detail::check_scores(h.data(), h.data().size(), "scores");
    check_labels(y.data(), y.data().size());
}

}  // namespace
}  // namespace detail

std::vector<double> closs_targets(const ConstraintCircuit& c, std::span<const double> h, std::span<const double> y,
                                  EvalTrace* trace) {
    detail::check_scores(h, c.num_classes(), "scores");
    detail::check_labels(y, c.num_classes());
    std::vector<double> cur(h.begin(), h.end()), prev(h.size());
    if (trace) {
        *trace = EvalTrace{};
        trace->input = cur;
    }
    detail::eval_row(c, cur.data(), prev.data(), detail::MaskedLiteral{y.data()}, nullptr, nullptr, trace);
    return cur;
}

Matrix closs_targets(const ConstraintCircuit& c, const Matrix& h, const Matrix& y, RouteTape* tape) {
    const auto L = c.num_classes();
    detail::check_shapes(h, y, L);
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
        detail::eval_row(c, out.row(n).data(), prev.data(), detail::MaskedLiteral{y.row(n).data()}, src, coef,
                         nullptr);
    }
    return out;
}

namespace {

LossResult single_row(const BatchLossResult& b) {
    LossResult r;
    r.loss = b.loss;
    r.gradient.assign(b.gradient.row(0).begin(), b.gradient.row(0).end());
    r.targets.assign(b.targets.row(0).begin(), b.targets.row(0).end());
    return r;
}

Matrix as_row(std::span<const double> v) {
    Matrix m(1, v.size());
    std::copy(v.begin(), v.end(), m.row(0).begin());
    return m;
}

BatchLossResult bce_on_targets(Matrix targets, const Matrix& y) {
    BatchLossResult r;
    r.gradient = Matrix(targets.rows(), targets.cols());
    detail::bce_terms(targets.data(), y.data(), r.loss, r.gradient.data());
    r.targets = std::move(targets);
    return r;
}

}  // namespace

BatchLossResult closs(const ConstraintCircuit& c, const Matrix& h, const Matrix& y) {
    RouteTape tape;
    auto r = bce_on_targets(closs_targets(c, h, y, &tape), y);
    r.gradient = route_backward(c, tape, std::move(r.gradient));
    return r;
}

LossResult closs(const ConstraintCircuit& c, std::span<const double> h, std::span<const double> y) {
    detail::check_scores(h, c.num_classes(), "scores");
    detail::check_labels(y, c.num_classes());
    return single_row(closs(c, as_row(h), as_row(y)));
}

BatchLossResult closs_hmc(const Matrix& mask, const Matrix& h, const Matrix& y) {
    const auto L = mask.rows();
    if (mask.cols() != L) throw DimensionError("descendant mask must be square");
    detail::check_shapes(h, y, L);
    BatchLossResult r;
    r.targets = Matrix(h.rows(), L);
    r.gradient = Matrix(h.rows(), L);
    std::vector<std::size_t> arg(L);
    std::vector<double> g(L);
    for (std::size_t n = 0; n < h.rows(); ++n) {
        const auto hr = h.row(n);
        const auto yr = y.row(n);
        auto t = r.targets.row(n);
        for (std::size_t a = 0; a < L; ++a) {
            // The class itself is the first candidate, then descendants ascending.
            const bool pos = yr[a] != 0.0;
            std::size_t best = a;
            double bv = hr[a];
            for (std::size_t b = 0; b < L; ++b) {
                if (b == a || mask(a, b) == 0.0 || (pos && yr[b] == 0.0)) continue;
                if (hr[b] > bv) {
                    bv = hr[b];
                    best = b;
                }
            }
            t[a] = bv;
            arg[a] = best;
        }
        detail::bce_terms(t, yr, r.loss, g);
        auto gr = r.gradient.row(n);
        for (std::size_t a = 0; a < L; ++a) gr[arg[a]] += g[a];
    }
    return r;
}

LossResult closs_hmc(const Matrix& mask, std::span<const double> h, std::span<const double> y) {
    detail::check_scores(h, mask.rows(), "scores");
    detail::check_labels(y, mask.rows());
    return single_row(closs_hmc(mask, as_row(h), as_row(y)));
}

BatchLossResult bce_loss(const Matrix& scores, const Matrix& y) {
    detail::check_shapes(scores, y, scores.cols());
    return bce_on_targets(scores, y);
}

LossResult bce_loss(std::span<const double> scores, std::span<const double> y) {
    detail::check_scores(scores, scores.size(), "scores");
    detail::check_labels(y, scores.size());
    return single_row(bce_loss(as_row(scores), as_row(y)));
}

BatchLossResult cm_bce_loss(const ConstraintCircuit& c, const Matrix& h, const Matrix& y) {
    detail::check_shapes(h, y, c.num_classes());
    RouteTape tape;
    auto r = bce_on_targets(cm_forward(c, h, &tape), y);
    r.gradient = route_backward(c, tape, std::move(r.gradient));
    return r;
}

}  // namespace coherent
