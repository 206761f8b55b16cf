#include "coherent/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "json.hpp"

namespace coherent {

namespace {

void check(const Matrix& scores, const Matrix& labels) {
    if (scores.rows() != labels.rows() || scores.cols() != labels.cols()) {
        throw DimensionError("scores and labels differ in shape");
    }
    if (scores.rows() == 0 || scores.cols() == 0) throw DimensionError("metrics need a non-empty batch");
    for (double v : scores.data())
        if (std::isnan(v)) throw DimensionError("NaN score");
    for (double v : labels.data())
        if (v != 0.0 && v != 1.0) throw DimensionError("labels must be 0 or 1");
}

bool has_positive(std::span<const double> y) {
    return std::any_of(y.begin(), y.end(), [](double v) { return v != 0.0; });
}

// Averages f(row) over rows with at least one positive label.
template <typename F>
double rank_average(const Matrix& scores, const Matrix& labels, std::size_t* excluded, F&& f) {
    check(scores, labels);
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t n = 0; n < scores.rows(); ++n) {
        if (!has_positive(labels.row(n))) continue;
        sum += f(scores.row(n), labels.row(n));
        ++used;
    }
    if (excluded) *excluded = scores.rows() - used;
    return used ? sum / static_cast<double>(used) : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

double au_prc(const Matrix& scores, const Matrix& labels) {
    check(scores, labels);
    const auto& s = scores.data();
    const auto& y = labels.data();
    std::vector<std::size_t> order(s.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
    const double total_pos = std::accumulate(y.begin(), y.end(), 0.0);
    if (total_pos == 0.0) throw DimensionError("AU(PRC) is undefined without positive labels");

    double area = 0.0, tp = 0.0, fp = 0.0, prev_recall = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        const double t = s[order[i]];
        for (; i < order.size() && s[order[i]] == t; ++i) (y[order[i]] != 0.0 ? tp : fp) += 1.0;
        const double recall = tp / total_pos;
        area += (recall - prev_recall) * (tp / (tp + fp));
        prev_recall = recall;
    }
    return area;
}

double average_precision(const Matrix& scores, const Matrix& labels, std::size_t* excluded) {
    return rank_average(scores, labels, excluded, [](auto s, auto y) {
        double acc = 0.0;
        std::size_t npos = 0;
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (y[j] == 0.0) continue;
            ++npos;
            double above = 0.0, above_pos = 0.0;
            for (std::size_t k = 0; k < s.size(); ++k) {
                if (s[k] >= s[j]) {
                    above += 1.0;
                    if (y[k] != 0.0) above_pos += 1.0;
                }
            }
            acc += above_pos / above;
        }
        return acc / static_cast<double>(npos);
    });
}

double coverage_error(const Matrix& scores, const Matrix& labels, std::size_t* excluded) {
    return rank_average(scores, labels, excluded, [](auto s, auto y) {
        double lo = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < s.size(); ++j)
            if (y[j] != 0.0) lo = std::min(lo, s[j]);
        double depth = 0.0;
        for (double v : s)
            if (v >= lo) depth += 1.0;
        return depth / static_cast<double>(s.size());
    });
}

double hamming_loss(const Matrix& scores, const Matrix& labels, double threshold) {
    check(scores, labels);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < scores.data().size(); ++i) {
        const bool pred = scores.data()[i] > threshold;
        if (pred != (labels.data()[i] != 0.0)) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(scores.data().size());
}

double multilabel_accuracy(const Matrix& scores, const Matrix& labels, double threshold) {
    check(scores, labels);
    double sum = 0.0;
    for (std::size_t n = 0; n < scores.rows(); ++n) {
        std::size_t inter = 0, uni = 0;
        for (std::size_t j = 0; j < scores.cols(); ++j) {
            const bool p = scores(n, j) > threshold;
            const bool t = labels(n, j) != 0.0;
            inter += p && t;
            uni += p || t;
        }
        sum += uni ? static_cast<double>(inter) / static_cast<double>(uni) : 1.0;
    }
    return sum / static_cast<double>(scores.rows());
}

double one_error(const Matrix& scores, const Matrix& labels, std::size_t* excluded) {
    return rank_average(scores, labels, excluded, [](auto s, auto y) {
        const auto top = static_cast<std::size_t>(std::max_element(s.begin(), s.end()) - s.begin());
        return y[top] != 0.0 ? 0.0 : 1.0;
    });
}

double ranking_loss(const Matrix& scores, const Matrix& labels, std::size_t* excluded) {
    return rank_average(scores, labels, excluded, [](auto s, auto y) {
        std::size_t bad = 0, npos = 0, nneg = 0;
        for (std::size_t j = 0; j < s.size(); ++j) (y[j] != 0.0 ? npos : nneg) += 1;
        if (nneg == 0) return 0.0;
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (y[j] == 0.0) continue;
            for (std::size_t k = 0; k < s.size(); ++k)
                if (y[k] == 0.0 && s[j] <= s[k]) ++bad;
        }
        return static_cast<double>(bad) / static_cast<double>(npos * nneg);
    });
}

MetricReport mc_metrics(const Matrix& scores, const Matrix& labels, double threshold) {
    MetricReport r;
    r.au_prc = au_prc(scores, labels);
    r.average_precision = average_precision(scores, labels, &r.excluded_instances);
    r.coverage_error = coverage_error(scores, labels);
    r.hamming_loss = hamming_loss(scores, labels, threshold);
    r.multilabel_accuracy = multilabel_accuracy(scores, labels, threshold);
    r.one_error = one_error(scores, labels);
    r.ranking_loss = ranking_loss(scores, labels);
    return r;
}

std::string metric_report_json(const MetricReport& r) {
    nlohmann::ordered_json doc;
    auto num = [](double v) { return std::isnan(v) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(v); };
    doc["au_prc"] = num(r.au_prc);
    doc["average_precision"] = num(r.average_precision);
    doc["coverage_error"] = num(r.coverage_error);
    doc["hamming_loss"] = num(r.hamming_loss);
    doc["multilabel_accuracy"] = num(r.multilabel_accuracy);
    doc["one_error"] = num(r.one_error);
    doc["ranking_loss"] = num(r.ranking_loss);
    doc["excluded_instances"] = r.excluded_instances;
    return doc.dump(2) + "\n";
}

}  // namespace coherent
