#pragma once

#include <cstddef>
#include <string>

#include "coherent/common.hpp"

namespace coherent {

/// Multi-label evaluation metrics, all in [0, 1].
///
/// Rank-based metrics (average_precision, coverage_error, one_error,
/// ranking_loss) skip instances without positive labels; the number skipped is
/// `excluded_instances`. When every instance is skipped they are NaN.
struct MetricReport {
    double au_prc = 0.0;               // higher is better
    double average_precision = 0.0;    // higher is better
    double coverage_error = 0.0;       // lower is better
    double hamming_loss = 0.0;         // lower is better
    double multilabel_accuracy = 0.0;  // higher is better
    double one_error = 0.0;            // lower is better
    double ranking_loss = 0.0;         // lower is better
    std::size_t excluded_instances = 0;
};

/// Area under the pooled precision-recall curve. All (instance, class) pairs
/// are ranked together; with distinct score thresholds t_1 > t_2 > ... the area
/// is sum_i (R_i - R_{i-1}) * P_i, where P_i and R_i are the precision and
/// recall of predicting "score >= t_i" and R_0 = 0. Throws DimensionError when
/// there is no positive label.
double au_prc(const Matrix& scores, const Matrix& labels);

/// Per-instance label-ranking average precision:
/// mean over positives j of |{k positive: s_k >= s_j}| / |{k: s_k >= s_j}|.
double average_precision(const Matrix& scores, const Matrix& labels, std::size_t* excluded = nullptr);
/// |{k: s_k >= min positive score}| / L, averaged.
double coverage_error(const Matrix& scores, const Matrix& labels, std::size_t* excluded = nullptr);
/// Fraction of label decisions (score > threshold) that disagree with the labels.
double hamming_loss(const Matrix& scores, const Matrix& labels, double threshold = 0.5);
/// Jaccard index of predicted (score > threshold) and true sets; two empty sets score 1.
double multilabel_accuracy(const Matrix& scores, const Matrix& labels, double threshold = 0.5);
/// Fraction of instances whose top-scored class (lowest index on ties) is negative.
double one_error(const Matrix& scores, const Matrix& labels, std::size_t* excluded = nullptr);
/// Fraction of (positive, negative) pairs with s_pos <= s_neg; instances with
/// no negative label contribute 0.
double ranking_loss(const Matrix& scores, const Matrix& labels, std::size_t* excluded = nullptr);

MetricReport mc_metrics(const Matrix& scores, const Matrix& labels, double threshold = 0.5);

std::string metric_report_json(const MetricReport& r);

}  // namespace coherent
