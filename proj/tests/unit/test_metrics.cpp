#include <gtest/gtest.h>

#include <cmath>

#include "coherent/metrics.hpp"
#include "oracles.hpp"

using namespace coherent;
namespace ct = coherent::testing;

namespace {

const Matrix kScores = Matrix::from_rows({{0.9, 0.2, 0.6, 0.4},
                                          {0.1, 0.8, 0.8, 0.3},
                                          {0.55, 0.45, 0.7, 0.05},
                                          {0.3, 0.3, 0.2, 0.9},
                                          {0.6, 0.1, 0.4, 0.7}});
const Matrix kLabels = Matrix::from_rows({{1, 0, 1, 0}, {0, 1, 0, 0}, {1, 1, 0, 0}, {0, 0, 1, 1}, {1, 0, 0, 0}});

}  // namespace

// Reference values from scikit-learn 1.7.2 on the batch above.
TEST(Metrics, AgreeWithScikitLearn) {
    EXPECT_NEAR(au_prc(kScores, kLabels), 0.729656862745098, 1e-12);
    EXPECT_NEAR(average_precision(kScores, kLabels), 0.6666666666666666, 1e-12);
    EXPECT_NEAR(coverage_error(kScores, kLabels) * 4, 2.6, 1e-12);  // sklearn does not divide by L
    EXPECT_NEAR(ranking_loss(kScores, kLabels), 0.3333333333333333, 1e-12);
    EXPECT_NEAR(hamming_loss(kScores, kLabels), 0.25, 1e-12);
    EXPECT_NEAR(multilabel_accuracy(kScores, kLabels), 0.5666666666666667, 1e-12);
    EXPECT_NEAR(one_error(kScores, kLabels), 0.4, 1e-12);
}

TEST(Metrics, ExcludesRowsWithoutPositives) {
    auto s = Matrix::from_rows({{0.9, 0.1}, {0.2, 0.7}});
    auto y = Matrix::from_rows({{1, 0}, {0, 0}});
    std::size_t excluded = 0;
    EXPECT_DOUBLE_EQ(average_precision(s, y, &excluded), 1.0);
    EXPECT_EQ(excluded, 1u);
    auto r = mc_metrics(s, y);
    EXPECT_EQ(r.excluded_instances, 1u);
    EXPECT_DOUBLE_EQ(r.one_error, 0.0);
    auto none = Matrix::from_rows({{0, 0}});
    EXPECT_TRUE(std::isnan(one_error(Matrix::from_rows({{0.3, 0.4}}), none)));
    EXPECT_THROW(au_prc(Matrix::from_rows({{0.3, 0.4}}), none), DimensionError);
    EXPECT_DOUBLE_EQ(multilabel_accuracy(Matrix::from_rows({{0.3, 0.4}}), none), 1.0);
}

TEST(Metrics, RejectsShapeMismatch) {
    EXPECT_THROW(au_prc(Matrix(2, 3), Matrix(2, 2)), DimensionError);
    EXPECT_THROW(hamming_loss(Matrix(1, 3), Matrix(2, 3)), DimensionError);
}

TEST(Metrics, MatchOraclesOnRandomBatches) {
    Rng rng(67);
    for (int iter = 0; iter < 500; ++iter) {
        const auto rows = 1 + rng.below(8), cols = 1 + rng.below(6);
        Matrix s(rows, cols), y(rows, cols);
        auto sv = ct::random_scores(rng, rows * cols, iter % 2 == 0);
        auto yv = ct::random_labels(rng, rows * cols, 0.4);
        s.data() = sv;
        y.data() = yv;
        if (std::count(yv.begin(), yv.end(), 1.0) == 0) y(0, 0) = 1.0;
        auto r = mc_metrics(s, y);
        ASSERT_NEAR(r.au_prc, ct::oracle_au_prc(s, y), 1e-12);
        ASSERT_NEAR(r.average_precision, ct::oracle_average_precision(s, y), 1e-12);
        ASSERT_NEAR(r.coverage_error, ct::oracle_coverage(s, y), 1e-12);
        ASSERT_NEAR(r.hamming_loss, ct::oracle_hamming(s, y), 1e-12);
        ASSERT_NEAR(r.multilabel_accuracy, ct::oracle_accuracy(s, y), 1e-12);
        ASSERT_NEAR(r.one_error, ct::oracle_one_error(s, y), 1e-12);
        ASSERT_NEAR(r.ranking_loss, ct::oracle_ranking_loss(s, y), 1e-12);
    }
}

TEST(Metrics, PerfectScoresGiveBestValues) {
    auto r = mc_metrics(kLabels, kLabels);
    EXPECT_DOUBLE_EQ(r.au_prc, 1.0);
    EXPECT_DOUBLE_EQ(r.average_precision, 1.0);
    EXPECT_DOUBLE_EQ(r.hamming_loss, 0.0);
    EXPECT_DOUBLE_EQ(r.multilabel_accuracy, 1.0);
    EXPECT_DOUBLE_EQ(r.one_error, 0.0);
    EXPECT_NE(metric_report_json(r).find("\"au_prc\""), std::string::npos);
}
