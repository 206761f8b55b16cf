#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "coherent/common.hpp"
#include "coherent/rules.hpp"

namespace coherent {

/// Features, binary labels and a train/validation/test split.
struct TabularDataset {
    Matrix features;  // N x D
    Matrix labels;    // N x L, entries 0 or 1
    std::vector<std::size_t> train, val, test;
    ClassTable classes;
    std::vector<std::string> feature_names;

    std::size_t size() const noexcept { return features.rows(); }
    /// Throws DimensionError unless shapes agree and the splits are disjoint and cover all rows.
    void validate() const;

    Matrix features_of(const std::vector<std::size_t>& idx) const { return features.select_rows(idx); }
    Matrix labels_of(const std::vector<std::size_t>& idx) const { return labels.select_rows(idx); }
};

// ---------------------------------------------------------------------------
// Synthetic rectangle worlds
// ---------------------------------------------------------------------------

struct Rect {
    double x0, y0, x1, y1;
    bool contains(double x, double y) const noexcept { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
    double area() const noexcept { return (x1 - x0) * (y1 - y0); }
};

/// A class is a union of rectangles minus another union.
struct Membership {
    std::vector<std::size_t> include;
    std::vector<std::size_t> exclude;
};

struct RectangleWorld {
    std::vector<Rect> rects;
    std::vector<std::string> class_names;
    std::vector<Membership> membership;  // one per class
    std::size_t samples = 5000;
    double train_fraction = 0.5;
    std::uint64_t seed = 0;

    std::vector<double> label(double x, double y) const;
};

/// Uniform points over [0, 1]^2 labelled by `world`; the first
/// round(train_fraction * samples) points form the training split, the rest the test split.
TabularDataset gen_rectangles(const RectangleWorld& world);

/// Hierarchy world: A1 = R1, A = R1 ∪ R2. Rule set {A1 -> A}.
RectangleWorld hmc_world(const Rect& r1, const Rect& r2, std::uint64_t seed, std::size_t samples = 5000);
/// Normal-rule world: A = R1 ∪ R2, A1 = R1, A2 = R2 \ R1.
RectangleWorld lcmc_world(const Rect& r1, const Rect& r2, std::uint64_t seed, std::size_t samples = 5000);
RuleSet hmc_world_rules();
RuleSet lcmc_world_rules();

/// Geometry of step `step` (1..9) of the sweep: R2 = [0.3, 0.9]^2, R1 a 0.2
/// square whose centre moves from (0.1, 0.6) (disjoint from R2) to (0.6, 0.6)
/// (centre of R2) in uniform steps.
std::pair<Rect, Rect> sweep_geometry(std::size_t step);
inline constexpr std::size_t kSweepSteps = 9;

/// Nine nested rectangles with classes A1..A9 and their hierarchy.
RectangleWorld nine_rect_world(std::uint64_t seed, std::size_t samples = 5000);
RuleSet nine_rect_rules();

struct SyntheticProblem {
    TabularDataset data;
    RuleSet rules;
};
SyntheticProblem gen_nine_rect(std::uint64_t seed, std::size_t samples = 5000);

// ---------------------------------------------------------------------------
// CSV ingestion
// ---------------------------------------------------------------------------

/// Sidecar schema. JSON keys: "labels" (required, list of column names),
/// "categorical" (list), "ignore" (list), "split_column" (values train/val/test),
/// "val_fraction", "test_fraction", "seed".
struct DatasetSchema {
    std::vector<std::string> labels;
    std::vector<std::string> categorical;
    std::vector<std::string> ignore;
    std::string split_column;
    double val_fraction = 0.0;
    double test_fraction = 0.0;
    std::uint64_t seed = 0;

    static DatasetSchema from_json(std::string_view text);
};

/// Parsed CSV: header and raw cells (empty string = missing).
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvTable parse_csv(std::string_view text);
std::string format_csv_row(const std::vector<std::string>& cells);

/// Loads a CSV with header. Categorical columns are one-hot encoded (missing
/// values become an all-zero block); numeric missing values are replaced by the
/// training-split mean; numeric columns are standardised with training-split
/// statistics (constant columns are only centred).
TabularDataset load_dataset(const CsvTable& csv, const DatasetSchema& schema);
TabularDataset load_dataset(const std::string& csv_path, const std::string& schema_path);

/// Numeric matrix from a CSV with header (all cells numeric).
Matrix read_matrix_csv(const std::string& path, std::vector<std::string>* header = nullptr);
void write_matrix_csv(const std::string& path, const Matrix& m, const std::vector<std::string>& header);

}  // namespace coherent
