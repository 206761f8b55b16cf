#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "coherent/metrics.hpp"
#include "coherent/trainer.hpp"

namespace coherent {

enum class ExperimentKind {
    hmc_sweep,   // A1 -> A, R1 moved into R2; systems CCN, f+, g+
    lcmc_sweep,  // A1 -> A, A2 -> A, A, !A1 -> A2; systems CCN, f+ (CM post-processing)
    nine_rect,   // nine-rectangle hierarchy; systems CCN, h+CM
};

std::string to_string(ExperimentKind k);
ExperimentKind experiment_from_string(const std::string& s);

struct ExperimentConfig {
    std::size_t runs = 10;
    std::size_t epochs = 20000;
    std::size_t hidden = 0;  // 0: 4 for the sweeps, 7 for nine_rect
    double learning_rate = 1e-2;
    std::size_t samples = 5000;
    std::vector<std::size_t> steps;  // sweep steps (1..9); empty: all
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    std::size_t grid_resolution = 0;  // >0: record decision grids for run 1
    /// Progress callback (finished jobs, total jobs); may be empty.
    std::function<void(std::size_t, std::size_t)> on_progress;
};

struct RunOutcome {
    std::size_t step = 0;  // 0 for nine_rect
    std::size_t run = 0;
    std::string system;
    MetricReport metrics;    // on the test split
    double delegation = 0;   // hmc_sweep: share of test points whose CM_A delegates to A1
    bool diverged = false;
    std::string error;
};

struct StepSummary {
    std::size_t step = 0;
    std::string system;
    std::size_t runs = 0;
    std::vector<std::pair<std::string, std::pair<double, double>>> metrics;  // name -> (mean, std)
    double mean(const std::string& metric) const;
    double stddev(const std::string& metric) const;
};

struct DecisionGrid {
    std::size_t step = 0;
    std::string system;
    Matrix values;  // rows: x, y, one column per class
    std::vector<std::string> header;
};

struct ExperimentReport {
    ExperimentKind kind = ExperimentKind::hmc_sweep;
    ExperimentConfig config;
    std::vector<RunOutcome> runs;        // ordered by (step, run, system)
    std::vector<StepSummary> summary;    // ordered by (step, system)
    std::vector<DecisionGrid> grids;
    std::vector<std::string> geometry;   // human-readable world description per step

    const StepSummary& find(std::size_t step, const std::string& system) const;
};

/// Runs every (step, run, system) job, in parallel over `threads` workers;
/// the report does not depend on the thread count. Divergent runs are
/// recorded and excluded from the summary.
ExperimentReport run_experiment(ExperimentKind kind, const ExperimentConfig& cfg);

/// Population mean and standard deviation.
std::pair<double, double> mean_std(const std::vector<double>& v);

std::string runs_csv(const ExperimentReport& r);
std::string summary_csv(const ExperimentReport& r);

/// Wrapped outputs over a res x res lattice of cell centres in [0, 1]^2.
DecisionGrid decision_grid(const TrainedSystem& s, std::size_t resolution);

}  // namespace coherent
