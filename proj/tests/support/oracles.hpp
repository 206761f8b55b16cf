// Brute-force reference implementations and random instance generators shared
// by the unit tests and the acceptance runner. Nothing here reuses the library
// code path it is meant to check.
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "coherent/common.hpp"
#include "coherent/random.hpp"
#include "coherent/rules.hpp"
#include "coherent/strata.hpp"

namespace coherent::testing {

struct ProgramShape {
    std::size_t min_classes = 2;
    std::size_t max_classes = 10;
    std::size_t max_rules = 20;
    std::size_t max_body = 3;
    std::size_t levels = 3;       // negative literals only point to lower levels
    double negation = 0.35;       // chance that an eligible literal is negated
    double fact = 0.05;
};

/// Random stratified program over classes C0..C{n-1}.
RuleSet random_program(Rng& rng, const ProgramShape& shape = {});

/// Random class hierarchy (child index > parent index, so acyclic).
RuleSet random_hierarchy(Rng& rng, std::size_t classes, double edge_prob);

/// Scores in (0, 1) on a coarse grid, so ties and exact 0.5 happen.
std::vector<double> random_scores(Rng& rng, std::size_t n, bool coarse);
std::vector<double> random_labels(Rng& rng, std::size_t n, double p = 0.5);

/// Constraint module by Kleene iteration on the original stratum rules: start
/// from h and raise heads to their body values until nothing changes.
std::vector<double> cm_fixpoint(const RuleSet& rs, const Stratification& st, std::span<const double> h);

/// Fixed-point residual: max over classes of |m_A - max(h_A, max body values)|, where
/// body values of same-stratum atoms use m itself.
double fixed_point_residual(const RuleSet& rs, std::span<const double> h, std::span<const double> m);

/// Smallest set containing `start` closed under the definite rules of `rs`
/// (negative literals are ignored).
std::vector<bool> least_model(const RuleSet& rs, std::vector<bool> start);

/// Every stable model of rs + facts(base), found by enumerating all subsets.
std::vector<std::vector<bool>> all_stable_models(const RuleSet& rs, const std::vector<bool>& base);

bool set_coherent(const RuleSet& rs, const std::vector<bool>& m);
bool set_supported(const RuleSet& rs, const std::vector<bool>& base, const std::vector<bool>& m);
bool set_minimal(const RuleSet& rs, const std::vector<bool>& base, const std::vector<bool>& m);
/// All sets that extend `base` and are coherent, supported and minimal.
std::vector<std::vector<bool>> all_supported_minimal_sets(const RuleSet& rs, const std::vector<bool>& base);

/// The same four properties taken one stratum at a time: stratum i extends
/// the set fixed so far by classes of stratum i only, and must be coherent,
/// supported and minimal with respect to the rules of stratum i. Returns every
/// complete set reachable that way.
std::vector<std::vector<bool>> stratumwise_supported_minimal_sets(const RuleSet& rs, const Stratification& st,
                                                                  const std::vector<bool>& base);

std::vector<bool> above(std::span<const double> s, double threshold = 0.5);

// Metric oracles (pairwise counting, no sorting).
double oracle_au_prc(const Matrix& s, const Matrix& y);
double oracle_average_precision(const Matrix& s, const Matrix& y);
double oracle_coverage(const Matrix& s, const Matrix& y);
double oracle_hamming(const Matrix& s, const Matrix& y, double t = 0.5);
double oracle_accuracy(const Matrix& s, const Matrix& y, double t = 0.5);
double oracle_one_error(const Matrix& s, const Matrix& y);
double oracle_ranking_loss(const Matrix& s, const Matrix& y);

/// Central differences of f at x with step `eps`.
std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> x, double eps);

/// True when two of the values h_i, 1 - h_j lie within `margin` of each other.
/// Every min/max in the module compares such values, so away from these
/// points the loss is smooth and finite differences are reliable.
bool near_tie(std::span<const double> h, double margin);

}  // namespace coherent::testing
