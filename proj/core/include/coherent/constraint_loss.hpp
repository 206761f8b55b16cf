#pragma once

#include <span>
#include <vector>

#include "coherent/circuit.hpp"
#include "coherent/common.hpp"
#include "coherent/constraint_module.hpp"

namespace coherent {

/// Log arguments are clamped to [kLogClamp, 1 - kLogClamp]. The gradient is
/// taken as if the clamp were absent at the clamped point (straight-through),
/// which keeps its sign.
inline constexpr double kLogClamp = 1e-12;

/// Loss summed over classes with its gradient with respect to the raw scores.
struct LossResult {
    double loss = 0.0;
    std::vector<double> gradient;
    std::vector<double> targets;
};

/// Same, summed over all rows of a batch. The sum is not taken row by row, so
/// it may differ from the sum of per-row losses in the last bits.
struct BatchLossResult {
    double loss = 0.0;
    Matrix gradient;
    Matrix targets;
};

/// Ground-truth-masked targets (CM+ where y = 1, CM- where y = 0).
std::vector<double> closs_targets(const ConstraintCircuit& c, std::span<const double> h, std::span<const double> y,
                                  EvalTrace* trace = nullptr);
Matrix closs_targets(const ConstraintCircuit& c, const Matrix& h, const Matrix& y, RouteTape* tape = nullptr);

LossResult closs(const ConstraintCircuit& c, std::span<const double> h, std::span<const double> y);
BatchLossResult closs(const ConstraintCircuit& c, const Matrix& h, const Matrix& y);

/// Hierarchy fast path: targets (1 - y) * CM + y * max over descendants of (h * y).
LossResult closs_hmc(const Matrix& mask, std::span<const double> h, std::span<const double> y);
BatchLossResult closs_hmc(const Matrix& mask, const Matrix& h, const Matrix& y);

/// Plain binary cross-entropy of `scores` against `y`; gradient w.r.t. `scores`.
LossResult bce_loss(std::span<const double> scores, std::span<const double> y);
BatchLossResult bce_loss(const Matrix& scores, const Matrix& y);

/// Binary cross-entropy applied after the constraint module; gradient w.r.t. h.
BatchLossResult cm_bce_loss(const ConstraintCircuit& c, const Matrix& h, const Matrix& y);

namespace detail {
void check_labels(std::span<const double> y, std::size_t expected);
/// Adds the clamped BCE of `t` against `y` to `loss` and writes dL/dt into `grad`.
void bce_terms(std::span<const double> t, std::span<const double> y, double& loss, std::span<double> grad);
}  // namespace detail

}  // namespace coherent
