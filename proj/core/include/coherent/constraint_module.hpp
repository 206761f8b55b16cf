#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coherent/circuit.hpp"
#include "coherent/common.hpp"

namespace coherent {

/// Per-stratum intermediate values of one evaluation: `body_values[k][j]` is the
/// body value of closed rule j of stratum k, `outputs[k]` is CM after stratum k.
struct EvalTrace {
    std::vector<double> input;
    std::vector<std::vector<double>> body_values;
    std::vector<std::vector<double>> outputs;
};

/// Which input each evaluated output was copied from, for reverse-mode
/// differentiation. Entry (n, e) covers sample n and the e-th (stratum, head)
/// pair in stratum-major order; the output equals a constant (coef 0) or
/// const + coef * prev[src] with coef in {-1, +1}. Ties pick the first
/// candidate: the class's own value, then its rules in order; within a body,
/// positive atoms ascending, then negative atoms ascending.
struct RouteTape {
    std::size_t rows = 0;
    std::size_t stride = 0;
    std::vector<std::int32_t> src;
    std::vector<std::int8_t> coef;
};

/// Constraint module on one score vector. Throws DimensionError on a length
/// mismatch or entries outside [0, 1] (NaN included).
std::vector<double> cm_forward(const ConstraintCircuit& c, std::span<const double> h, EvalTrace* trace = nullptr);

/// Row-wise constraint module; rows are independent, so the result equals
/// per-row evaluation bit for bit.
Matrix cm_forward(const ConstraintCircuit& c, const Matrix& h, RouteTape* tape = nullptr);

/// Literal dense-matrix evaluation (stacked C, B+, B-, IH, V). Slow; kept as an
/// independent formulation to cross-check the sparse path.
Matrix cm_forward_dense(const ConstraintCircuit& c, const Matrix& h);

/// Hierarchy fast path: CM_A = max over the descendants B of A of h_B.
std::vector<double> cm_forward_hmc(const Matrix& mask, std::span<const double> h);
Matrix cm_forward_hmc(const Matrix& mask, const Matrix& h);

/// Vector-Jacobian product through a recorded evaluation: given dL/d(output),
/// returns dL/d(input).
Matrix route_backward(const ConstraintCircuit& c, const RouteTape& tape, Matrix grad_out);

/// Indicator matrix of scores strictly greater than `threshold`.
Matrix predict(const Matrix& scores, double threshold = 0.5);

/// Non-empty when thresholding at `threshold` voids the semantic guarantees
/// (negation is fixed to 1 - v, so only 0.5 is safe for non-definite rules).
std::optional<std::string> threshold_warning(const ConstraintCircuit& c, double threshold);

/// Fraction of rows where CM_A is taken from a strict subclass whose raw score
/// exceeds h_A. Requires a hierarchy circuit; classes without subclasses give 0.
double delegation_rate(const ConstraintCircuit& c, const Matrix& h, ClassId a);

namespace detail {
void check_scores(std::span<const double> v, std::size_t expected, const char* what);
}

}  // namespace coherent
