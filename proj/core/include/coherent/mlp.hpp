#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "coherent/common.hpp"
#include "coherent/random.hpp"

namespace coherent {

enum class Activation { tanh, relu };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct DenseLayer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> w;  // out x in, row-major
    std::vector<double> b;
};

/// Feedforward network: hidden layers use `activation`, the output layer is a sigmoid.
struct MlpModel {
    std::vector<std::size_t> sizes;  // input, hidden..., output
    Activation activation = Activation::tanh;
    std::vector<DenseLayer> layers;

    std::size_t input_dim() const { return sizes.front(); }
    std::size_t output_dim() const { return sizes.back(); }
    std::size_t parameter_count() const;

    friend bool operator==(const MlpModel& a, const MlpModel& b) {
        if (a.sizes != b.sizes || a.activation != b.activation) return false;
        for (std::size_t i = 0; i < a.layers.size(); ++i)
            if (a.layers[i].w != b.layers[i].w || a.layers[i].b != b.layers[i].b) return false;
        return true;
    }
};

/// Weights uniform in ±sqrt(6 / (fan_in + fan_out)), biases zero.
MlpModel init_model(const std::vector<std::size_t>& sizes, Activation activation, std::uint64_t seed);

/// Values kept by a training-mode forward pass for the backward pass.
struct ForwardCache {
    std::vector<Matrix> hidden;  // activation outputs before dropout, one per hidden layer
    std::vector<Matrix> keep;    // inverted-dropout multipliers (empty when dropout is off)
    Matrix input;
    Matrix output;
};

/// Sigmoid outputs for each row of `x`. When `rng` is given and `dropout` > 0,
/// hidden units are dropped with probability `dropout` and survivors scaled by
/// 1 / (1 - dropout).
Matrix forward(const MlpModel& m, const Matrix& x, ForwardCache* cache = nullptr, double dropout = 0.0,
               Rng* rng = nullptr);

struct Gradients {
    std::vector<std::vector<double>> w;
    std::vector<std::vector<double>> b;
    explicit Gradients(const MlpModel& m);
    void zero();
};

/// Accumulates parameter gradients given dL/d(output) for the cached pass.
void backward(const MlpModel& m, const ForwardCache& cache, const Matrix& grad_output, Gradients& g);

struct AdamConfig {
    double learning_rate = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;  // L2 term added to the gradient
};

/// Adam with bias-corrected moments.
class Adam {
public:
    Adam(const MlpModel& m, AdamConfig cfg);
    void step(MlpModel& m, const Gradients& g);
    std::uint64_t steps() const noexcept { return t_; }

private:
    void update(std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m1, std::vector<double>& m2);

    AdamConfig cfg_;
    std::uint64_t t_ = 0;
    double c1_ = 1.0, c2_ = 1.0;
    std::vector<std::vector<double>> mw_, vw_, mb_, vb_;
};

}  // namespace coherent
