#include "coherent/mlp.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace coherent {

std::string to_string(Activation a) { return a == Activation::tanh ? "tanh" : "relu"; }

Activation activation_from_string(const std::string& s) {
    if (s == "tanh") return Activation::tanh;
    if (s == "relu") return Activation::relu;
    throw Error("unknown activation '" + s + "' (expected tanh or relu)");
}

std::size_t MlpModel::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.w.size() + l.b.size();
    return n;
}

MlpModel init_model(const std::vector<std::size_t>& sizes, Activation activation, std::uint64_t seed) {
    if (sizes.size() < 2) throw DimensionError("a network needs at least an input and an output size");
    for (auto s : sizes)
        if (s == 0) throw DimensionError("layer sizes must be positive");
    MlpModel m;
    m.sizes = sizes;
    m.activation = activation;
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        DenseLayer layer;
        layer.in = sizes[l];
        layer.out = sizes[l + 1];
        const double bound = std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
        layer.w.resize(layer.in * layer.out);
        for (auto& w : layer.w) w = rng.uniform(-bound, bound);
        layer.b.assign(layer.out, 0.0);
        m.layers.push_back(std::move(layer));
    }
    return m;
}

namespace {

// A row-major N x k Matrix has the memory layout of a column-major k x N
// matrix, so samples become columns without copying.
using ColMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor>;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const ColMat> cols_of(const Matrix& m) { return {m.data().data(), Eigen::Index(m.cols()), Eigen::Index(m.rows())}; }
Eigen::Map<ColMat> cols_of(Matrix& m) { return {m.data().data(), Eigen::Index(m.cols()), Eigen::Index(m.rows())}; }

Eigen::Map<const RowMat> weights(const DenseLayer& l) { return {l.w.data(), Eigen::Index(l.out), Eigen::Index(l.in)}; }
Eigen::Map<const Eigen::VectorXd> bias(const DenseLayer& l) { return {l.b.data(), Eigen::Index(l.out)}; }

}  // namespace

Matrix forward(const MlpModel& m, const Matrix& x, ForwardCache* cache, double dropout, Rng* rng) {
    if (x.cols() != m.input_dim()) {
        throw DimensionError("input has " + std::to_string(x.cols()) + " features, model expects " +
                             std::to_string(m.input_dim()));
    }
    if (!(dropout >= 0.0 && dropout < 1.0)) throw DimensionError("dropout rate must lie in [0, 1)");
    const bool drop = rng != nullptr && dropout > 0.0;
    const double scale = 1.0 / (1.0 - dropout);
    if (cache) {
        cache->hidden.resize(m.layers.size() - 1);
        cache->keep.resize(drop ? m.layers.size() - 1 : 0);
        cache->input = x;
    }

    Matrix a = x;
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        const auto& layer = m.layers[l];
        // Activations are computed in Eigen-owned (aligned) storage: on an
        // unaligned map Eigen peels leading elements through scalar std::exp,
        // which rounds differently from its packet exp.
        ColMat zo = weights(layer) * cols_of(a);
        zo.colwise() += bias(layer);
        auto za = zo.array();
        Matrix z(x.rows(), layer.out);
        if (l + 1 == m.layers.size()) {
            // exp overflow gives 1 / inf = 0, the correct limit.
            za = 1.0 / (1.0 + (-za).exp());
            cols_of(z) = zo;
            if (cache) cache->output = z;
            return z;
        }
        if (m.activation == Activation::tanh) {
            // tanh(z) = 1 - 2 / (1 + e^{2z}); saturates correctly at both ends.
            za = 1.0 - 2.0 / (1.0 + (2.0 * za).exp());
        } else {
            za = za.max(0.0);
        }
        cols_of(z) = zo;
        if (cache) cache->hidden[l] = z;
        if (drop) {
            Matrix keep(z.rows(), z.cols());
            for (auto& k : keep.data()) k = rng->uniform() < dropout ? 0.0 : scale;
            cols_of(z).array() *= cols_of(keep).array();
            if (cache) cache->keep[l] = std::move(keep);
        }
        a = std::move(z);
    }
    return a;  // unreachable: the last layer returns above
}

Gradients::Gradients(const MlpModel& m) {
    for (const auto& l : m.layers) {
        w.emplace_back(l.w.size(), 0.0);
        b.emplace_back(l.b.size(), 0.0);
    }
}

void Gradients::zero() {
    for (auto& v : w) std::fill(v.begin(), v.end(), 0.0);
    for (auto& v : b) std::fill(v.begin(), v.end(), 0.0);
}

void backward(const MlpModel& m, const ForwardCache& cache, const Matrix& grad_output, Gradients& g) {
    const auto& out = cache.output;
    if (grad_output.rows() != out.rows() || grad_output.cols() != out.cols()) {
        throw DimensionError("output gradient shape differs from the cached forward pass");
    }
    const auto y = cols_of(out).array();
    ColMat delta = (cols_of(grad_output).array() * y * (1.0 - y)).matrix();

    const bool dropped = !cache.keep.empty();
    for (std::size_t l = m.layers.size(); l-- > 0;) {
        const auto& layer = m.layers[l];
        Eigen::Map<RowMat> gw(g.w[l].data(), Eigen::Index(layer.out), Eigen::Index(layer.in));
        Eigen::Map<Eigen::VectorXd> gb(g.b[l].data(), Eigen::Index(layer.out));
        // Reduce into owned storage; into an unaligned map Eigen may switch
        // between packet and scalar summation depending on the address.
        const Eigen::VectorXd db = delta.rowwise().sum();
        gb += db;
        if (l == 0) {
            gw.noalias() += delta * cols_of(cache.input).transpose();
            break;
        }
        const auto h = cols_of(cache.hidden[l - 1]).array();
        ColMat input = dropped ? ColMat((h * cols_of(cache.keep[l - 1]).array()).matrix()) : ColMat(h.matrix());
        gw.noalias() += delta * input.transpose();

        ColMat prev = weights(layer).transpose() * delta;
        if (dropped) prev.array() *= cols_of(cache.keep[l - 1]).array();
        if (m.activation == Activation::tanh) {
            prev.array() *= 1.0 - h * h;
        } else {
            prev.array() *= (h > 0.0).cast<double>();
        }
        delta = std::move(prev);
    }
}

Adam::Adam(const MlpModel& m, AdamConfig cfg) : cfg_(cfg) {
    if (!(cfg.learning_rate > 0.0) || !(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0) || !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0) ||
        !(cfg.eps > 0.0) || !(cfg.weight_decay >= 0.0)) {
        throw Error("invalid Adam hyperparameters");
    }
    for (const auto& l : m.layers) {
        mw_.emplace_back(l.w.size(), 0.0);
        vw_.emplace_back(l.w.size(), 0.0);
        mb_.emplace_back(l.b.size(), 0.0);
        vb_.emplace_back(l.b.size(), 0.0);
    }
}

void Adam::update(std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m1,
                  std::vector<double>& m2) {
    const double b1 = cfg_.beta1, b2 = cfg_.beta2;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double gi = g[i] + cfg_.weight_decay * p[i];
        m1[i] = b1 * m1[i] + (1.0 - b1) * gi;
        m2[i] = b2 * m2[i] + (1.0 - b2) * gi * gi;
        const double mhat = m1[i] / (1.0 - c1_);
        const double vhat = m2[i] / (1.0 - c2_);
        p[i] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
}

void Adam::step(MlpModel& m, const Gradients& g) {
    ++t_;
    c1_ *= cfg_.beta1;
    c2_ *= cfg_.beta2;
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        update(m.layers[l].w, g.w[l], mw_[l], vw_[l]);
        update(m.layers[l].b, g.b[l], mb_[l], vb_[l]);
    }
}

}  // namespace coherent
