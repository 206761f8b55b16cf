#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "coherent/circuit.hpp"
#include "coherent/common.hpp"
#include "coherent/dataset.hpp"
#include "coherent/mlp.hpp"

namespace coherent {

/// How a network's outputs are trained and turned into predictions.
///  raw              BCE on h; predicts h
///  f_plus_min       BCE on h; predicts min over ancestors (incl. self) of h
///  g_plus_max       BCE on exclusive labels y_A * prod(1 - y_D) over strict
///                   descendants D; predicts max over descendants of h
///  h_plus_postproc  BCE on h; predicts CM(h)
///  h_cm_bce         BCE on CM(h); predicts CM(h)
///  ccn_closs        constraint loss; predicts CM(h)
enum class Wrapper { raw, f_plus_min, g_plus_max, h_plus_postproc, h_cm_bce, ccn_closs };

std::string to_string(Wrapper w);
Wrapper wrapper_from_string(const std::string& s);
/// The hierarchy-only wrappers need a circuit compiled from a class hierarchy.
bool wrapper_needs_hierarchy(Wrapper w);

struct TrainConfig {
    std::size_t epochs = 20000;
    AdamConfig adam;
    double dropout = 0.0;
    std::size_t batch_size = 0;  // 0: full batch
    std::size_t patience = 0;    // 0: no early stopping
    bool retrain_on_train_val = false;
    std::uint64_t seed = 0;      // shuffling and dropout
    /// Called after every epoch with (epoch, mean training loss); may be empty.
    std::function<void(std::size_t, double)> on_epoch;
};

/// Parses `key = value` lines (`#` comments). Keys: epochs, learning_rate,
/// beta1, beta2, eps, weight_decay, dropout, batch_size, patience,
/// retrain_on_train_val, seed.
TrainConfig parse_train_config(std::string_view text, TrainConfig base = {});

class TrainingDivergedError : public Error {
public:
    TrainingDivergedError(const std::string& msg, std::size_t epoch) : Error(msg), epoch_(epoch) {}
    std::size_t epoch() const noexcept { return epoch_; }

private:
    std::size_t epoch_;
};

/// A network together with its inference wrapper.
struct TrainedSystem {
    MlpModel model;
    Wrapper wrapper = Wrapper::raw;
    std::shared_ptr<const ConstraintCircuit> circuit;

    /// Raw network outputs.
    Matrix scores(const Matrix& x) const;
    /// Wrapped outputs.
    Matrix infer(const Matrix& x) const;
};

/// Applies the wrapper's inference post-processing to raw outputs `h`.
Matrix apply_wrapper(Wrapper w, const ConstraintCircuit* c, const Matrix& h);

/// Wraps an already trained model; checks that the circuit suits the wrapper.
TrainedSystem wrap_baseline(MlpModel model, Wrapper kind, std::shared_ptr<const ConstraintCircuit> circuit);

/// Training targets used by g_plus_max: a class keeps its label only when no
/// strict descendant is labelled.
Matrix exclusive_labels(const Matrix& mask, const Matrix& y);

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_au_prc = 0.0;  // NaN when not evaluated
};

struct TrainResult {
    TrainedSystem system;
    std::vector<EpochRecord> history;
    std::size_t best_epoch = 0;  // epochs of the returned model
};

/// Trains `model` on the dataset's training split. With patience > 0 the
/// validation split's AU(PRC) of the wrapped outputs drives early stopping and
/// the best model is returned; with retrain_on_train_val the initial model is
/// then retrained on train + val for the best epoch count.
TrainResult train(const MlpModel& model, const TabularDataset& data, std::shared_ptr<const ConstraintCircuit> circuit,
                  Wrapper wrapper, const TrainConfig& cfg);

/// Mean loss over N x L elements and its gradient w.r.t. the raw outputs.
struct WrappedLoss {
    double loss;
    Matrix gradient;
};
WrappedLoss wrapper_loss(Wrapper w, const ConstraintCircuit* c, const Matrix& h, const Matrix& y);

/// Versioned little-endian checkpoint: magic "COHRNT\0\1", u32 version,
/// u32 activation, u32 wrapper, u32 layer-size count, u64 sizes, then every
/// layer's weights and biases as IEEE-754 doubles.
void save_checkpoint(const std::string& path, const MlpModel& m, Wrapper w);
std::pair<MlpModel, Wrapper> load_checkpoint(const std::string& path);

void write_history_csv(const std::string& path, const std::vector<EpochRecord>& history);

}  // namespace coherent
