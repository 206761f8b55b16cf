#include <benchmark/benchmark.h>

#include <memory>
#include <string>

#include "coherent/constraint_loss.hpp"
#include "coherent/constraint_module.hpp"
#include "coherent/dataset.hpp"
#include "coherent/metrics.hpp"
#include "coherent/random.hpp"
#include "coherent/trainer.hpp"

using namespace coherent;

namespace {

Matrix uniform(Rng& rng, std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    for (auto& v : m.data()) v = rng.uniform();
    return m;
}

Matrix bernoulli(Rng& rng, std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    for (auto& v : m.data()) v = rng.uniform() < 0.5 ? 1.0 : 0.0;
    return m;
}

// A_i -> A_{i+1} chain: one long stratum, worst case for the closure.
RuleSet chain(std::size_t n) {
    std::string text;
    for (std::size_t i = 0; i + 1 < n; ++i) text += "A" + std::to_string(i) + " -> A" + std::to_string(i + 1) + "\n";
    return parse_rules(text);
}

void BM_Compile(benchmark::State& state) {
    auto rs = chain(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(compile(rs));
}
BENCHMARK(BM_Compile)->Arg(8)->Arg(32)->Arg(64);

void BM_CmForward(benchmark::State& state) {
    auto c = compile(nine_rect_rules());
    Rng rng(1);
    auto h = uniform(rng, static_cast<std::size_t>(state.range(0)), c.num_classes());
    for (auto _ : state) benchmark::DoNotOptimize(cm_forward(c, h));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CmForward)->Arg(1)->Arg(256)->Arg(4096);

void BM_CmForwardDense(benchmark::State& state) {
    auto c = compile(nine_rect_rules());
    Rng rng(1);
    auto h = uniform(rng, static_cast<std::size_t>(state.range(0)), c.num_classes());
    for (auto _ : state) benchmark::DoNotOptimize(cm_forward_dense(c, h));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CmForwardDense)->Arg(256)->Arg(4096);

void BM_CmForwardHierarchy(benchmark::State& state) {
    auto c = compile(chain(static_cast<std::size_t>(state.range(0))));
    Rng rng(2);
    auto h = uniform(rng, 1024, c.num_classes());
    for (auto _ : state) benchmark::DoNotOptimize(cm_forward_hmc(c.descendant_mask(), h));
    state.SetItemsProcessed(state.iterations() * 1024);
}
BENCHMARK(BM_CmForwardHierarchy)->Arg(8)->Arg(32);

void BM_Closs(benchmark::State& state) {
    auto c = compile(nine_rect_rules());
    Rng rng(3);
    const auto n = static_cast<std::size_t>(state.range(0));
    auto h = uniform(rng, n, c.num_classes());
    auto y = bernoulli(rng, n, c.num_classes());
    for (auto _ : state) benchmark::DoNotOptimize(closs(c, h, y));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Closs)->Arg(256)->Arg(4096);

void BM_ClossHierarchy(benchmark::State& state) {
    auto c = compile(hmc_world_rules());
    Rng rng(4);
    auto h = uniform(rng, 4096, c.num_classes());
    auto y = bernoulli(rng, 4096, c.num_classes());
    for (auto _ : state) benchmark::DoNotOptimize(closs_hmc(c.descendant_mask(), h, y));
    state.SetItemsProcessed(state.iterations() * 4096);
}
BENCHMARK(BM_ClossHierarchy);

void BM_AuPrc(benchmark::State& state) {
    Rng rng(5);
    const auto n = static_cast<std::size_t>(state.range(0));
    auto s = uniform(rng, n, 9);
    auto y = bernoulli(rng, n, 9);
    for (auto _ : state) benchmark::DoNotOptimize(au_prc(s, y));
}
BENCHMARK(BM_AuPrc)->Arg(1000)->Arg(10000);

// Ten full-batch epochs of CCN training on the nine-rectangle problem.
void BM_TrainEpochs(benchmark::State& state) {
    auto p = gen_nine_rect(7);
    auto circuit = std::make_shared<const ConstraintCircuit>(compile(p.rules));
    auto model = init_model({p.data.features.cols(), 7, p.data.labels.cols()}, Activation::tanh, 7);
    TrainConfig cfg;
    cfg.epochs = 10;
    for (auto _ : state) benchmark::DoNotOptimize(train(model, p.data, circuit, Wrapper::ccn_closs, cfg));
    state.SetItemsProcessed(state.iterations() * 10);
}
BENCHMARK(BM_TrainEpochs)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
