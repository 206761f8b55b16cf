#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "coherent/constraint_loss.hpp"
#include "coherent/trainer.hpp"
#include "oracles.hpp"

using namespace coherent;

namespace {

std::shared_ptr<const ConstraintCircuit> hmc_circuit() {
    return std::make_shared<const ConstraintCircuit>(compile(hmc_world_rules()));
}

TabularDataset small_hmc(std::uint64_t seed) {
    auto [r1, r2] = sweep_geometry(5);
    return gen_rectangles(hmc_world(r1, r2, seed, 400));
}

std::string temp_path(const std::string& name) {
    const auto dir = std::filesystem::path(COHERENT_TEST_DATA_DIR) / "trainer";
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

}  // namespace

TEST(TrainConfig, ParsesKeyValueLines) {
    auto cfg = parse_train_config("# comment\nepochs = 12\nlearning_rate=0.5\nretrain_on_train_val = true\nbatch_size = 8\n");
    EXPECT_EQ(cfg.epochs, 12u);
    EXPECT_EQ(cfg.adam.learning_rate, 0.5);
    EXPECT_TRUE(cfg.retrain_on_train_val);
    EXPECT_EQ(cfg.batch_size, 8u);
    EXPECT_THROW(parse_train_config("nonsense = 1\n"), ParseError);
    EXPECT_THROW(parse_train_config("epochs = ten\n"), ParseError);
    EXPECT_THROW(parse_train_config("epochs\n"), ParseError);
}

TEST(Wrappers, NamesRoundTrip) {
    for (auto w : {Wrapper::raw, Wrapper::f_plus_min, Wrapper::g_plus_max, Wrapper::h_plus_postproc, Wrapper::h_cm_bce,
                   Wrapper::ccn_closs})
        EXPECT_EQ(wrapper_from_string(to_string(w)), w);
    EXPECT_THROW(wrapper_from_string("nope"), Error);
}

TEST(Wrappers, InferenceTransforms) {
    auto c = compile(parse_rules("B -> A\nC -> B\n"));  // classes B, A, C
    auto h = Matrix::from_rows({{0.4, 0.2, 0.9}});
    // f+: minimum over ancestors and self.
    EXPECT_EQ(apply_wrapper(Wrapper::f_plus_min, &c, h), Matrix::from_rows({{0.2, 0.2, 0.2}}));
    // g+ and the module: maximum over descendants and self.
    EXPECT_EQ(apply_wrapper(Wrapper::g_plus_max, &c, h), Matrix::from_rows({{0.9, 0.9, 0.9}}));
    EXPECT_EQ(apply_wrapper(Wrapper::ccn_closs, &c, h), Matrix::from_rows({{0.9, 0.9, 0.9}}));
    EXPECT_EQ(apply_wrapper(Wrapper::raw, nullptr, h), h);
    EXPECT_THROW(apply_wrapper(Wrapper::h_cm_bce, nullptr, h), SemanticError);
}

TEST(Wrappers, ExclusiveLabels) {
    auto c = compile(parse_rules("B -> A\nC -> B\n"));  // classes B, A, C
    auto y = Matrix::from_rows({{1, 1, 0}, {1, 1, 1}, {0, 1, 0}});
    EXPECT_EQ(exclusive_labels(c.descendant_mask(), y), Matrix::from_rows({{1, 0, 0}, {0, 0, 1}, {0, 1, 0}}));
}

TEST(Wrappers, BaselinesNeedHierarchies) {
    auto normal = std::make_shared<const ConstraintCircuit>(compile(parse_rules("A1 -> A\nA, !A1 -> A2\n")));
    auto m = init_model({2, 3}, Activation::tanh, 0);
    EXPECT_THROW(wrap_baseline(m, Wrapper::f_plus_min, normal), SemanticError);
    EXPECT_THROW(wrap_baseline(m, Wrapper::ccn_closs, nullptr), SemanticError);
    EXPECT_THROW(wrap_baseline(init_model({2, 2}, Activation::tanh, 0), Wrapper::ccn_closs, normal), DimensionError);
    EXPECT_NO_THROW(wrap_baseline(m, Wrapper::h_plus_postproc, normal));
}

TEST(Wrappers, LossIsMeanOverElements) {
    auto c = compile(hmc_world_rules());
    auto h = Matrix::from_rows({{0.3, 0.6}, {0.8, 0.1}});
    auto y = Matrix::from_rows({{0, 1}, {1, 1}});
    auto wl = wrapper_loss(Wrapper::ccn_closs, &c, h, y);
    auto raw = closs(c, h, y);
    EXPECT_NEAR(wl.loss, raw.loss / 4, 1e-15);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(wl.gradient.data()[i], raw.gradient.data()[i] / 4, 1e-15);
}

TEST(Training, ReducesLossAndIsDeterministic) {
    auto data = small_hmc(1);
    auto circuit = hmc_circuit();
    TrainConfig cfg;
    cfg.epochs = 300;
    cfg.seed = 5;
    auto model = init_model({2, 4, 2}, Activation::tanh, 3);
    auto a = train(model, data, circuit, Wrapper::ccn_closs, cfg);
    auto b = train(model, data, circuit, Wrapper::ccn_closs, cfg);
    EXPECT_EQ(a.system.model, b.system.model);
    ASSERT_EQ(a.history.size(), 300u);
    EXPECT_LT(a.history.back().train_loss, a.history.front().train_loss);
    EXPECT_EQ(a.best_epoch, 300u);

    cfg.batch_size = 32;
    auto c = train(model, data, circuit, Wrapper::ccn_closs, cfg);
    EXPECT_LT(c.history.back().train_loss, c.history.front().train_loss);
}

TEST(Training, EarlyStoppingUsesValidation) {
    auto data = small_hmc(2);
    // Move part of the training split into validation.
    data.val.assign(data.train.begin() + 150, data.train.end());
    data.train.resize(150);
    TrainConfig cfg;
    cfg.epochs = 400;
    cfg.patience = 20;
    auto model = init_model({2, 4, 2}, Activation::tanh, 1);
    auto r = train(model, data, hmc_circuit(), Wrapper::ccn_closs, cfg);
    EXPECT_GT(r.best_epoch, 0u);
    EXPECT_LE(r.best_epoch, r.history.size());
    for (const auto& rec : r.history) EXPECT_FALSE(std::isnan(rec.val_au_prc));

    cfg.retrain_on_train_val = true;
    auto rt = train(model, data, hmc_circuit(), Wrapper::ccn_closs, cfg);
    EXPECT_EQ(rt.best_epoch, r.best_epoch);
    EXPECT_EQ(rt.history.size(), r.history.size() + r.best_epoch);
}

TEST(Training, RejectsMismatchedModels) {
    auto data = small_hmc(3);
    TrainConfig cfg;
    cfg.epochs = 1;
    EXPECT_THROW(train(init_model({3, 2}, Activation::tanh, 0), data, hmc_circuit(), Wrapper::ccn_closs, cfg),
                 DimensionError);
    EXPECT_THROW(train(init_model({2, 3}, Activation::tanh, 0), data, hmc_circuit(), Wrapper::ccn_closs, cfg),
                 DimensionError);
}

TEST(Checkpoint, RoundTrip) {
    auto m = init_model({3, 5, 2}, Activation::relu, 77);
    const auto path = temp_path("model.bin");
    save_checkpoint(path, m, Wrapper::g_plus_max);
    auto [back, w] = load_checkpoint(path);
    EXPECT_EQ(back, m);
    EXPECT_EQ(w, Wrapper::g_plus_max);

    const auto bad = temp_path("bad.bin");
    std::ofstream(bad) << "not a checkpoint";
    EXPECT_THROW(load_checkpoint(bad), ParseError);
    {
        std::ifstream in(path, std::ios::binary);
        std::string bytes((std::istreambuf_iterator<char>(in)), {});
        std::ofstream(temp_path("short.bin"), std::ios::binary) << bytes.substr(0, bytes.size() - 3);
        std::ofstream(temp_path("long.bin"), std::ios::binary) << bytes << "x";
    }
    EXPECT_THROW(load_checkpoint(temp_path("short.bin")), ParseError);
    EXPECT_THROW(load_checkpoint(temp_path("long.bin")), ParseError);
}
