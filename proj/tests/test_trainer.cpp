#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "oracles.hpp"
#include "synet/errors.hpp"
#include "synet/scene_gen.hpp"
#include "synet/trainer.hpp"

using namespace synet;

namespace {

std::vector<SceneRecord> toy_dataset(int count, LabelMode mode, uint64_t seed) {
    SceneConfig cfg;
    cfg.height = 48;
    cfg.width = 48;
    cfg.channels = 2;
    std::vector<SceneRecord> out;
    for (int i = 0; i < count; ++i) {
        uint64_t s = derive_seed(seed, static_cast<uint64_t>(i));
        Scene scene = generate_scene(cfg, s);
        TrajectoryTrace traj = simulate_trajectory(scene, s, 2);
        LabelMask labels = make_labels(scene, traj, {mode, 12.0});
        char name[24];
        std::snprintf(name, sizeof(name), "toy_%03d", i);
        out.push_back({name, std::move(scene), std::move(labels)});
    }
    return out;
}

TrainConfig small_config(Branch branch, uint64_t seed) {
    TrainConfig cfg;
    cfg.branch = branch;
    cfg.epochs = 2;
    cfg.batch_size = branch == Branch::PU ? 2 : 1;
    cfg.embed.channels = 2;
    cfg.embed.radius = 1;
    cfg.embed.dim = 8;
    cfg.pu.simclr_sample_cap = 32;
    cfg.pu.sinkhorn_iters = 60;
    cfg.caps = {48, 48, 48};
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("adam leaves params unchanged on zero gradients but advances the step") {
    std::vector<double> p = {1.0, -2.0, 3.0};
    std::vector<double> g = {0.0, 0.0, 0.0};
    std::vector<std::vector<double>*> ps = {&p};
    std::vector<const std::vector<double>*> gs = {&g};
    AdamState st = AdamState::zeros(3);
    adam_step(ps, gs, st, 0.1);
    CHECK(p == std::vector<double>{1.0, -2.0, 3.0});
    CHECK(st.step == 1);
}

TEST_CASE("one adam step from zero state moves by almost exactly -lr per unit gradient") {
    std::vector<double> p = {0.5, 0.5};
    std::vector<double> g = {0.3, -1.7};
    std::vector<std::vector<double>*> ps = {&p};
    std::vector<const std::vector<double>*> gs = {&g};
    AdamState st = AdamState::zeros(2);
    AdamConfig cfg;
    adam_step(ps, gs, st, 0.01, cfg);
    // Bias-corrected first step: mhat = g, vhat = g^2, update = -lr*g/(|g|+eps).
    for (int i = 0; i < 2; ++i) {
        double expected = 0.5 - 0.01 * g[static_cast<size_t>(i)] /
                                    (std::abs(g[static_cast<size_t>(i)]) + cfg.eps);
        CHECK(p[static_cast<size_t>(i)] == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("two adam steps match an independent recurrence evaluation") {
    std::vector<double> p = {1.0};
    std::vector<double> g1 = {0.4}, g2 = {-0.2};
    std::vector<std::vector<double>*> ps = {&p};
    AdamState st = AdamState::zeros(1);
    AdamConfig cfg;
    std::vector<const std::vector<double>*> gs1 = {&g1};
    std::vector<const std::vector<double>*> gs2 = {&g2};
    adam_step(ps, gs1, st, 0.05, cfg);
    adam_step(ps, gs2, st, 0.05, cfg);

    // Recurrence reimplemented from scratch.
    double m = 0, v = 0, x = 1.0;
    int t = 0;
    for (double g : {0.4, -0.2}) {
        ++t;
        m = cfg.beta1 * m + (1 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1 - cfg.beta2) * g * g;
        double mh = m / (1 - std::pow(cfg.beta1, t));
        double vh = v / (1 - std::pow(cfg.beta2, t));
        x -= 0.05 * mh / (std::sqrt(vh) + cfg.eps);
    }
    CHECK(p[0] == doctest::Approx(x).epsilon(1e-15));
}

TEST_CASE("adam rejects shape mismatches") {
    std::vector<double> p = {1.0, 2.0};
    std::vector<double> g = {1.0};
    std::vector<std::vector<double>*> ps = {&p};
    std::vector<const std::vector<double>*> gs = {&g};
    AdamState st = AdamState::zeros(2);
    CHECK_THROWS_AS(adam_step(ps, gs, st, 0.1), ConfigError);
}

TEST_CASE("zero learning rate keeps parameters byte-identical") {
    auto data = toy_dataset(4, LabelMode::PU, 11);
    TrainConfig cfg = small_config(Branch::PU, 5);
    cfg.learning_rate = 0.0;
    cfg.injection_ratio = 0.5;
    TrainResult r = train(data, cfg);

    EmbeddingParams init = init_params(cfg.embed, derive_seed(cfg.seed, 0x9a2));
    CHECK(r.params.w1 == init.w1);
    CHECK(r.params.b1 == init.b1);
    CHECK(r.params.w2 == init.w2);
    CHECK(r.params.b2 == init.b2);
}

TEST_CASE("identical runs produce identical loss logs and checkpoints") {
    auto data = toy_dataset(4, LabelMode::PU, 13);
    TrainConfig cfg = small_config(Branch::PU, 21);
    cfg.injection_ratio = 0.5;
    TrainResult a = train(data, cfg);
    TrainResult b = train(data, cfg);
    REQUIRE(a.log.size() == b.log.size());
    for (size_t i = 0; i < a.log.size(); ++i) CHECK(a.log[i].values == b.log[i].values);
    CHECK(a.params.w1 == b.params.w1);
    CHECK(a.centers.c_neg == b.centers.c_neg);
}

TEST_CASE("pn training runs and degenerate skips stay bounded") {
    auto data = toy_dataset(4, LabelMode::PN, 17);
    TrainConfig cfg = small_config(Branch::PN, 23);
    cfg.injection_ratio = 0.5;
    TrainResult r = train(data, cfg);
    CHECK(!r.log.empty());
    CHECK(r.log_header.front() == "total");
    CHECK(r.degenerate_skips <= static_cast<int>(data.size()) * cfg.epochs);
}

TEST_CASE("training loss decreases on a small PU run") {
    auto data = toy_dataset(8, LabelMode::PU, 29);
    TrainConfig cfg = small_config(Branch::PU, 31);
    cfg.epochs = 5;
    cfg.injection_ratio = 0.25;
    TrainResult r = train(data, cfg);
    double first_epoch = 0.0, last_epoch = 0.0;
    int nf = 0, nl = 0;
    for (const auto& row : r.log) {
        if (row.epoch == 1) {
            first_epoch += row.values[0];
            ++nf;
        }
        if (row.epoch == cfg.epochs) {
            last_epoch += row.values[0];
            ++nl;
        }
    }
    CHECK(last_epoch / nl < first_epoch / nf);
}

TEST_CASE("PU branch with negative weights demands a composed scene") {
    auto data = toy_dataset(3, LabelMode::PU, 37);
    TrainConfig cfg = small_config(Branch::PU, 39);
    cfg.injection_ratio = 0.0;  // no synthetic negatives anywhere
    CHECK_THROWS_AS(train(data, cfg), ConfigError);
    cfg.pu.lambda_neg = 0.0;
    CHECK_NOTHROW(train(data, cfg));
}

TEST_CASE("injection accounting matches round(ratio*N) exactly") {
    auto data = toy_dataset(10, LabelMode::PU, 41);
    TrainConfig cfg = small_config(Branch::PU, 43);
    cfg.epochs = 1;
    cfg.injection_ratio = 0.3;
    TrainResult r = train(data, cfg);
    CHECK(r.injections.size() == 3);
}

TEST_CASE("zero-weight extensions log totals equal to the baseline term bitwise") {
    auto data = toy_dataset(4, LabelMode::PU, 47);
    TrainConfig cfg = small_config(Branch::PU, 49);
    cfg.injection_ratio = 0.5;
    cfg.pu.lambda_neg = 0.0;
    cfg.pu.lambda_rep = 0.0;
    TrainResult r = train(data, cfg);
    for (const auto& row : r.log) CHECK(row.values[0] == row.values[1]);  // total == l_lort
}

TEST_CASE("checkpoint with centers and config echo round-trips") {
    EmbeddingConfig ecfg;
    ecfg.channels = 3;
    ecfg.radius = 2;
    ecfg.dim = 8;
    Checkpoint ck;
    ck.params = init_params(ecfg, 3);
    ck.centers = init_centers(8, 4, 8, 5);
    ck.centers.c_pos.assign(8, 0.25);
    ck.config_json = "{\"branch\":\"pu\"}";

    auto path = std::filesystem::temp_directory_path() / "synet_ckpt_test.synp";
    save_checkpoint(path, ck);
    Checkpoint lo = load_checkpoint(path);
    CHECK(lo.params.w1 == ck.params.w1);
    CHECK(lo.params.b2 == ck.params.b2);
    CHECK(lo.centers.c_pos == ck.centers.c_pos);
    CHECK(lo.centers.c_neg == ck.centers.c_neg);
    CHECK(lo.centers.prototypes == ck.centers.prototypes);
    CHECK(lo.config_json == ck.config_json);
    std::filesystem::remove(path);
}

TEST_CASE("loss log CSV has the documented layout") {
    std::vector<LossLogRow> rows = {{1, 0, {0.5, 0.25}}, {1, 1, {0.375, 0.125}}};
    std::string csv = loss_log_to_csv({"total", "l_lort"}, rows);
    CHECK(csv.substr(0, 19) == "epoch,step,total,l_");
    CHECK(csv.find("1,0,0.5,0.25\n") != std::string::npos);
}
