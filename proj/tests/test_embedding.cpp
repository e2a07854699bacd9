#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "oracles.hpp"
#include "synet/embedding.hpp"
#include "synet/errors.hpp"
#include "synet/rng.hpp"
#include "synet/scene_gen.hpp"

using namespace synet;

namespace {

Scene small_scene(uint64_t seed, int h = 16, int w = 16, int channels = 2) {
    SceneConfig cfg;
    cfg.height = std::max(32, h);
    cfg.width = std::max(32, w);
    cfg.channels = channels;
    Scene full = generate_scene(cfg, seed);
    if (h == cfg.height && w == cfg.width) return full;
    Scene s;
    s.height = h;
    s.width = w;
    s.channels = channels;
    s.seed = seed;
    s.terrain = Grid<uint8_t>(h, w);
    s.data.resize(static_cast<size_t>(channels) * h * w);
    for (int k = 0; k < channels; ++k)
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c) s.value(k, r, c) = full.value(k, r, c);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) s.terrain.at(r, c) = full.terrain.at(r, c);
    return s;
}

EmbeddingConfig small_shape() {
    EmbeddingConfig cfg;
    cfg.channels = 2;
    cfg.radius = 1;
    cfg.dim = 6;
    return cfg;
}

}  // namespace

TEST_CASE("zero weights with nonzero bias output the normalized bias") {
    EmbeddingConfig cfg = small_shape();
    EmbeddingParams p = init_params(cfg, 1);
    std::fill(p.w1.begin(), p.w1.end(), 0.0);
    std::fill(p.b1.begin(), p.b1.end(), 0.0);
    std::fill(p.w2.begin(), p.w2.end(), 0.0);
    p.b2 = {0.3, -0.4, 0.0, 0.5, 0.0, 0.1};
    double n = std::sqrt(norm2(p.b2.data(), 6));

    Scene s = small_scene(3);
    FeatureMap f = forward(s, p);
    for (int r = 0; r < f.height; ++r)
        for (int c = 0; c < f.width; ++c)
            for (int d = 0; d < 6; ++d)
                CHECK(f.at(r, c)[d] == doctest::Approx(p.b2[static_cast<size_t>(d)] / n).epsilon(1e-12));
}

TEST_CASE("forward is deterministic") {
    EmbeddingParams p = init_params(small_shape(), 9);
    Scene s = small_scene(4);
    FeatureMap a = forward(s, p);
    FeatureMap b = forward(s, p);
    CHECK(a.v == b.v);
}

TEST_CASE("every output vector is unit norm") {
    EmbeddingParams p = init_params(small_shape(), 5);
    Scene s = small_scene(6);
    FeatureMap f = forward(s, p);
    for (int r = 0; r < f.height; ++r)
        for (int c = 0; c < f.width; ++c) {
            double n = std::sqrt(norm2(f.at(r, c), f.dim));
            CHECK(std::abs(n - 1.0) <= 1e-6);
        }
}

TEST_CASE("zero-norm guard pins the output and counts pixels") {
    EmbeddingConfig cfg = small_shape();
    EmbeddingParams p = init_params(cfg, 1);
    std::fill(p.w1.begin(), p.w1.end(), 0.0);
    std::fill(p.b1.begin(), p.b1.end(), 0.0);
    std::fill(p.w2.begin(), p.w2.end(), 0.0);
    std::fill(p.b2.begin(), p.b2.end(), 0.0);
    Scene s = small_scene(7);
    ForwardCache cache;
    FeatureMap f = forward(s, p, &cache);
    CHECK(cache.guarded_count == f.height * f.width);
    CHECK(f.at(0, 0)[0] == 1.0);
    CHECK(f.at(0, 0)[1] == 0.0);
}

TEST_CASE("changing one pixel only moves features within the receptive radius") {
    EmbeddingConfig cfg = small_shape();
    cfg.radius = 2;
    EmbeddingParams p = init_params(cfg, 11);
    Scene s = small_scene(8);
    FeatureMap base = forward(s, p);

    Scene touched = s;
    const int pr = 7, pc = 9;
    touched.value(0, pr, pc) = touched.value(0, pr, pc) < 0.5f ? 0.9f : 0.1f;
    FeatureMap moved = forward(touched, p);

    for (int r = 0; r < base.height; ++r)
        for (int c = 0; c < base.width; ++c) {
            bool inside = std::max(std::abs(r - pr), std::abs(c - pc)) <= cfg.radius;
            bool changed = false;
            for (int d = 0; d < base.dim; ++d)
                if (base.at(r, c)[d] != moved.at(r, c)[d]) changed = true;
            if (!inside) CHECK_FALSE(changed);
        }
}

TEST_CASE("backward matches central finite differences for a quadratic probe") {
    // Probe loss: sum of squares against a fixed random target map. Its
    // feature gradient is trivial, so the check isolates the backward chain.
    EmbeddingConfig cfg = small_shape();
    EmbeddingParams p = init_params(cfg, 13);
    Scene s = small_scene(15, 12, 10);
    Rng rng(512);
    FeatureMap target(12, 10, cfg.dim);
    for (auto& v : target.v) v = rng.next_range(-1.0, 1.0);

    auto loss_of = [&](const EmbeddingParams& params) {
        FeatureMap f = forward(s, params);
        double acc = 0.0;
        for (size_t i = 0; i < f.v.size(); ++i) {
            double d = f.v[i] - target.v[i];
            acc += d * d;
        }
        return acc;
    };

    ForwardCache cache;
    FeatureMap f = forward(s, p, &cache);
    std::vector<double> d_features(f.v.size());
    for (size_t i = 0; i < f.v.size(); ++i) d_features[i] = 2.0 * (f.v[i] - target.v[i]);
    ParamGrad grad = ParamGrad::zeros(cfg);
    backward(s, p, cache, f, d_features, grad);

    EmbeddingParams probe = p;
    std::vector<std::pair<double*, double*>> coords;
    for (size_t i = 0; i < probe.w1.size(); i += 13) coords.push_back({&probe.w1[i], &grad.w1[i]});
    for (size_t i = 0; i < probe.b1.size(); i += 2) coords.push_back({&probe.b1[i], &grad.b1[i]});
    for (size_t i = 0; i < probe.w2.size(); i += 7) coords.push_back({&probe.w2[i], &grad.w2[i]});
    for (size_t i = 0; i < probe.b2.size(); i += 2) coords.push_back({&probe.b2[i], &grad.b2[i]});

    oracles::FiniteDiff fd{[&] { return loss_of(probe); }, 1e-5};
    for (auto [coord, analytic] : coords) {
        double numeric = fd.at(coord);
        CHECK(oracles::rel_err(*analytic, numeric) <= 1e-4);
    }
}

TEST_CASE("constant objective produces zero parameter gradient") {
    EmbeddingConfig cfg = small_shape();
    EmbeddingParams p = init_params(cfg, 17);
    Scene s = small_scene(19, 12, 10);
    ForwardCache cache;
    FeatureMap f = forward(s, p, &cache);
    std::vector<double> d_features(f.v.size(), 0.0);
    ParamGrad grad = ParamGrad::zeros(cfg);
    backward(s, p, cache, f, d_features, grad);
    for (double g : grad.w1) CHECK(g == 0.0);
    for (double g : grad.b2) CHECK(g == 0.0);
}

TEST_CASE("params checkpoint round-trips exactly") {
    EmbeddingConfig cfg;
    cfg.channels = 3;
    cfg.radius = 2;
    cfg.dim = 8;
    EmbeddingParams p = init_params(cfg, 23);
    auto path = std::filesystem::temp_directory_path() / "synet_params_test.synp";
    save_params(path, p);
    EmbeddingParams q = load_params(path);
    CHECK(q.shape == cfg);
    CHECK(q.w1 == p.w1);
    CHECK(q.b1 == p.b1);
    CHECK(q.w2 == p.w2);
    CHECK(q.b2 == p.b2);
    std::filesystem::remove(path);
}

TEST_CASE("forward rejects mismatched channel counts") {
    EmbeddingParams p = init_params(small_shape(), 1);
    Scene s = small_scene(3, 16, 16, 3);
    CHECK_THROWS_AS(forward(s, p), ConfigError);
}
