#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "synet/errors.hpp"
#include "synet/evalmetrics.hpp"
#include "synet/rng.hpp"
#include "synet/scene_gen.hpp"

using namespace synet;

namespace {

FeatureMap constant_map(int h, int w, std::initializer_list<double> vec) {
    FeatureMap f(h, w, static_cast<int>(vec.size()));
    for (size_t p = 0; p < f.pixel_count(); ++p) {
        int d = 0;
        for (double v : vec) f.at(p)[d++] = v;
    }
    return f;
}

}  // namespace

TEST_CASE("similarity map hits 1, 0 and 0.5 at the cosine extremes") {
    std::vector<double> c_pos = {2.0, 0.0};  // unnormalized on purpose
    FeatureMap aligned = constant_map(2, 2, {1.0, 0.0});
    CHECK(similarity_map(aligned, c_pos).scores.at(0, 0) == doctest::Approx(1.0));
    FeatureMap opposed = constant_map(2, 2, {-1.0, 0.0});
    CHECK(similarity_map(opposed, c_pos).scores.at(0, 0) == doctest::Approx(0.0));
    FeatureMap ortho = constant_map(2, 2, {0.0, 1.0});
    CHECK(similarity_map(ortho, c_pos).scores.at(0, 0) == doctest::Approx(0.5));
}

TEST_CASE("similarity map rejects a zero positive reference") {
    std::vector<double> c_pos = {0.0, 0.0};
    FeatureMap f = constant_map(2, 2, {1.0, 0.0});
    CHECK_THROWS_AS(similarity_map(f, c_pos), ConfigError);
}

TEST_CASE("score maps stay inside the unit interval") {
    Rng rng(3);
    FeatureMap f(4, 4, 3);
    for (auto& v : f.v) v = rng.next_gaussian();
    std::vector<double> c_pos = {0.3, -0.2, 0.9};
    ScoreMap sm = similarity_map(f, c_pos);
    for (size_t i = 0; i < sm.scores.size(); ++i) {
        CHECK(sm.scores[i] >= 0.0);
        CHECK(sm.scores[i] <= 1.0);
    }
}

TEST_CASE("perfectly separated scores give the ideal report") {
    std::vector<double> scores;
    std::vector<uint8_t> gt;
    for (int i = 0; i < 40; ++i) {
        scores.push_back(0.8);
        gt.push_back(1);
        scores.push_back(0.2);
        gt.push_back(0);
    }
    MetricsReport r = pixel_metrics(scores, gt);
    CHECK(r.auroc == doctest::Approx(1.0));
    CHECK(r.maxf == doctest::Approx(1.0));
    CHECK(r.ap == doctest::Approx(1.0));
    CHECK(r.fpr == doctest::Approx(0.0));
    CHECK(r.fnr == doctest::Approx(0.0));
}

TEST_CASE("all-tied scores give AUROC one half") {
    std::vector<double> scores(50, 0.7);
    std::vector<uint8_t> gt(50, 0);
    for (int i = 0; i < 20; ++i) gt[static_cast<size_t>(i)] = 1;
    MetricsReport r = pixel_metrics(scores, gt);
    CHECK(r.auroc == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("single-class ground truth is rejected") {
    std::vector<double> scores = {0.1, 0.9};
    std::vector<uint8_t> gt = {1, 1};
    CHECK_THROWS_AS(pixel_metrics(scores, gt), SingleClassGroundTruth);
}

TEST_CASE("AUROC matches the pair-counting oracle on random instances") {
    Rng rng(17);
    for (int trial = 0; trial < 12; ++trial) {
        int n = 60 + static_cast<int>(rng.next_below(80));
        std::vector<double> scores;
        std::vector<uint8_t> gt;
        for (int i = 0; i < n; ++i) {
            // Quantized scores force plenty of ties.
            scores.push_back(std::floor(rng.next_double() * 8.0) / 8.0);
            gt.push_back(rng.next_bool(0.4) ? 1 : 0);
        }
        gt[0] = 1;
        gt[1] = 0;
        MetricsReport r = pixel_metrics(scores, gt);
        CHECK(std::abs(r.auroc - oracles::auroc_pair_counting(scores, gt)) <= 1e-9);
        CHECK(std::abs(r.ap - oracles::ap_exhaustive(scores, gt)) <= 1e-9);
    }
}

TEST_CASE("object-centric FPR counts exhaustively") {
    std::vector<double> mask_scores = {0.2, 0.6, 0.9};
    FprCurve c = object_centric_fpr(mask_scores, {0.5});
    CHECK(c.fpr[0] == doctest::Approx(2.0 / 3.0));

    FprCurve zeros = object_centric_fpr(std::vector<double>(5, 0.0), {0.1, 0.5, 1.0});
    for (double v : zeros.fpr) CHECK(v == doctest::Approx(0.0));

    FprCurve ones = object_centric_fpr(std::vector<double>(5, 1.0), {0.1, 0.5, 1.0});
    for (double v : ones.fpr) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("object-centric FPR needs a non-empty mask union and ascending thresholds") {
    CHECK_THROWS_AS(object_centric_fpr(std::vector<double>{}, {0.5}), EmptyNegativeRegion);
    std::vector<double> s = {0.5};
    CHECK_THROWS_AS(object_centric_fpr(s, {0.5, 0.4}), ConfigError);
}

TEST_CASE("FPR curves are monotone non-increasing") {
    Rng rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> mask_scores;
        for (int i = 0; i < 200; ++i) mask_scores.push_back(rng.next_double());
        FprCurve c = object_centric_fpr(mask_scores, threshold_grid());
        for (size_t i = 1; i < c.fpr.size(); ++i) CHECK(c.fpr[i] <= c.fpr[i - 1]);
    }
}

TEST_CASE("pooled multi-scene FPR equals flattened counting") {
    ScoreMap a, b;
    a.scores = Grid<double>(2, 2, 0.9);
    b.scores = Grid<double>(2, 2, 0.1);
    Grid<uint8_t> ma(2, 2, 1), mb(2, 2, 0);
    mb.at(0, 0) = 1;
    FprCurve c = object_centric_fpr({&a, &b}, {&ma, &mb}, {0.5});
    CHECK(c.fpr[0] == doctest::Approx(4.0 / 5.0));
}

TEST_CASE("histograms put a point mass in one bin") {
    std::vector<double> scores;
    std::vector<uint8_t> gt;
    for (int i = 0; i < 10; ++i) {
        scores.push_back(0.5001);
        gt.push_back(1);
        scores.push_back(0.1);
        gt.push_back(0);
    }
    auto [pos, neg] = similarity_histograms(scores, gt);
    int nonzero = 0;
    for (double v : pos)
        if (v > 0) ++nonzero;
    CHECK(nonzero == 1);
    CHECK(pos[32] == doctest::Approx(1.0));
}

TEST_CASE("uniform scores spread roughly evenly over the bins") {
    Rng rng(29);
    std::vector<double> scores;
    std::vector<uint8_t> gt;
    for (int i = 0; i < 200000; ++i) {
        scores.push_back(rng.next_double());
        gt.push_back(i % 2 == 0 ? 1 : 0);
    }
    auto [pos, neg] = similarity_histograms(scores, gt);
    for (double v : pos) CHECK(v == doctest::Approx(1.0 / 64.0).epsilon(0.25));
}

TEST_CASE("histogram masses agree with direct bucketing and sum to one") {
    Rng rng(31);
    std::vector<double> scores;
    std::vector<uint8_t> gt;
    for (int i = 0; i < 5000; ++i) {
        scores.push_back(rng.next_double());
        gt.push_back(rng.next_bool(0.5) ? 1 : 0);
    }
    gt[0] = 1;
    gt[1] = 0;
    auto [pos, neg] = similarity_histograms(scores, gt);

    std::vector<double> pos_ref(64, 0.0), neg_ref(64, 0.0);
    double np = 0, nn = 0;
    for (size_t i = 0; i < scores.size(); ++i) {
        int bin = std::min(63, static_cast<int>(scores[i] * 64.0));
        if (gt[i]) {
            pos_ref[static_cast<size_t>(bin)] += 1;
            ++np;
        } else {
            neg_ref[static_cast<size_t>(bin)] += 1;
            ++nn;
        }
    }
    double sp = 0, sn = 0;
    for (int b = 0; b < 64; ++b) {
        CHECK(pos[static_cast<size_t>(b)] ==
              doctest::Approx(pos_ref[static_cast<size_t>(b)] / np).epsilon(1e-12));
        CHECK(neg[static_cast<size_t>(b)] ==
              doctest::Approx(neg_ref[static_cast<size_t>(b)] / nn).epsilon(1e-12));
        sp += pos[static_cast<size_t>(b)];
        sn += neg[static_cast<size_t>(b)];
    }
    CHECK(std::abs(sp - 1.0) <= 1e-12);
    CHECK(std::abs(sn - 1.0) <= 1e-12);
}

TEST_CASE("overlap coefficient endpoints and the worked value") {
    std::vector<double> a = {0.5, 0.5, 0.0};
    std::vector<double> b = {0.0, 0.5, 0.5};
    CHECK(overlap_coefficient(a, b) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(overlap_coefficient(a, a) == doctest::Approx(1.0).epsilon(1e-15));
    std::vector<double> c = {1.0, 0.0, 0.0};
    std::vector<double> d = {0.0, 0.0, 1.0};
    CHECK(overlap_coefficient(c, d) == doctest::Approx(0.0));
}

TEST_CASE("toy ground truth marks composed pixels non-traversable") {
    SceneConfig cfg;
    cfg.height = 32;
    cfg.width = 32;
    cfg.channels = 1;
    Scene s = generate_scene(cfg, 41);
    LabelMask m;
    m.labels = Grid<uint8_t>(32, 32, static_cast<uint8_t>(Label::Unlabeled));
    m.set(31, 0, Label::NegSynthetic);
    auto gt = traversable_ground_truth(s, m);
    CHECK(gt[31 * 32 + 0] == 0);
    // Sky row is never traversable.
    CHECK(gt[0] == 0);
}

TEST_CASE("CSV emitters carry the documented headers") {
    MetricsReport r;
    CHECK(metrics_to_csv(r).substr(0, 33) == "auroc,maxf,ap,pre,rec,fpr,fnr\n0.0");
    FprCurve c;
    c.thresholds = {0.0, 1.0};
    c.fpr = {1.0, 0.0};
    CHECK(fpr_curve_to_csv(c).substr(0, 14) == "threshold,fpr\n");
    std::vector<double> pos(64, 1.0 / 64), neg(64, 1.0 / 64);
    CHECK(histograms_to_csv(pos, neg).substr(0, 24) == "bin_lo,bin_hi,p_pos,p_ne");
}
