#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <limits>
#include <set>

#include "oracles.hpp"
#include "synet/errors.hpp"
#include "synet/rng.hpp"
#include "synet/scene_gen.hpp"

using namespace synet;

namespace {

SceneConfig config_64(int channels = 8) {
    SceneConfig cfg;
    cfg.height = 64;
    cfg.width = 64;
    cfg.channels = channels;
    return cfg;
}

Scene all_ground_scene(int h = 48, int w = 48, int channels = 2) {
    SceneConfig cfg;
    cfg.height = h;
    cfg.width = w;
    cfg.channels = channels;
    Scene s = generate_scene(cfg, 5);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            s.terrain.at(r, c) = static_cast<uint8_t>(TerrainClass::GroundA);
    return s;
}

}  // namespace

TEST_CASE("generate_scene is byte-deterministic") {
    Scene a = generate_scene(config_64(), 7);
    Scene b = generate_scene(config_64(), 7);
    CHECK(a.data == b.data);
    CHECK(a.terrain == b.terrain);
    Scene c = generate_scene(config_64(), 8);
    CHECK(a.data != c.data);
}

TEST_CASE("generate_scene rejects tiny dimensions") {
    SceneConfig cfg;
    cfg.height = 16;
    cfg.width = 64;
    CHECK_THROWS_AS(generate_scene(cfg, 0), ConfigError);
}

TEST_CASE("32x32 single channel scene has sky and ground") {
    SceneConfig cfg;
    cfg.height = 32;
    cfg.width = 32;
    cfg.channels = 1;
    Scene s = generate_scene(cfg, 0);
    int sky = 0, ground_a = 0;
    for (int r = 0; r < 32; ++r)
        for (int c = 0; c < 32; ++c) {
            if (s.terrain_at(r, c) == TerrainClass::Sky) ++sky;
            if (s.terrain_at(r, c) == TerrainClass::GroundA) ++ground_a;
        }
    CHECK(sky >= 1);
    CHECK(ground_a >= 1);
}

TEST_CASE("scene values stay inside the unit interval") {
    Scene s = generate_scene(config_64(4), 21);
    for (float v : s.data) {
        CHECK(v >= 0.0f);
        CHECK(v <= 1.0f);
    }
}

TEST_CASE("obstacle fraction lands in the expected band and regenerates identically") {
    SceneConfig cfg = config_64(8);
    cfg.obstacle_density = 0.1;
    Scene s = generate_scene(cfg, 7);

    // Independent counting pass.
    int obstacles = 0;
    for (int r = 0; r < s.height; ++r)
        for (int c = 0; c < s.width; ++c)
            if (s.terrain_at(r, c) == TerrainClass::ObstacleNatural) ++obstacles;
    double fraction = static_cast<double>(obstacles) / (64.0 * 64.0);
    CHECK(fraction >= 0.02);
    CHECK(fraction <= 0.25);

    Scene again = generate_scene(cfg, 7);
    int recount = 0;
    for (int r = 0; r < again.height; ++r)
        for (int c = 0; c < again.width; ++c)
            if (again.terrain_at(r, c) == TerrainClass::ObstacleNatural) ++recount;
    CHECK(recount == obstacles);
}

TEST_CASE("trajectory on all-ground scene exists and stays feasible") {
    Scene s = all_ground_scene();
    TrajectoryTrace t = simulate_trajectory(s, 11, 2);
    CHECK(t.waypoints.size() >= 2);
    for (auto [r, c] : t.waypoints) CHECK(terrain_traversable(s.terrain_at(r, c)));
}

TEST_CASE("trajectory on all-sky scene raises NoTraversableCorridor") {
    Scene s = all_ground_scene();
    for (int r = 0; r < s.height; ++r)
        for (int c = 0; c < s.width; ++c)
            s.terrain.at(r, c) = static_cast<uint8_t>(TerrainClass::Sky);
    CHECK_THROWS_AS(simulate_trajectory(s, 1, 2), NoTraversableCorridor);
}

TEST_CASE("every waypoint of a mixed-scene walk sits on traversable terrain") {
    Scene s = generate_scene(config_64(4), 3);
    TrajectoryTrace t = simulate_trajectory(s, 3, 2);
    // Brute-force per-waypoint lookup.
    for (auto [r, c] : t.waypoints) {
        auto cls = s.terrain_at(r, c);
        bool ok = cls == TerrainClass::GroundA || cls == TerrainClass::GroundB;
        CHECK(ok);
    }
    // Consecutive waypoints stay 8-connected.
    for (size_t i = 1; i < t.waypoints.size(); ++i) {
        int dr = std::abs(t.waypoints[i].first - t.waypoints[i - 1].first);
        int dc = std::abs(t.waypoints[i].second - t.waypoints[i - 1].second);
        CHECK(std::max(dr, dc) == 1);
    }
}

TEST_CASE("trajectory and labels are deterministic") {
    Scene s = generate_scene(config_64(4), 13);
    TrajectoryTrace t1 = simulate_trajectory(s, 5, 2);
    TrajectoryTrace t2 = simulate_trajectory(s, 5, 2);
    CHECK(t1.waypoints == t2.waypoints);
    LabelConfig lc{LabelMode::PN, 10.0};
    CHECK(make_labels(s, t1, lc).labels == make_labels(s, t2, lc).labels);
}

TEST_CASE("PU labels contain only positive and unlabeled") {
    Scene s = generate_scene(config_64(4), 17);
    TrajectoryTrace t = simulate_trajectory(s, 2, 2);
    LabelMask m = make_labels(s, t, {LabelMode::PU, 12.0});
    std::set<uint8_t> values;
    for (size_t i = 0; i < m.labels.size(); ++i) values.insert(m.labels[i]);
    for (uint8_t v : values)
        CHECK((v == static_cast<uint8_t>(Label::Positive) ||
               v == static_cast<uint8_t>(Label::Unlabeled)));
    CHECK(m.count(Label::Positive) > 0);
}

TEST_CASE("PN labels with infinite threshold have no low-confidence negatives") {
    Scene s = generate_scene(config_64(4), 17);
    TrajectoryTrace t = simulate_trajectory(s, 2, 2);
    LabelMask m = make_labels(s, t, {LabelMode::PN, std::numeric_limits<double>::infinity()});
    CHECK(m.count(Label::NegLowConf) == 0);
}

TEST_CASE("PN negatives match the all-pairs distance oracle at threshold 10") {
    Scene s = generate_scene(config_64(4), 23);
    TrajectoryTrace t = simulate_trajectory(s, 9, 2);
    LabelMask m = make_labels(s, t, {LabelMode::PN, 10.0});

    Grid<uint8_t> pos(s.height, s.width, 0);
    for (int r = 0; r < s.height; ++r)
        for (int c = 0; c < s.width; ++c)
            if (m.at(r, c) == Label::Positive) pos.at(r, c) = 1;
    Grid<int64_t> d2 = oracles::edt_bruteforce(pos);
    for (int r = 0; r < s.height; ++r)
        for (int c = 0; c < s.width; ++c) {
            bool expect_neg =
                m.at(r, c) != Label::Positive && static_cast<double>(d2.at(r, c)) > 100.0;
            CHECK((m.at(r, c) == Label::NegLowConf) == expect_neg);
        }
}

TEST_CASE("fast distance transform equals the quadratic oracle") {
    Rng rng(99);
    for (int trial = 0; trial < 4; ++trial) {
        Grid<uint8_t> mask(23, 31, 0);
        int sites = trial == 0 ? 1 : static_cast<int>(rng.next_below(40)) + 1;
        for (int i = 0; i < sites; ++i) mask.at(rng.next_int(0, 22), rng.next_int(0, 30)) = 1;
        Grid<int64_t> fast = squared_distance_to(mask);
        Grid<int64_t> slow = oracles::edt_bruteforce(mask);
        for (int r = 0; r < 23; ++r)
            for (int c = 0; c < 31; ++c) CHECK(fast.at(r, c) == slow.at(r, c));
    }
}

TEST_CASE("positive pixels always sit on traversable terrain") {
    for (uint64_t seed : {1ull, 2ull, 3ull, 50ull}) {
        Scene s = generate_scene(config_64(4), seed);
        TrajectoryTrace t = simulate_trajectory(s, seed, 2);
        LabelMask m = make_labels(s, t, {LabelMode::PN, 12.0});
        for (int r = 0; r < s.height; ++r)
            for (int c = 0; c < s.width; ++c)
                if (m.at(r, c) == Label::Positive)
                    CHECK(terrain_traversable(s.terrain_at(r, c)));
    }
}

TEST_CASE("PN partition covers the grid with disjoint classes") {
    Scene s = generate_scene(config_64(4), 31);
    TrajectoryTrace t = simulate_trajectory(s, 31, 2);
    LabelMask m = make_labels(s, t, {LabelMode::PN, 8.0});
    size_t counted = m.count(Label::Positive) + m.count(Label::NegLowConf) +
                     m.count(Label::Unlabeled) + m.count(Label::NegSynthetic);
    CHECK(counted == s.pixel_count());
    CHECK(m.count(Label::NegSynthetic) == 0);
}

TEST_CASE("scene container round-trips byte-for-byte") {
    Scene s = generate_scene(config_64(3), 41);
    TrajectoryTrace t = simulate_trajectory(s, 41, 2);
    LabelMask m = make_labels(s, t, {LabelMode::PU, 12.0});

    auto path = std::filesystem::temp_directory_path() / "synet_container_test.synt";
    write_scene_container(path, s, m);
    auto [s2, m2] = read_scene_container(path);
    CHECK(s2.data == s.data);
    CHECK(s2.terrain == s.terrain);
    CHECK(m2.labels == m.labels);
    CHECK(s2.height == s.height);
    CHECK(s2.channels == s.channels);

    auto bytes = encode_scene_container(s, m);
    CHECK(bytes[0] == 'S');
    CHECK(bytes[1] == 'Y');
    CHECK(bytes[2] == 'N');
    CHECK(bytes[3] == 'T');
    std::filesystem::remove(path);
}

TEST_CASE("footprint never covers sky or obstacles") {
    Scene s = generate_scene(config_64(4), 77);
    TrajectoryTrace t = simulate_trajectory(s, 77, 2);
    LabelMask m = make_labels(s, t, {LabelMode::PU, 12.0});
    for (int r = 0; r < s.height; ++r)
        for (int c = 0; c < s.width; ++c)
            if (m.at(r, c) == Label::Positive) {
                CHECK(s.terrain_at(r, c) != TerrainClass::Sky);
                CHECK(s.terrain_at(r, c) != TerrainClass::ObstacleNatural);
            }
}
