#pragma once

#include <cstdint>

#include "synet/scene.hpp"

namespace synet {

enum class LabelMode { PU, PN };

struct LabelConfig {
    LabelMode mode = LabelMode::PU;
    // PN only: pixels farther than this (Euclidean) from any POSITIVE pixel
    // become NEG_LOW_CONF. Infinity disables low-confidence negatives.
    double neg_distance = 12.0;
};

Scene generate_scene(const SceneConfig& config, uint64_t seed);

TrajectoryTrace simulate_trajectory(const Scene& scene, uint64_t seed, int footprint_halfwidth);

LabelMask make_labels(const Scene& scene, const TrajectoryTrace& traj, const LabelConfig& config);

// Exact squared Euclidean distance to the nearest nonzero pixel of `mask`
// (two-pass lower-envelope transform). Pixels inside the mask get 0; if the
// mask is empty every entry is a large sentinel (> any grid distance).
Grid<int64_t> squared_distance_to(const Grid<uint8_t>& mask);

// Per-class channel mean used by the procedural textures. Shared between
// terrain rendering and synthetic-object rendering so train/eval statistics
// agree by construction.
double terrain_channel_mean(TerrainClass cls, int channel);

}  // namespace synet
