#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "synet/grid.hpp"

namespace synet {

enum class TerrainClass : uint8_t {
    GroundA = 0,
    GroundB = 1,
    Sky = 2,
    ObstacleNatural = 3,
};

enum class Label : uint8_t {
    Unlabeled = 0,
    Positive = 1,
    NegLowConf = 2,
    NegSynthetic = 3,
};

constexpr bool terrain_traversable(TerrainClass t) {
    return t == TerrainClass::GroundA || t == TerrainClass::GroundB;
}

// Multi-channel descriptor image plus a terrain-class grid. The terrain grid
// is ground truth for evaluation only; training never reads it.
struct Scene {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<float> data;  // channel-major planes, each row-major H x W, values in [0,1]
    Grid<uint8_t> terrain;    // TerrainClass values
    uint64_t seed = 0;

    float value(int ch, int r, int c) const {
        return data[(static_cast<size_t>(ch) * static_cast<size_t>(height) + static_cast<size_t>(r)) *
                        static_cast<size_t>(width) +
                    static_cast<size_t>(c)];
    }
    float& value(int ch, int r, int c) {
        return data[(static_cast<size_t>(ch) * static_cast<size_t>(height) + static_cast<size_t>(r)) *
                        static_cast<size_t>(width) +
                    static_cast<size_t>(c)];
    }
    TerrainClass terrain_at(int r, int c) const { return static_cast<TerrainClass>(terrain.at(r, c)); }
    size_t pixel_count() const { return static_cast<size_t>(height) * static_cast<size_t>(width); }
};

struct LabelMask {
    Grid<uint8_t> labels;  // Label values

    Label at(int r, int c) const { return static_cast<Label>(labels.at(r, c)); }
    void set(int r, int c, Label l) { labels.at(r, c) = static_cast<uint8_t>(l); }
    size_t count(Label l) const {
        size_t n = 0;
        for (size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == static_cast<uint8_t>(l)) ++n;
        return n;
    }
};

struct TrajectoryTrace {
    std::vector<std::pair<int, int>> waypoints;  // (row, col), consecutive 8-connected
    int footprint_halfwidth = 2;
};

struct SceneConfig {
    int height = 64;
    int width = 64;
    int channels = 4;
    double sky_fraction = 0.35;        // upper band of rows
    double ground_b_fraction = 0.45;   // share of the ground band textured as GroundB
    double obstacle_density = 0.05;    // target fraction of ground-band pixels
    double noise_amplitude = 0.08;     // smooth value-noise amplitude
    double white_noise = 0.02;
    int noise_cell = 8;                // lattice spacing of the value noise
};

// One named dataset entry: descriptor image + supervision state.
struct SceneRecord {
    std::string id;
    Scene scene;
    LabelMask labels;
};

// Scene container file ("SYNT"): header, f32 descriptor planes, terrain grid,
// label grid. All multi-byte values little-endian.
void write_scene_container(const std::filesystem::path& path, const Scene& scene,
                           const LabelMask& labels);
std::pair<Scene, LabelMask> read_scene_container(const std::filesystem::path& path);

std::vector<uint8_t> encode_scene_container(const Scene& scene, const LabelMask& labels);
std::pair<Scene, LabelMask> decode_scene_container(const std::vector<uint8_t>& bytes);

// Loads every *.synt file in a directory, sorted by filename.
std::vector<SceneRecord> load_scene_dir(const std::filesystem::path& dir);

}  // namespace synet
