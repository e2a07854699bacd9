#include "synet/scene_gen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "synet/errors.hpp"
#include "synet/rng.hpp"

namespace synet {

namespace {

// Bilinearly interpolated lattice noise in [-1, 1].
class ValueNoise {
 public:
    ValueNoise(int height, int width, int cell, Rng& rng) : cell_(std::max(1, cell)) {
        rows_ = height / cell_ + 3;
        cols_ = width / cell_ + 3;
        lattice_.resize(static_cast<size_t>(rows_) * static_cast<size_t>(cols_));
        for (auto& v : lattice_) v = rng.next_range(-1.0, 1.0);
    }

    double sample(int r, int c) const {
        double fr = static_cast<double>(r) / cell_;
        double fc = static_cast<double>(c) / cell_;
        int r0 = static_cast<int>(fr);
        int c0 = static_cast<int>(fc);
        double tr = smooth(fr - r0);
        double tc = smooth(fc - c0);
        double v00 = at(r0, c0), v01 = at(r0, c0 + 1);
        double v10 = at(r0 + 1, c0), v11 = at(r0 + 1, c0 + 1);
        double top = v00 + (v01 - v00) * tc;
        double bot = v10 + (v11 - v10) * tc;
        return top + (bot - top) * tr;
    }

 private:
    static double smooth(double t) { return t * t * (3.0 - 2.0 * t); }
    double at(int r, int c) const {
        return lattice_[static_cast<size_t>(r) * static_cast<size_t>(cols_) + static_cast<size_t>(c)];
    }
    int cell_, rows_ = 0, cols_ = 0;
    std::vector<double> lattice_;
};

constexpr double kTerrainMeans[4][4] = {
    {0.62, 0.38, 0.55, 0.45},  // GroundA
    {0.48, 0.60, 0.40, 0.58},  // GroundB
    {0.88, 0.82, 0.90, 0.78},  // Sky
    {0.20, 0.32, 0.25, 0.15},  // ObstacleNatural
};

}  // namespace

double terrain_channel_mean(TerrainClass cls, int channel) {
    return kTerrainMeans[static_cast<int>(cls)][channel % 4];
}

Scene generate_scene(const SceneConfig& config, uint64_t seed) {
    if (config.height < 32 || config.width < 32)
        throw ConfigError("scene dimensions must be at least 32x32");
    if (config.channels < 1) throw ConfigError("scene needs at least one channel");
    if (config.sky_fraction <= 0.0 || config.sky_fraction >= 1.0)
        throw ConfigError("sky_fraction must be in (0,1)");

    const int h = config.height, w = config.width, ch = config.channels;
    Rng rng(derive_seed(seed, 0x5ce9e));

    Scene scene;
    scene.height = h;
    scene.width = w;
    scene.channels = ch;
    scene.seed = seed;
    scene.terrain = Grid<uint8_t>(h, w, static_cast<uint8_t>(TerrainClass::Sky));
    scene.data.resize(static_cast<size_t>(ch) * scene.pixel_count());

    const int ground_top = static_cast<int>(std::lround(config.sky_fraction * h));

    // Ground split: exact-quantile threshold on low-frequency noise so both
    // ground classes are present whenever the fraction is interior.
    ValueNoise split_noise(h, w, std::max(4, h / 4), rng);
    std::vector<double> ground_vals;
    ground_vals.reserve(static_cast<size_t>((h - ground_top) * w));
    for (int r = ground_top; r < h; ++r)
        for (int c = 0; c < w; ++c) ground_vals.push_back(split_noise.sample(r, c));
    std::vector<double> sorted = ground_vals;
    std::sort(sorted.begin(), sorted.end());
    double qb = std::clamp(config.ground_b_fraction, 0.0, 1.0);
    size_t qi = std::min(sorted.size() - 1, static_cast<size_t>(qb * static_cast<double>(sorted.size())));
    double threshold = sorted.empty() ? 0.0 : sorted[qi];

    size_t gi = 0;
    for (int r = ground_top; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            bool is_b = ground_vals[gi++] < threshold;
            scene.terrain.at(r, c) =
                static_cast<uint8_t>(is_b ? TerrainClass::GroundB : TerrainClass::GroundA);
        }
    }

    // Obstacle blobs inside the ground band.
    if (config.obstacle_density > 0.0 && ground_top < h) {
        double ground_area = static_cast<double>((h - ground_top) * w);
        double mean_r = std::max(2.0, h / 18.0);
        double mean_area = 3.14159265358979323846 * mean_r * mean_r * 0.6;
        int blobs = std::max(1, static_cast<int>(std::lround(
                                    config.obstacle_density * ground_area / mean_area)));
        for (int b = 0; b < blobs; ++b) {
            int cr = rng.next_int(ground_top, h - 1);
            int cc = rng.next_int(0, w - 1);
            double ra = rng.next_range(mean_r * 0.6, mean_r * 1.4);
            double rb = rng.next_range(mean_r * 0.4, mean_r * 1.2);
            for (int r = std::max(ground_top, cr - static_cast<int>(ra) - 1);
                 r <= std::min(h - 1, cr + static_cast<int>(ra) + 1); ++r) {
                for (int c = std::max(0, cc - static_cast<int>(rb) - 1);
                     c <= std::min(w - 1, cc + static_cast<int>(rb) + 1); ++c) {
                    double dr = (r - cr) / ra, dc = (c - cc) / rb;
                    if (dr * dr + dc * dc <= 1.0)
                        scene.terrain.at(r, c) =
                            static_cast<uint8_t>(TerrainClass::ObstacleNatural);
                }
            }
        }
    }

    // Descriptor channels: shared smooth fields stepped by per-class means.
    for (int k = 0; k < ch; ++k) {
        ValueNoise coarse(h, w, config.noise_cell, rng);
        ValueNoise fine(h, w, std::max(2, config.noise_cell / 2), rng);
        for (int r = 0; r < h; ++r) {
            for (int c = 0; c < w; ++c) {
                auto cls = scene.terrain_at(r, c);
                double v = terrain_channel_mean(cls, k) +
                           config.noise_amplitude * (coarse.sample(r, c) + 0.5 * fine.sample(r, c)) +
                           config.white_noise * rng.next_gaussian();
                scene.value(k, r, c) = static_cast<float>(std::clamp(v, 0.0, 1.0));
            }
        }
    }
    return scene;
}

namespace {

bool footprint_feasible(const Scene& scene, int r, int c, int hw) {
    for (int rr = std::max(0, r - hw); rr <= std::min(scene.height - 1, r + hw); ++rr)
        for (int cc = std::max(0, c - hw); cc <= std::min(scene.width - 1, c + hw); ++cc)
            if (!terrain_traversable(scene.terrain_at(rr, cc))) return false;
    return true;
}

// 8-connected moves; upward rows preferred so the walk crosses the scene.
constexpr int kMoves[8][2] = {{-1, -1}, {-1, 0}, {-1, 1}, {0, -1},
                              {0, 1},   {1, -1}, {1, 0},  {1, 1}};
constexpr double kMoveWeight[8] = {3.0, 4.0, 3.0, 1.5, 1.5, 0.5, 0.5, 0.5};

std::vector<std::pair<int, int>> walk_from(const Scene& scene, int start_col, int hw, Rng& rng,
                                           int max_steps) {
    std::vector<std::pair<int, int>> path;
    int r = scene.height - 1, c = start_col;
    path.emplace_back(r, c);
    for (int step = 0; step < max_steps; ++step) {
        double weights[8];
        double total = 0.0;
        for (int m = 0; m < 8; ++m) {
            int nr = r + kMoves[m][0], nc = c + kMoves[m][1];
            bool ok = nr >= 0 && nr < scene.height && nc >= 0 && nc < scene.width &&
                      footprint_feasible(scene, nr, nc, hw);
            weights[m] = ok ? kMoveWeight[m] : 0.0;
            total += weights[m];
        }
        if (total <= 0.0) break;
        double pick = rng.next_double() * total;
        int chosen = 0;
        for (int m = 0; m < 8; ++m) {
            pick -= weights[m];
            if (pick < 0.0) {
                chosen = m;
                break;
            }
        }
        r += kMoves[chosen][0];
        c += kMoves[chosen][1];
        path.emplace_back(r, c);
        if (r == 0) break;  // reached the top of the traversable band
    }
    return path;
}

}  // namespace

TrajectoryTrace simulate_trajectory(const Scene& scene, uint64_t seed, int footprint_halfwidth) {
    Rng rng(derive_seed(seed, 0x7a11));
    const int hw = footprint_halfwidth;

    std::vector<int> feasible_starts;
    for (int c = 0; c < scene.width; ++c)
        if (footprint_feasible(scene, scene.height - 1, c, hw)) feasible_starts.push_back(c);
    if (feasible_starts.empty())
        throw NoTraversableCorridor("no feasible entry on the bottom edge");

    const int max_steps = 4 * scene.height;
    const int want_len = std::max(2, scene.height / 2);
    std::vector<std::pair<int, int>> best;
    for (int attempt = 0; attempt < 64; ++attempt) {
        int start = feasible_starts[static_cast<size_t>(
            rng.next_below(feasible_starts.size()))];
        auto path = walk_from(scene, start, hw, rng, max_steps);
        if (static_cast<int>(path.size()) >= want_len) {
            best = std::move(path);
            break;
        }
        if (path.size() > best.size()) best = std::move(path);
    }
    if (static_cast<int>(best.size()) < 2)
        throw NoTraversableCorridor("walk could not leave the entry cell");

    TrajectoryTrace trace;
    trace.waypoints = std::move(best);
    trace.footprint_halfwidth = hw;
    return trace;
}

Grid<int64_t> squared_distance_to(const Grid<uint8_t>& mask) {
    const int h = mask.height(), w = mask.width();
    const int64_t inf = static_cast<int64_t>(h + w + 1) * static_cast<int64_t>(h + w + 1);
    Grid<int64_t> dist(h, w, inf);

    // Lower-envelope (parabola) transform of one row/column of sampled costs.
    auto transform_1d = [](const std::vector<int64_t>& f, std::vector<int64_t>& out) {
        const int n = static_cast<int>(f.size());
        std::vector<int> v(static_cast<size_t>(n));
        std::vector<double> z(static_cast<size_t>(n) + 1);
        int k = 0;
        v[0] = 0;
        z[0] = -std::numeric_limits<double>::infinity();
        z[1] = std::numeric_limits<double>::infinity();
        for (int q = 1; q < n; ++q) {
            double s;
            for (;;) {
                int p = v[static_cast<size_t>(k)];
                s = (static_cast<double>(f[static_cast<size_t>(q)] + static_cast<int64_t>(q) * q) -
                     static_cast<double>(f[static_cast<size_t>(p)] + static_cast<int64_t>(p) * p)) /
                    (2.0 * (q - p));
                if (s <= z[static_cast<size_t>(k)]) {
                    --k;
                } else {
                    break;
                }
            }
            ++k;
            v[static_cast<size_t>(k)] = q;
            z[static_cast<size_t>(k)] = s;
            z[static_cast<size_t>(k) + 1] = std::numeric_limits<double>::infinity();
        }
        k = 0;
        for (int q = 0; q < n; ++q) {
            while (z[static_cast<size_t>(k) + 1] < q) ++k;
            int p = v[static_cast<size_t>(k)];
            out[static_cast<size_t>(q)] =
                static_cast<int64_t>(q - p) * static_cast<int64_t>(q - p) + f[static_cast<size_t>(p)];
        }
    };

    // Column pass over 0/inf seeds, then row pass.
    std::vector<int64_t> f(static_cast<size_t>(h)), g(static_cast<size_t>(h));
    for (int c = 0; c < w; ++c) {
        for (int r = 0; r < h; ++r) f[static_cast<size_t>(r)] = mask.at(r, c) ? 0 : inf;
        transform_1d(f, g);
        for (int r = 0; r < h; ++r) dist.at(r, c) = g[static_cast<size_t>(r)];
    }
    std::vector<int64_t> fr(static_cast<size_t>(w)), gr(static_cast<size_t>(w));
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) fr[static_cast<size_t>(c)] = dist.at(r, c);
        transform_1d(fr, gr);
        for (int c = 0; c < w; ++c) dist.at(r, c) = std::min(gr[static_cast<size_t>(c)], inf);
    }
    return dist;
}

LabelMask make_labels(const Scene& scene, const TrajectoryTrace& traj, const LabelConfig& config) {
    LabelMask mask;
    mask.labels = Grid<uint8_t>(scene.height, scene.width,
                                static_cast<uint8_t>(Label::Unlabeled));
    const int hw = traj.footprint_halfwidth;
    for (auto [r, c] : traj.waypoints) {
        if (!terrain_traversable(scene.terrain_at(r, c)))
            throw ConfigError("trajectory waypoint off traversable terrain");
        for (int rr = std::max(0, r - hw); rr <= std::min(scene.height - 1, r + hw); ++rr)
            for (int cc = std::max(0, c - hw); cc <= std::min(scene.width - 1, c + hw); ++cc)
                mask.set(rr, cc, Label::Positive);
    }

    if (config.mode == LabelMode::PN && std::isfinite(config.neg_distance)) {
        Grid<uint8_t> pos(scene.height, scene.width, 0);
        for (int r = 0; r < scene.height; ++r)
            for (int c = 0; c < scene.width; ++c)
                if (mask.at(r, c) == Label::Positive) pos.at(r, c) = 1;
        Grid<int64_t> d2 = squared_distance_to(pos);
        double t2 = config.neg_distance * config.neg_distance;
        for (int r = 0; r < scene.height; ++r)
            for (int c = 0; c < scene.width; ++c)
                if (mask.at(r, c) == Label::Unlabeled &&
                    static_cast<double>(d2.at(r, c)) > t2)
                    mask.set(r, c, Label::NegLowConf);
    }
    return mask;
}

}  // namespace synet
