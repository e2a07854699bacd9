#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "synet/scene.hpp"

namespace synet {

struct EmbeddingConfig {
    int channels = 4;  // C, must match the scenes
    int radius = 2;    // receptive radius r; patch is (2r+1)^2 x C
    int dim = 16;      // D, output (and hidden) width

    int patch_len() const { return channels * (2 * radius + 1) * (2 * radius + 1); }
    bool operator==(const EmbeddingConfig&) const = default;
};

// Two-layer map from a clamp-padded local patch to D outputs, l2-normalized.
// Shapes are fully determined by (C, r, D): hidden width equals D.
struct EmbeddingParams {
    EmbeddingConfig shape;
    std::vector<double> w1;  // D x patch_len, row-major
    std::vector<double> b1;  // D
    std::vector<double> w2;  // D x D, row-major
    std::vector<double> b2;  // D

    size_t coord_count() const { return w1.size() + b1.size() + w2.size() + b2.size(); }
};

EmbeddingParams init_params(const EmbeddingConfig& config, uint64_t seed);

struct FeatureMap {
    int height = 0;
    int width = 0;
    int dim = 0;
    std::vector<double> v;  // H*W*D, pixel-major

    FeatureMap() = default;
    FeatureMap(int h, int w, int d)
        : height(h), width(w), dim(d), v(static_cast<size_t>(h) * w * d, 0.0) {}

    double* at(int r, int c) {
        return v.data() + (static_cast<size_t>(r) * width + c) * static_cast<size_t>(dim);
    }
    const double* at(int r, int c) const {
        return v.data() + (static_cast<size_t>(r) * width + c) * static_cast<size_t>(dim);
    }
    double* at(size_t pixel) { return v.data() + pixel * static_cast<size_t>(dim); }
    const double* at(size_t pixel) const { return v.data() + pixel * static_cast<size_t>(dim); }
    size_t pixel_count() const { return static_cast<size_t>(height) * static_cast<size_t>(width); }
};

struct ForwardCache {
    std::vector<double> hidden;   // H*W*D, post-tanh
    std::vector<double> norm;     // H*W, pre-normalization l2 norms
    std::vector<uint8_t> guarded; // H*W, 1 where the zero-norm guard fired
    int guarded_count = 0;
};

FeatureMap forward(const Scene& scene, const EmbeddingParams& params,
                   ForwardCache* cache = nullptr);

struct ParamGrad {
    std::vector<double> w1, b1, w2, b2;

    static ParamGrad zeros(const EmbeddingConfig& config);
    void add_scaled(const ParamGrad& other, double scale);
    void scale(double s);
};

// Chains dL/dF (w.r.t. the normalized features) back to parameter space,
// accumulating into `grad`. `d_features` is FeatureMap-shaped.
void backward(const Scene& scene, const EmbeddingParams& params, const ForwardCache& cache,
              const FeatureMap& features, const std::vector<double>& d_features,
              ParamGrad& grad);

// "SYNP" checkpoint core: shape header then w1, b1, w2, b2 as f64 LE.
void save_params(const std::filesystem::path& path, const EmbeddingParams& params);
EmbeddingParams load_params(const std::filesystem::path& path);

}  // namespace synet
