#include "synet/embedding.hpp"

#include <algorithm>
#include <cmath>

#include "synet/binio.hpp"
#include "synet/errors.hpp"
#include "synet/rng.hpp"

namespace synet {

namespace {
constexpr char kMagic[4] = {'S', 'Y', 'N', 'P'};
constexpr uint16_t kVersion = 1;
constexpr double kNormGuard = 1e-12;

void gather_patch(const Scene& scene, int r, int c, int radius, double* out) {
    int idx = 0;
    for (int k = 0; k < scene.channels; ++k)
        for (int dr = -radius; dr <= radius; ++dr) {
            int rr = std::clamp(r + dr, 0, scene.height - 1);
            for (int dc = -radius; dc <= radius; ++dc) {
                int cc = std::clamp(c + dc, 0, scene.width - 1);
                out[idx++] = static_cast<double>(scene.value(k, rr, cc));
            }
        }
}

}  // namespace

EmbeddingParams init_params(const EmbeddingConfig& config, uint64_t seed) {
    if (config.channels < 1 || config.radius < 0 || config.dim < 1)
        throw ConfigError("invalid embedding shape");
    EmbeddingParams p;
    p.shape = config;
    const int d = config.dim, plen = config.patch_len();
    p.w1.resize(static_cast<size_t>(d) * static_cast<size_t>(plen));
    p.b1.resize(static_cast<size_t>(d));
    p.w2.resize(static_cast<size_t>(d) * static_cast<size_t>(d));
    p.b2.resize(static_cast<size_t>(d));
    Rng rng(derive_seed(seed, 0xe3bd));
    double s1 = 1.0 / std::sqrt(static_cast<double>(plen));
    double s2 = 1.0 / std::sqrt(static_cast<double>(d));
    for (auto& w : p.w1) w = s1 * rng.next_gaussian();
    for (auto& b : p.b1) b = 0.1 * rng.next_gaussian();
    for (auto& w : p.w2) w = s2 * rng.next_gaussian();
    for (auto& b : p.b2) b = 0.1 * rng.next_gaussian();
    return p;
}

FeatureMap forward(const Scene& scene, const EmbeddingParams& params, ForwardCache* cache) {
    if (params.shape.channels != scene.channels)
        throw ConfigError("embedding channel count does not match scene");
    const int d = params.shape.dim;
    const int plen = params.shape.patch_len();
    const int radius = params.shape.radius;

    FeatureMap fm(scene.height, scene.width, d);
    if (cache) {
        cache->hidden.assign(fm.pixel_count() * static_cast<size_t>(d), 0.0);
        cache->norm.assign(fm.pixel_count(), 0.0);
        cache->guarded.assign(fm.pixel_count(), 0);
        cache->guarded_count = 0;
    }

    std::vector<double> patch(static_cast<size_t>(plen));
    std::vector<double> hidden(static_cast<size_t>(d));
    std::vector<double> z(static_cast<size_t>(d));

    size_t pixel = 0;
    for (int r = 0; r < scene.height; ++r) {
        for (int c = 0; c < scene.width; ++c, ++pixel) {
            gather_patch(scene, r, c, radius, patch.data());
            for (int i = 0; i < d; ++i) {
                const double* row = params.w1.data() + static_cast<size_t>(i) * plen;
                hidden[static_cast<size_t>(i)] = std::tanh(dot(row, patch.data(), plen) + params.b1[static_cast<size_t>(i)]);
            }
            for (int i = 0; i < d; ++i) {
                const double* row = params.w2.data() + static_cast<size_t>(i) * d;
                z[static_cast<size_t>(i)] = dot(row, hidden.data(), d) + params.b2[static_cast<size_t>(i)];
            }
            double n = std::sqrt(norm2(z.data(), d));
            double* out = fm.at(pixel);
            if (n < kNormGuard) {
                // Measure-zero degenerate output; pinned to a fixed direction.
                std::fill(out, out + d, 0.0);
                out[0] = 1.0;
                if (cache) {
                    cache->guarded[pixel] = 1;
                    ++cache->guarded_count;
                    cache->norm[pixel] = 1.0;
                }
            } else {
                for (int i = 0; i < d; ++i) out[i] = z[static_cast<size_t>(i)] / n;
                if (cache) cache->norm[pixel] = n;
            }
            if (cache)
                std::copy(hidden.begin(), hidden.end(),
                          cache->hidden.begin() + static_cast<std::ptrdiff_t>(pixel * static_cast<size_t>(d)));
        }
    }
    return fm;
}

ParamGrad ParamGrad::zeros(const EmbeddingConfig& config) {
    ParamGrad g;
    const size_t d = static_cast<size_t>(config.dim);
    g.w1.assign(d * static_cast<size_t>(config.patch_len()), 0.0);
    g.b1.assign(d, 0.0);
    g.w2.assign(d * d, 0.0);
    g.b2.assign(d, 0.0);
    return g;
}

void ParamGrad::add_scaled(const ParamGrad& other, double s) {
    for (size_t i = 0; i < w1.size(); ++i) w1[i] += s * other.w1[i];
    for (size_t i = 0; i < b1.size(); ++i) b1[i] += s * other.b1[i];
    for (size_t i = 0; i < w2.size(); ++i) w2[i] += s * other.w2[i];
    for (size_t i = 0; i < b2.size(); ++i) b2[i] += s * other.b2[i];
}

void ParamGrad::scale(double s) {
    for (auto& x : w1) x *= s;
    for (auto& x : b1) x *= s;
    for (auto& x : w2) x *= s;
    for (auto& x : b2) x *= s;
}

void backward(const Scene& scene, const EmbeddingParams& params, const ForwardCache& cache,
              const FeatureMap& features, const std::vector<double>& d_features,
              ParamGrad& grad) {
    const int d = params.shape.dim;
    const int plen = params.shape.patch_len();
    const int radius = params.shape.radius;
    if (d_features.size() != features.v.size())
        throw ConfigError("d_features shape mismatch");

    std::vector<double> patch(static_cast<size_t>(plen));
    std::vector<double> dz(static_cast<size_t>(d));
    std::vector<double> dh(static_cast<size_t>(d));

    size_t pixel = 0;
    for (int r = 0; r < scene.height; ++r) {
        for (int c = 0; c < scene.width; ++c, ++pixel) {
            const double* df = d_features.data() + pixel * static_cast<size_t>(d);
            bool all_zero = true;
            for (int i = 0; i < d; ++i)
                if (df[i] != 0.0) {
                    all_zero = false;
                    break;
                }
            if (all_zero || cache.guarded[pixel]) continue;

            const double* f = features.at(pixel);
            const double* h = cache.hidden.data() + pixel * static_cast<size_t>(d);
            double n = cache.norm[pixel];

            // Normalization Jacobian: dz = (df - (f . df) f) / n.
            double fdot = dot(f, df, d);
            for (int i = 0; i < d; ++i) dz[static_cast<size_t>(i)] = (df[i] - fdot * f[i]) / n;

            for (int i = 0; i < d; ++i) {
                grad.b2[static_cast<size_t>(i)] += dz[static_cast<size_t>(i)];
                double* wrow = grad.w2.data() + static_cast<size_t>(i) * d;
                double dzi = dz[static_cast<size_t>(i)];
                for (int j = 0; j < d; ++j) wrow[j] += dzi * h[j];
            }
            for (int j = 0; j < d; ++j) {
                double s = 0.0;
                for (int i = 0; i < d; ++i)
                    s += params.w2[static_cast<size_t>(i) * d + static_cast<size_t>(j)] * dz[static_cast<size_t>(i)];
                dh[static_cast<size_t>(j)] = s * (1.0 - h[j] * h[j]);
            }
            gather_patch(scene, r, c, radius, patch.data());
            for (int i = 0; i < d; ++i) {
                double dhi = dh[static_cast<size_t>(i)];
                grad.b1[static_cast<size_t>(i)] += dhi;
                double* wrow = grad.w1.data() + static_cast<size_t>(i) * plen;
                for (int j = 0; j < plen; ++j) wrow[j] += dhi * patch[static_cast<size_t>(j)];
            }
        }
    }
}

void save_params(const std::filesystem::path& path, const EmbeddingParams& params) {
    ByteWriter w;
    w.magic(kMagic);
    w.u16(kVersion);
    w.u32(static_cast<uint32_t>(params.shape.channels));
    w.u32(static_cast<uint32_t>(params.shape.radius));
    w.u32(static_cast<uint32_t>(params.shape.dim));
    for (double v : params.w1) w.f64(v);
    for (double v : params.b1) w.f64(v);
    for (double v : params.w2) w.f64(v);
    for (double v : params.b2) w.f64(v);
    atomic_write_file(path, w.buffer());
}

EmbeddingParams load_params(const std::filesystem::path& path) {
    ByteReader r(read_file_bytes(path));
    r.expect_magic(kMagic, "embedding checkpoint");
    if (r.u16() != kVersion) throw IoError("unsupported checkpoint version");
    EmbeddingConfig cfg;
    cfg.channels = static_cast<int>(r.u32());
    cfg.radius = static_cast<int>(r.u32());
    cfg.dim = static_cast<int>(r.u32());
    EmbeddingParams p = init_params(cfg, 0);
    for (auto& v : p.w1) v = r.f64();
    for (auto& v : p.b1) v = r.f64();
    for (auto& v : p.w2) v = r.f64();
    for (auto& v : p.b2) v = r.f64();
    return p;
}

}  // namespace synet
