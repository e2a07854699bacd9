#include "synet/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "synet/binio.hpp"
#include "synet/errors.hpp"
#include "synet/rng.hpp"

namespace synet {

const char* branch_name(Branch b) { return b == Branch::PU ? "pu" : "pn"; }

void adam_step(const std::vector<std::vector<double>*>& params,
               const std::vector<const std::vector<double>*>& grads, AdamState& state, double lr,
               const AdamConfig& config) {
    if (params.size() != grads.size()) throw ConfigError("adam: segment count mismatch");
    size_t total = 0;
    for (size_t s = 0; s < params.size(); ++s) {
        if (params[s]->size() != grads[s]->size()) throw ConfigError("adam: segment shape mismatch");
        total += params[s]->size();
    }
    if (state.m.size() != total) throw ConfigError("adam: state size mismatch");

    state.step += 1;
    const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
    size_t off = 0;
    for (size_t s = 0; s < params.size(); ++s) {
        auto& p = *params[s];
        const auto& g = *grads[s];
        for (size_t i = 0; i < p.size(); ++i, ++off) {
            state.m[off] = config.beta1 * state.m[off] + (1.0 - config.beta1) * g[i];
            state.v[off] = config.beta2 * state.v[off] + (1.0 - config.beta2) * g[i] * g[i];
            double mhat = state.m[off] / bc1;
            double vhat = state.v[off] / bc2;
            p[i] -= lr * mhat / (std::sqrt(vhat) + config.eps);
        }
    }
}

std::vector<std::vector<double>*> parameter_segments(EmbeddingParams& params,
                                                     CenterBank& centers) {
    return {&params.w1, &params.b1, &params.w2, &params.b2,
            &centers.c_pos, &centers.c_neg, &centers.prototypes};
}

namespace {

struct View {
    Scene scene;
    LabelMask labels;
};

View flip_view(const View& v) {
    View out = v;
    for (int k = 0; k < v.scene.channels; ++k)
        for (int r = 0; r < v.scene.height; ++r)
            for (int c = 0; c < v.scene.width; ++c)
                out.scene.value(k, r, c) = v.scene.value(k, r, v.scene.width - 1 - c);
    for (int r = 0; r < v.scene.height; ++r)
        for (int c = 0; c < v.scene.width; ++c) {
            out.scene.terrain.at(r, c) = v.scene.terrain.at(r, v.scene.width - 1 - c);
            out.labels.labels.at(r, c) = v.labels.labels.at(r, v.scene.width - 1 - c);
        }
    return out;
}

View crop_view(const View& v, int r0, int c0, int h, int w) {
    View out;
    out.scene.height = h;
    out.scene.width = w;
    out.scene.channels = v.scene.channels;
    out.scene.seed = v.scene.seed;
    out.scene.data.resize(static_cast<size_t>(v.scene.channels) * h * w);
    out.scene.terrain = Grid<uint8_t>(h, w);
    out.labels.labels = Grid<uint8_t>(h, w);
    for (int k = 0; k < v.scene.channels; ++k)
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c) out.scene.value(k, r, c) = v.scene.value(k, r0 + r, c0 + c);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            out.scene.terrain.at(r, c) = v.scene.terrain.at(r0 + r, c0 + c);
            out.labels.labels.at(r, c) = v.labels.labels.at(r0 + r, c0 + c);
        }
    return out;
}

size_t count_positive(const LabelMask& m) {
    size_t n = 0;
    for (size_t i = 0; i < m.labels.size(); ++i)
        if (m.labels[i] == static_cast<uint8_t>(Label::Positive)) ++n;
    return n;
}

// Geometric augmentation shared by both photometric views so pixel
// correspondence survives.
View augment_geometric(const SceneRecord& rec, const AugmentationConfig& aug, Rng& rng) {
    View v{rec.scene, rec.labels};
    if (rng.next_bool(aug.flip_prob)) v = flip_view(v);
    if (rng.next_bool(aug.crop_prob)) {
        int h = std::max(32, static_cast<int>(std::lround(aug.crop_fraction * v.scene.height)));
        int w = std::max(32, static_cast<int>(std::lround(aug.crop_fraction * v.scene.width)));
        if (h < v.scene.height || w < v.scene.width) {
            for (int attempt = 0; attempt < 8; ++attempt) {
                int r0 = rng.next_int(0, v.scene.height - h);
                int c0 = rng.next_int(0, v.scene.width - w);
                View cropped = crop_view(v, r0, c0, h, w);
                if (count_positive(cropped.labels) >= 2) {
                    v = std::move(cropped);
                    break;
                }
            }
        }
    }
    return v;
}

Scene jitter_channels(const Scene& scene, const AugmentationConfig& aug, Rng& rng) {
    Scene out = scene;
    if (!rng.next_bool(aug.jitter_prob)) return out;
    for (int k = 0; k < scene.channels; ++k) {
        double a = rng.next_range(1.0 - aug.jitter_strength, 1.0 + aug.jitter_strength);
        double b = rng.next_range(-aug.jitter_strength, aug.jitter_strength);
        for (int r = 0; r < scene.height; ++r)
            for (int c = 0; c < scene.width; ++c) {
                double x = a * scene.value(k, r, c) + b;
                out.value(k, r, c) = static_cast<float>(std::clamp(x, 0.0, 1.0));
            }
    }
    return out;
}

std::vector<double> positive_feature_mean(const std::vector<SceneRecord>& dataset,
                                          const EmbeddingParams& params, int max_scenes) {
    std::vector<double> mean(static_cast<size_t>(params.shape.dim), 0.0);
    size_t count = 0;
    int used = 0;
    for (const auto& rec : dataset) {
        if (used >= max_scenes) break;
        ++used;
        FeatureMap f = forward(rec.scene, params);
        for (int r = 0; r < f.height; ++r)
            for (int c = 0; c < f.width; ++c) {
                if (rec.labels.at(r, c) != Label::Positive) continue;
                const double* src = f.at(r, c);
                for (int d = 0; d < f.dim; ++d) mean[static_cast<size_t>(d)] += src[d];
                ++count;
            }
    }
    if (count == 0) throw EmptyFeatureSet("dataset has no positive pixels");
    for (auto& m : mean) m /= static_cast<double>(count);
    double n = std::sqrt(norm2(mean.data(), static_cast<int>(mean.size())));
    if (n < 1e-9) {
        std::fill(mean.begin(), mean.end(), 0.0);
        mean[0] = 1.0;
    }
    return mean;
}

}  // namespace

TrainResult train(const std::vector<SceneRecord>& dataset, const TrainConfig& config) {
    if (dataset.empty()) throw ConfigError("training dataset is empty");
    if (config.epochs < 1) throw ConfigError("epochs must be >= 1");
    if (config.batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (config.learning_rate < 0.0) throw ConfigError("learning_rate must be >= 0");
    if (config.injection_ratio < 0.0 || config.injection_ratio > 1.0)
        throw ConfigError("injection_ratio must lie in [0,1]");

    TrainResult result;

    // Composed working copy of the dataset.
    std::vector<SceneRecord> data = dataset;
    if (config.injection_ratio > 0.0) {
        Rng inject_rng(derive_seed(config.seed, 0x171));
        result.injections = inject_dataset(data, config.injection_ratio, inject_rng, config.inject);
    }
    if (config.branch == Branch::PU && config.pu.lambda_neg > 0.0 && config.pu.lambda_n > 0.0) {
        bool any_syn = false;
        for (const auto& rec : data)
            if (rec.labels.count(Label::NegSynthetic) > 0) any_syn = true;
        if (!any_syn)
            throw ConfigError("PU branch with lambda_neg > 0 needs at least one composed scene");
    }

    result.params = init_params(config.embed, derive_seed(config.seed, 0x9a2));
    result.centers =
        init_centers(config.embed.dim, config.k_centers, config.m_prototypes,
                     derive_seed(config.seed, 0xc3e));
    result.centers.c_pos = positive_feature_mean(data, result.params, 8);

    if (config.branch == Branch::PU)
        result.log_header = {"total", "l_lort", "l_occ", "l_ce", "l_simclr",
                             "l_neg_syn", "l_neg_unl", "l_rep"};
    else
        result.log_header = {"total", "l_vs_traj", "l_vs_exp", "l_syn_contra"};

    auto segments = parameter_segments(result.params, result.centers);
    size_t coord_total = 0;
    for (auto* s : segments) coord_total += s->size();
    AdamState adam = AdamState::zeros(coord_total);

    Rng rng(derive_seed(config.seed, 0x7290));
    std::vector<int> order(data.size());
    for (size_t i = 0; i < data.size(); ++i) order[i] = static_cast<int>(i);

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        rng.shuffle(order);
        int step = 0;
        for (size_t start = 0; start < order.size(); start += static_cast<size_t>(config.batch_size)) {
            size_t stop = std::min(order.size(), start + static_cast<size_t>(config.batch_size));
            ParamGrad pgrad = ParamGrad::zeros(config.embed);
            CenterGrad cgrad = CenterGrad::zeros(result.centers);
            int used = 0;
            std::vector<double> terms_acc(result.log_header.size(), 0.0);

            for (size_t bi = start; bi < stop; ++bi) {
                const SceneRecord& rec = data[static_cast<size_t>(order[bi])];
                View geo = augment_geometric(rec, config.aug, rng);

                try {
                    if (config.branch == Branch::PU) {
                        Scene view_a = jitter_channels(geo.scene, config.aug, rng);
                        Scene view_b = jitter_channels(geo.scene, config.aug, rng);
                        PuLossConfig lcfg = config.pu;
                        lcfg.simclr_seed = rng.next_u64();

                        ForwardCache cache_a, cache_b;
                        FeatureMap fa = forward(view_a, result.params, &cache_a);
                        FeatureMap fb = forward(view_b, result.params, &cache_b);
                        PuLossResult loss =
                            total_pu_loss(fa, geo.labels, result.centers, lcfg, &fb);

                        backward(view_a, result.params, cache_a, fa, loss.d_features, pgrad);
                        backward(view_b, result.params, cache_b, fb, loss.d_features_aug, pgrad);
                        cgrad.add_scaled(loss.d_centers, 1.0);

                        const PuTerms& t = loss.terms;
                        double vals[] = {t.total, t.l_lort, t.l_occ, t.l_ce,
                                         t.l_simclr, t.l_neg_syn, t.l_neg_unl, t.l_rep};
                        for (size_t i = 0; i < terms_acc.size(); ++i) terms_acc[i] += vals[i];
                    } else {
                        Scene view = jitter_channels(geo.scene, config.aug, rng);
                        Rng sample_rng(rng.next_u64());
                        SampleSets sets;
                        try {
                            sets = build_sample_sets(geo.labels, config.caps, sample_rng,
                                                     config.expand);
                            if (sets.n_s.empty() || sets.p_e.size() < 2 || sets.n_e.empty()) {
                                ++result.degenerate_skips;
                                continue;
                            }
                        } catch (const DegeneratePositiveSet&) {
                            ++result.degenerate_skips;
                            continue;
                        }

                        ForwardCache cache;
                        FeatureMap f = forward(view, result.params, &cache);
                        PnLossResult loss = total_pn_loss(f, sets, config.pn);
                        backward(view, result.params, cache, f, loss.d_features, pgrad);

                        const PnTerms& t = loss.terms;
                        double vals[] = {t.total, t.l_vs_traj, t.l_vs_exp, t.l_syn_contra};
                        for (size_t i = 0; i < terms_acc.size(); ++i) terms_acc[i] += vals[i];
                    }
                } catch (const GradientError& e) {
                    char msg[256];
                    std::snprintf(msg, sizeof(msg),
                                  "training aborted at epoch %d step %d (term %s): %s", epoch,
                                  step, e.term.c_str(), e.what());
                    throw GradientError(msg, e.term);
                }
                ++used;
            }
            if (used == 0) continue;

            double inv = 1.0 / static_cast<double>(used);
            pgrad.scale(inv);
            for (auto& x : cgrad.c_pos) x *= inv;
            for (auto& x : cgrad.c_neg) x *= inv;
            for (auto& x : cgrad.prototypes) x *= inv;
            for (auto& x : terms_acc) x *= inv;
            if (!std::isfinite(terms_acc[0])) {
                char msg[128];
                std::snprintf(msg, sizeof(msg), "non-finite batch loss at epoch %d step %d",
                              epoch, step);
                throw GradientError(msg, "total");
            }

            std::vector<const std::vector<double>*> gsegs = {
                &pgrad.w1, &pgrad.b1, &pgrad.w2, &pgrad.b2,
                &cgrad.c_pos, &cgrad.c_neg, &cgrad.prototypes};
            adam_step(segments, gsegs, adam, config.learning_rate, config.adam);

            result.log.push_back({epoch, step, terms_acc});
            ++step;
        }
    }

    // The PN score reference is the mean positive feature under the final
    // parameters; PU keeps its learned center.
    if (config.branch == Branch::PN)
        result.centers.c_pos = positive_feature_mean(data, result.params, 16);
    return result;
}

namespace {
constexpr char kMagic[4] = {'S', 'Y', 'N', 'P'};
constexpr uint16_t kVersion = 1;
}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    ByteWriter w;
    w.magic(kMagic);
    w.u16(kVersion);
    w.u32(static_cast<uint32_t>(ckpt.params.shape.channels));
    w.u32(static_cast<uint32_t>(ckpt.params.shape.radius));
    w.u32(static_cast<uint32_t>(ckpt.params.shape.dim));
    for (double v : ckpt.params.w1) w.f64(v);
    for (double v : ckpt.params.b1) w.f64(v);
    for (double v : ckpt.params.w2) w.f64(v);
    for (double v : ckpt.params.b2) w.f64(v);
    w.u32(static_cast<uint32_t>(ckpt.centers.k));
    w.u32(static_cast<uint32_t>(ckpt.centers.m));
    for (double v : ckpt.centers.c_pos) w.f64(v);
    for (double v : ckpt.centers.c_neg) w.f64(v);
    for (double v : ckpt.centers.prototypes) w.f64(v);
    w.u32(static_cast<uint32_t>(ckpt.config_json.size()));
    w.bytes(ckpt.config_json.data(), ckpt.config_json.size());
    atomic_write_file(path, w.buffer());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    ByteReader r(read_file_bytes(path));
    r.expect_magic(kMagic, "checkpoint");
    if (r.u16() != kVersion) throw IoError("unsupported checkpoint version");
    Checkpoint ck;
    EmbeddingConfig cfg;
    cfg.channels = static_cast<int>(r.u32());
    cfg.radius = static_cast<int>(r.u32());
    cfg.dim = static_cast<int>(r.u32());
    ck.params = init_params(cfg, 0);
    for (auto& v : ck.params.w1) v = r.f64();
    for (auto& v : ck.params.b1) v = r.f64();
    for (auto& v : ck.params.w2) v = r.f64();
    for (auto& v : ck.params.b2) v = r.f64();
    int k = static_cast<int>(r.u32());
    int m = static_cast<int>(r.u32());
    ck.centers = init_centers(cfg.dim, k, m, 0);
    for (auto& v : ck.centers.c_pos) v = r.f64();
    for (auto& v : ck.centers.c_neg) v = r.f64();
    for (auto& v : ck.centers.prototypes) v = r.f64();
    uint32_t jlen = r.u32();
    ck.config_json.resize(jlen);
    if (jlen) r.bytes(ck.config_json.data(), jlen);
    return ck;
}

std::string loss_log_to_csv(const std::vector<std::string>& header,
                            const std::vector<LossLogRow>& rows) {
    std::string out = "epoch,step";
    for (const auto& h : header) {
        out += ',';
        out += h;
    }
    out += '\n';
    char buf[64];
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof(buf), "%d,%d", row.epoch, row.step);
        out += buf;
        for (double v : row.values) {
            std::snprintf(buf, sizeof(buf), ",%.17g", v);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

}  // namespace synet
