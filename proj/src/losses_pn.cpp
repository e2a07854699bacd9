#include "synet/losses_pn.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "synet/errors.hpp"
#include "synet/scene_gen.hpp"

namespace synet {

namespace {

constexpr double kZeroNorm = 1e-15;

struct UnitRows {
    Mat unit;
    std::vector<double> norms;
};

UnitRows gather_unit(const FeatureMap& f, const std::vector<int>& pixels, const char* what) {
    UnitRows out;
    out.unit = Mat(static_cast<int>(pixels.size()), f.dim);
    out.norms.resize(pixels.size());
    for (size_t i = 0; i < pixels.size(); ++i) {
        const double* src = f.at(static_cast<size_t>(pixels[i]));
        double n = std::sqrt(norm2(src, f.dim));
        if (n < kZeroNorm) throw ConfigError(std::string(what) + " contains a zero vector");
        out.norms[i] = n;
        double* dst = out.unit.row(static_cast<int>(i));
        for (int j = 0; j < f.dim; ++j) dst[j] = src[j] / n;
    }
    return out;
}

void scatter_projected(const UnitRows& rows, const Mat& d_unit, const std::vector<int>& pixels,
                       double weight, std::vector<double>& d_features, int dim) {
    for (size_t i = 0; i < pixels.size(); ++i) {
        const double* u = rows.unit.row(static_cast<int>(i));
        const double* g = d_unit.row(static_cast<int>(i));
        double ug = dot(u, g, dim);
        double* dst = d_features.data() + static_cast<size_t>(pixels[i]) * static_cast<size_t>(dim);
        double inv = weight / rows.norms[i];
        for (int j = 0; j < dim; ++j) dst[j] += inv * (g[j] - ug * u[j]);
    }
}

void check_finite(double v, const char* term) {
    if (!std::isfinite(v)) throw GradientError(std::string("non-finite loss term: ") + term, term);
}

}  // namespace

double contrastive_loss(const FeatureMap& features, const std::vector<int>& positives,
                        const std::vector<int>& negatives, double temperature,
                        bool include_positive_in_denominator, std::vector<double>* d_features,
                        double weight) {
    const int np = static_cast<int>(positives.size());
    const int nn = static_cast<int>(negatives.size());
    if (np < 2) throw DegeneratePositiveSet("contrastive loss needs at least two positives");
    if (nn < 1) throw EmptyNegativeSet("contrastive loss needs at least one negative");
    if (temperature <= 0.0) throw ConfigError("temperature must be positive");

    const int dim = features.dim;
    UnitRows p = gather_unit(features, positives, "positive set");
    UnitRows n = gather_unit(features, negatives, "negative set");
    Mat d_unit_p(np, dim), d_unit_n(nn, dim);

    const double m_pairs = static_cast<double>(np) * (np - 1);
    double loss = 0.0;

    if (!include_positive_in_denominator) {
        // Shared per-anchor denominator over the negatives.
        std::vector<double> sims(static_cast<size_t>(nn));
        for (int i = 0; i < np; ++i) {
            const double* pi = p.unit.row(i);
            double mx = -1e300;
            for (int k = 0; k < nn; ++k) {
                sims[static_cast<size_t>(k)] = dot(pi, n.unit.row(k), dim) / temperature;
                mx = std::max(mx, sims[static_cast<size_t>(k)]);
            }
            double z = 0.0;
            for (int k = 0; k < nn; ++k) z += std::exp(sims[static_cast<size_t>(k)] - mx);
            double lse = mx + std::log(z);

            double num = 0.0;
            for (int j = 0; j < np; ++j) {
                if (j == i) continue;
                double sij = dot(pi, p.unit.row(j), dim) / temperature;
                num += sij - lse;
                if (d_features) {
                    // Numerator pulls both members of the pair together.
                    double cw = -1.0 / (m_pairs * temperature);
                    double* dpi = d_unit_p.row(i);
                    double* dpj = d_unit_p.row(j);
                    const double* pj = p.unit.row(j);
                    for (int t = 0; t < dim; ++t) {
                        dpi[t] += cw * pj[t];
                        dpj[t] += cw * pi[t];
                    }
                }
            }
            loss -= num / m_pairs;
            if (d_features) {
                double dw = static_cast<double>(np - 1) / (m_pairs * temperature);
                double* dpi = d_unit_p.row(i);
                for (int k = 0; k < nn; ++k) {
                    double alpha = std::exp(sims[static_cast<size_t>(k)] - mx) / z;
                    const double* nk = n.unit.row(k);
                    double* dnk = d_unit_n.row(k);
                    for (int t = 0; t < dim; ++t) {
                        dpi[t] += dw * alpha * nk[t];
                        dnk[t] += dw * alpha * pi[t];
                    }
                }
            }
        }
    } else {
        // Per-pair denominator including the positive pair.
        std::vector<double> sims(static_cast<size_t>(nn) + 1);
        for (int i = 0; i < np; ++i) {
            const double* pi = p.unit.row(i);
            for (int j = 0; j < np; ++j) {
                if (j == i) continue;
                double sij = dot(pi, p.unit.row(j), dim) / temperature;
                double mx = sij;
                for (int k = 0; k < nn; ++k) {
                    sims[static_cast<size_t>(k)] = dot(pi, n.unit.row(k), dim) / temperature;
                    mx = std::max(mx, sims[static_cast<size_t>(k)]);
                }
                sims[static_cast<size_t>(nn)] = sij;
                double z = 0.0;
                for (int k = 0; k <= nn; ++k) z += std::exp(sims[static_cast<size_t>(k)] - mx);
                double lse = mx + std::log(z);
                loss -= (sij - lse) / m_pairs;
                if (!d_features) continue;
                double alpha_pos = std::exp(sij - mx) / z;
                double cw = (alpha_pos - 1.0) / (m_pairs * temperature);
                double* dpi = d_unit_p.row(i);
                double* dpj = d_unit_p.row(j);
                const double* pj = p.unit.row(j);
                for (int t = 0; t < dim; ++t) {
                    dpi[t] += cw * pj[t];
                    dpj[t] += cw * pi[t];
                }
                for (int k = 0; k < nn; ++k) {
                    double alpha = std::exp(sims[static_cast<size_t>(k)] - mx) / z;
                    double dw = alpha / (m_pairs * temperature);
                    const double* nk = n.unit.row(k);
                    double* dnk = d_unit_n.row(k);
                    for (int t = 0; t < dim; ++t) {
                        dpi[t] += dw * nk[t];
                        dnk[t] += dw * pi[t];
                    }
                }
            }
        }
    }

    check_finite(loss, "l_contra");
    if (d_features) {
        scatter_projected(p, d_unit_p, positives, weight, *d_features, dim);
        scatter_projected(n, d_unit_n, negatives, weight, *d_features, dim);
    }
    return loss;
}

PnLossResult vs_loss(const FeatureMap& features, const SampleSets& sets,
                     const PnLossConfig& config) {
    if (config.omega_e < 0.0 || config.omega_e > 1.0)
        throw ConfigError("omega_e must lie in [0,1]");
    PnLossResult out;
    out.d_features.assign(features.v.size(), 0.0);

    const double w_traj = 1.0 - config.omega_e;
    const double w_exp = config.omega_e;
    if (w_traj != 0.0) {
        out.terms.l_vs_traj =
            contrastive_loss(features, sets.p_s, sets.n_s, config.temperature,
                             config.include_positive_in_denominator, &out.d_features, w_traj);
    }
    if (w_exp != 0.0) {
        out.terms.l_vs_exp =
            contrastive_loss(features, sets.p_e, sets.n_e, config.temperature,
                             config.include_positive_in_denominator, &out.d_features, w_exp);
    }
    if (w_exp == 0.0)
        out.terms.l_vs = out.terms.l_vs_traj;
    else if (w_traj == 0.0)
        out.terms.l_vs = out.terms.l_vs_exp;
    else
        out.terms.l_vs = w_traj * out.terms.l_vs_traj + w_exp * out.terms.l_vs_exp;
    out.terms.total = out.terms.l_vs;
    return out;
}

PnLossResult total_pn_loss(const FeatureMap& features, const SampleSets& sets,
                           const PnLossConfig& config) {
    PnLossResult out = vs_loss(features, sets, config);
    if (config.lambda_n != 0.0 && !sets.syn_s.empty()) {
        out.terms.l_syn_contra =
            contrastive_loss(features, sets.p_s, sets.syn_s, config.temperature,
                             config.include_positive_in_denominator, &out.d_features,
                             config.lambda_n);
        out.terms.total += config.lambda_n * out.terms.l_syn_contra;
    }
    check_finite(out.terms.total, "total");
    return out;
}

SampleSets build_sample_sets(const LabelMask& labels, const SampleCaps& caps, Rng& rng,
                             const ExpandConfig& expand) {
    const int h = labels.labels.height(), w = labels.labels.width();
    std::vector<int> pos, neg_low, syn;
    for (int i = 0; i < h * w; ++i) {
        switch (static_cast<Label>(labels.labels[static_cast<size_t>(i)])) {
            case Label::Positive: pos.push_back(i); break;
            case Label::NegLowConf: neg_low.push_back(i); break;
            case Label::NegSynthetic: syn.push_back(i); break;
            default: break;
        }
    }
    if (pos.size() < 2) throw DegeneratePositiveSet("need at least two positive pixels");

    auto take = [&rng](const std::vector<int>& src, int cap) {
        if (static_cast<int>(src.size()) <= cap) return src;
        std::vector<int> picked = rng.sample_without_replacement(static_cast<int>(src.size()), cap);
        std::vector<int> out;
        out.reserve(picked.size());
        for (int i : picked) out.push_back(src[static_cast<size_t>(i)]);
        return out;
    };

    SampleSets sets;
    sets.p_s = take(pos, caps.p);
    sets.n_s = take(neg_low, caps.n);
    sets.syn_s = take(syn, caps.syn);

    // Expansion stand-in: dilated positive region and its far complement.
    Grid<uint8_t> pos_mask(h, w, 0);
    for (int i : pos) pos_mask[static_cast<size_t>(i)] = 1;
    Grid<int64_t> d2 = squared_distance_to(pos_mask);
    double r2 = expand.expand_radius * expand.expand_radius;
    double f2 = expand.far_distance * expand.far_distance;
    std::vector<int> expanded, far;
    for (int i = 0; i < h * w; ++i) {
        double d = static_cast<double>(d2[static_cast<size_t>(i)]);
        auto label = static_cast<Label>(labels.labels[static_cast<size_t>(i)]);
        if (d <= r2 && label != Label::NegSynthetic) expanded.push_back(i);
        if (d > f2) far.push_back(i);
    }
    sets.p_e = take(expanded, caps.p);
    sets.n_e = take(far, caps.n);
    return sets;
}

std::string pn_terms_to_json(const PnTerms& t) {
    nlohmann::json j;
    j["total"] = t.total;
    j["l_vs_traj"] = t.l_vs_traj;
    j["l_vs_exp"] = t.l_vs_exp;
    j["l_syn_contra"] = t.l_syn_contra;
    return j.dump();
}

}  // namespace synet
