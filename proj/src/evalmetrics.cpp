#include "synet/evalmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "synet/errors.hpp"

namespace synet {

ScoreMap similarity_map(const FeatureMap& features, std::span<const double> c_pos_raw) {
    const int dim = features.dim;
    if (static_cast<int>(c_pos_raw.size()) != dim) throw ConfigError("c_pos dimension mismatch");
    double n = std::sqrt(norm2(c_pos_raw.data(), dim));
    if (n < 1e-15) throw ConfigError("positive reference must be nonzero");
    std::vector<double> unit(c_pos_raw.begin(), c_pos_raw.end());
    for (auto& v : unit) v /= n;

    ScoreMap out;
    out.scores = Grid<double>(features.height, features.width, 0.0);
    for (int r = 0; r < features.height; ++r)
        for (int c = 0; c < features.width; ++c) {
            const double* f = features.at(r, c);
            double fn = std::sqrt(norm2(f, dim));
            double cosine = fn < 1e-15 ? 0.0 : dot(f, unit.data(), dim) / fn;
            out.scores.at(r, c) = std::clamp((cosine + 1.0) * 0.5, 0.0, 1.0);
        }
    return out;
}

namespace {

void require_two_classes(std::span<const uint8_t> gt) {
    bool pos = false, neg = false;
    for (uint8_t g : gt) (g ? pos : neg) = true;
    if (!pos || !neg)
        throw SingleClassGroundTruth("ground truth must contain both classes");
}

struct Counts {
    double tp = 0, fp = 0, fn = 0, tn = 0;
};

Counts counts_at(std::span<const double> scores, std::span<const uint8_t> gt, double threshold) {
    Counts c;
    for (size_t i = 0; i < scores.size(); ++i) {
        bool pred = scores[i] >= threshold;
        if (gt[i]) {
            (pred ? c.tp : c.fn) += 1;
        } else {
            (pred ? c.fp : c.tn) += 1;
        }
    }
    return c;
}

}  // namespace

std::vector<double> threshold_grid(int count) {
    std::vector<double> t(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) t[static_cast<size_t>(i)] = static_cast<double>(i) / (count - 1);
    return t;
}

MetricsReport pixel_metrics(std::span<const double> scores, std::span<const uint8_t> gt) {
    if (scores.size() != gt.size()) throw ConfigError("scores/gt size mismatch");
    if (scores.empty()) throw ConfigError("empty score set");
    require_two_classes(gt);

    const size_t n = scores.size();
    size_t n_pos = 0;
    for (uint8_t g : gt) n_pos += g ? 1 : 0;
    size_t n_neg = n - n_pos;

    // AUROC via tie-corrected ranks (Mann-Whitney).
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), size_t{0});
    std::sort(idx.begin(), idx.end(),
              [&](size_t a, size_t b) { return scores[a] < scores[b]; });
    std::vector<double> rank(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && scores[idx[j + 1]] == scores[idx[i]]) ++j;
        double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (size_t t = i; t <= j; ++t) rank[idx[t]] = avg;
        i = j + 1;
    }
    double rank_sum_pos = 0.0;
    for (size_t t = 0; t < n; ++t)
        if (gt[t]) rank_sum_pos += rank[t];
    double auroc = (rank_sum_pos - 0.5 * static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0)) /
                   (static_cast<double>(n_pos) * static_cast<double>(n_neg));

    // AP: descending sweep over distinct scores, tied groups entered atomically.
    std::vector<size_t> desc(idx.rbegin(), idx.rend());
    double ap = 0.0;
    double tp = 0.0, fp = 0.0, prev_recall = 0.0;
    size_t g = 0;
    while (g < n) {
        size_t h = g;
        while (h + 1 < n && scores[desc[h + 1]] == scores[desc[g]]) ++h;
        for (size_t t = g; t <= h; ++t) (gt[desc[t]] ? tp : fp) += 1.0;
        double recall = tp / static_cast<double>(n_pos);
        double precision = tp / (tp + fp);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
        g = h + 1;
    }

    MetricsReport rep;
    rep.auroc = auroc;
    rep.ap = ap;

    // MaxF on the fixed threshold grid.
    double best_f1 = -1.0, best_t = 0.0;
    Counts best{};
    for (double t : threshold_grid()) {
        Counts c = counts_at(scores, gt, t);
        double denom = 2.0 * c.tp + c.fp + c.fn;
        double f1 = denom > 0.0 ? 2.0 * c.tp / denom : 0.0;
        if (f1 > best_f1) {
            best_f1 = f1;
            best_t = t;
            best = c;
        }
    }
    rep.maxf = best_f1;
    rep.maxf_threshold = best_t;
    rep.pre = (best.tp + best.fp) > 0.0 ? best.tp / (best.tp + best.fp) : 0.0;
    rep.rec = best.tp / static_cast<double>(n_pos);
    rep.fpr = best.fp / static_cast<double>(n_neg);
    rep.fnr = best.fn / static_cast<double>(n_pos);
    return rep;
}

FprCurve object_centric_fpr(std::span<const double> mask_scores,
                            const std::vector<double>& thresholds) {
    if (mask_scores.empty()) throw EmptyNegativeRegion("no pixels inside negative masks");
    for (size_t i = 1; i < thresholds.size(); ++i)
        if (thresholds[i] <= thresholds[i - 1]) throw ConfigError("thresholds must ascend");

    FprCurve curve;
    curve.thresholds = thresholds;
    curve.fpr.resize(thresholds.size());
    for (size_t t = 0; t < thresholds.size(); ++t) {
        size_t above = 0;
        for (double s : mask_scores)
            if (s >= thresholds[t]) ++above;
        curve.fpr[t] = static_cast<double>(above) / static_cast<double>(mask_scores.size());
    }
    return curve;
}

FprCurve object_centric_fpr(const std::vector<const ScoreMap*>& scores,
                            const std::vector<const Grid<uint8_t>*>& negative_masks,
                            const std::vector<double>& thresholds) {
    if (scores.size() != negative_masks.size())
        throw ConfigError("score/mask list size mismatch");
    std::vector<double> pooled;
    for (size_t s = 0; s < scores.size(); ++s) {
        const auto& grid = scores[s]->scores;
        const auto& mask = *negative_masks[s];
        if (grid.height() != mask.height() || grid.width() != mask.width())
            throw ConfigError("score/mask shape mismatch");
        for (size_t i = 0; i < mask.size(); ++i)
            if (mask[i]) pooled.push_back(grid[i]);
    }
    return object_centric_fpr(pooled, thresholds);
}

std::pair<std::vector<double>, std::vector<double>> similarity_histograms(
    std::span<const double> scores, std::span<const uint8_t> gt) {
    if (scores.size() != gt.size()) throw ConfigError("scores/gt size mismatch");
    require_two_classes(gt);

    std::vector<double> pos(kHistogramBins, 0.0), neg(kHistogramBins, 0.0);
    size_t n_pos = 0, n_neg = 0;
    for (size_t i = 0; i < scores.size(); ++i) {
        int bin = std::min(kHistogramBins - 1,
                           static_cast<int>(scores[i] * kHistogramBins));
        bin = std::max(0, bin);
        if (gt[i]) {
            pos[static_cast<size_t>(bin)] += 1.0;
            ++n_pos;
        } else {
            neg[static_cast<size_t>(bin)] += 1.0;
            ++n_neg;
        }
    }
    for (auto& v : pos) v /= static_cast<double>(n_pos);
    for (auto& v : neg) v /= static_cast<double>(n_neg);
    return {pos, neg};
}

double overlap_coefficient(std::span<const double> density_pos,
                           std::span<const double> density_neg) {
    if (density_pos.size() != density_neg.size()) throw ConfigError("density size mismatch");
    double s = 0.0;
    for (size_t i = 0; i < density_pos.size(); ++i) s += std::min(density_pos[i], density_neg[i]);
    return s;
}

std::vector<uint8_t> traversable_ground_truth(const Scene& scene, const LabelMask& labels) {
    std::vector<uint8_t> gt(scene.pixel_count(), 0);
    for (int r = 0; r < scene.height; ++r)
        for (int c = 0; c < scene.width; ++c) {
            bool trav = terrain_traversable(scene.terrain_at(r, c)) &&
                        labels.at(r, c) != Label::NegSynthetic;
            gt[static_cast<size_t>(r) * static_cast<size_t>(scene.width) + static_cast<size_t>(c)] =
                trav ? 1 : 0;
        }
    return gt;
}

std::string metrics_to_csv(const MetricsReport& r) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "auroc,maxf,ap,pre,rec,fpr,fnr\n%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f\n",
                  r.auroc, r.maxf, r.ap, r.pre, r.rec, r.fpr, r.fnr);
    return buf;
}

std::string fpr_curve_to_csv(const FprCurve& curve) {
    std::string out = "threshold,fpr\n";
    char buf[64];
    for (size_t i = 0; i < curve.thresholds.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.9f,%.9f\n", curve.thresholds[i], curve.fpr[i]);
        out += buf;
    }
    return out;
}

std::string histograms_to_csv(const std::vector<double>& density_pos,
                              const std::vector<double>& density_neg) {
    std::string out = "bin_lo,bin_hi,p_pos,p_neg\n";
    char buf[128];
    for (int i = 0; i < kHistogramBins; ++i) {
        double lo = static_cast<double>(i) / kHistogramBins;
        double hi = static_cast<double>(i + 1) / kHistogramBins;
        std::snprintf(buf, sizeof(buf), "%.9f,%.9f,%.12g,%.12g\n", lo, hi,
                      density_pos[static_cast<size_t>(i)], density_neg[static_cast<size_t>(i)]);
        out += buf;
    }
    return out;
}

}  // namespace synet
