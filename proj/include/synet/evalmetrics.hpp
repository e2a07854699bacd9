#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "synet/embedding.hpp"
#include "synet/grid.hpp"
#include "synet/scene.hpp"

namespace synet {

struct ScoreMap {
    Grid<double> scores;  // values in [0,1]
    std::string checkpoint_id;
    std::string scene_id;
};

// Cosine against the normalized positive reference, affinely mapped to [0,1].
ScoreMap similarity_map(const FeatureMap& features, std::span<const double> c_pos_raw);

struct MetricsReport {
    double auroc = 0.0;
    double maxf = 0.0;
    double ap = 0.0;
    double pre = 0.0;
    double rec = 0.0;
    double fpr = 0.0;
    double fnr = 0.0;
    double maxf_threshold = 0.0;
};

// Rank-based AUROC with tie correction, AP from the descending-score sweep,
// MaxF over the fixed 256-value threshold grid; PRE/REC/FPR/FNR reported at
// the MaxF threshold.
MetricsReport pixel_metrics(std::span<const double> scores, std::span<const uint8_t> gt);

struct FprCurve {
    std::vector<double> thresholds;  // strictly ascending
    std::vector<double> fpr;         // non-increasing; traversable iff score >= t
};

// Pooled over all scenes: fraction of negative-mask pixels scoring >= t.
FprCurve object_centric_fpr(const std::vector<const ScoreMap*>& scores,
                            const std::vector<const Grid<uint8_t>*>& negative_masks,
                            const std::vector<double>& thresholds);
FprCurve object_centric_fpr(std::span<const double> mask_scores,
                            const std::vector<double>& thresholds);

inline constexpr int kHistogramBins = 64;

// Fixed 64-bin densities over [0,1], each normalized to sum 1.
std::pair<std::vector<double>, std::vector<double>> similarity_histograms(
    std::span<const double> scores, std::span<const uint8_t> gt);

double overlap_coefficient(std::span<const double> density_pos,
                           std::span<const double> density_neg);

// Toy ground truth: traversable terrain that was not overridden by a
// composed negative.
std::vector<uint8_t> traversable_ground_truth(const Scene& scene, const LabelMask& labels);

// Evenly spaced grid including both endpoints.
std::vector<double> threshold_grid(int count = 256);

std::string metrics_to_csv(const MetricsReport& report);
std::string fpr_curve_to_csv(const FprCurve& curve);
std::string histograms_to_csv(const std::vector<double>& density_pos,
                              const std::vector<double>& density_neg);

}  // namespace synet
