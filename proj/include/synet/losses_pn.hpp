#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "synet/embedding.hpp"
#include "synet/rng.hpp"
#include "synet/scene.hpp"

namespace synet {

// Pixel-index sample sets feeding the contrastive objectives. (p_s, n_s) come
// from trajectory supervision, (p_e, n_e) from the expanded stand-in, syn_s
// from composed synthetic negatives.
struct SampleSets {
    std::vector<int> p_s, n_s;
    std::vector<int> p_e, n_e;
    std::vector<int> syn_s;
};

struct SampleCaps {
    int p = 256;
    int n = 256;
    int syn = 256;
};

struct ExpandConfig {
    double expand_radius = 4.0;  // dilation of the positive region for p_e
    double far_distance = 16.0;  // distance beyond which pixels join n_e
};

struct PnLossConfig {
    double omega_e = 0.5;
    double temperature = 0.55;
    double lambda_n = 1.2;
    // The printed loss keeps only negatives in the denominator; this flag adds
    // the positive pair for the conventional variant.
    bool include_positive_in_denominator = false;
};

// Pairwise positive-attraction loss with negatives-only denominator,
// stabilized by max-subtraction. Gradients (scaled by `weight`) accumulate
// into `d_features` when non-null.
double contrastive_loss(const FeatureMap& features, const std::vector<int>& positives,
                        const std::vector<int>& negatives, double temperature,
                        bool include_positive_in_denominator = false,
                        std::vector<double>* d_features = nullptr, double weight = 1.0);

struct PnTerms {
    double l_vs_traj = 0.0;
    double l_vs_exp = 0.0;
    double l_vs = 0.0;
    double l_syn_contra = 0.0;
    double total = 0.0;
};

std::string pn_terms_to_json(const PnTerms& terms);

struct PnLossResult {
    PnTerms terms;
    std::vector<double> d_features;
};

// (1 - omega_e) * contrastive(p_s, n_s) + omega_e * contrastive(p_e, n_e).
// A zero-weighted degenerate term is skipped, not an error.
PnLossResult vs_loss(const FeatureMap& features, const SampleSets& sets,
                     const PnLossConfig& config);

// Full objective: vs_loss + lambda_n * contrastive(p_s, syn_s). Scenes with
// no synthetic negatives contribute only the vs term.
PnLossResult total_pn_loss(const FeatureMap& features, const SampleSets& sets,
                           const PnLossConfig& config);

// Seeded sampling without replacement from the label mask; expansion sets use
// a dilated positive region and its far complement.
SampleSets build_sample_sets(const LabelMask& labels, const SampleCaps& caps, Rng& rng,
                             const ExpandConfig& expand = {});

}  // namespace synet
