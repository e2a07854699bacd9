#pragma once

#include <cstdint>
#include <vector>

#include "synet/embedding.hpp"
#include "synet/grid.hpp"
#include "synet/scene.hpp"

namespace synet {

// Learnable anchors: one positive center, K negative centers, M unlabeled
// prototypes. Stored unnormalized; every loss normalizes on use.
struct CenterBank {
    int dim = 0;
    int k = 0;
    int m = 0;
    std::vector<double> c_pos;       // D
    std::vector<double> c_neg;       // K x D, row-major
    std::vector<double> prototypes;  // M x D, row-major
};

// c_neg and prototypes start as random unit rows; c_pos starts at zero and is
// set by the trainer to the mean of the initial positive features.
CenterBank init_centers(int dim, int k, int m, uint64_t seed);

struct CenterGrad {
    std::vector<double> c_pos, c_neg, prototypes;
    static CenterGrad zeros(const CenterBank& bank);
    void add_scaled(const CenterGrad& other, double s);
};

// Soft assignment targets; every row sums to 1.
using TargetMatrix = Mat;

// Row i = softmax over centers of cos(f_i, c_k) / temperature.
TargetMatrix softmax_responsibilities(const Mat& feats, const Mat& centers, double temperature);

struct SinkhornDiagnostics {
    int iterations = 0;
    double max_col_residual = 0.0;
    bool converged = false;
};

// Entropic-OT scaling on cost 1 - cos(f_i, c_k) with unit row marginals and
// column marginals |F|/K. Rows of the returned matrix are renormalized to sum
// to 1; `plan_out` receives the pre-renormalization transport plan.
TargetMatrix sinkhorn_targets(const Mat& feats, const Mat& centers, double epsilon, int iters,
                              double tol = 1e-6, SinkhornDiagnostics* diag = nullptr,
                              Mat* plan_out = nullptr);

struct SetLossGrad {
    double value = 0.0;
    Mat d_feats;    // n x D, gradient w.r.t. the raw feature rows
    Mat d_centers;  // k x D, gradient w.r.t. the raw center rows
};

// Cross-entropy of softmax center assignments against constant targets T.
SetLossGrad neg_center_loss(const Mat& feats, const Mat& centers, const TargetMatrix& targets,
                            double temperature);

double combined_neg_loss(double l_syn, double l_unl, double lambda_n, double lambda_u);

struct RepulsionGrad {
    double value = 0.0;
    Mat d_neg;                  // K x D raw
    std::vector<double> d_pos;  // D raw
};

// Pushes negative centers off the positive center and apart from each other;
// log arguments clamped at 1e-6.
RepulsionGrad repulsion_loss(const Mat& c_neg, const std::vector<double>& c_pos, double gamma);

struct PuLossConfig {
    double tau_mix = 0.5;       // mixing weight between compactness and prototype CE
    double temperature = 0.55;  // two-view consistency temperature
    // Assignment cross-entropies: prediction softmax as printed (no
    // temperature), responsibility targets sharpened well below it. Equal
    // temperatures make those terms stationary at the assignment point.
    double pred_temperature = 1.0;
    double target_temperature = 0.05;
    // Internal scale of the two-view consistency stand-in; at 1 the InfoNCE
    // gradient mass swamps the compactness and assignment terms.
    double simclr_weight = 0.25;
    double lambda_n = 0.5;      // synthetic-negative share of the negative loss
    double lambda_u = 0.5;      // unlabeled share; lambda_n + lambda_u == 1
    double lambda_neg = 0.5;
    double lambda_rep = 0.5;
    double gamma = 0.1;         // negative-negative repulsion weight
    double sinkhorn_epsilon = 0.05;
    int sinkhorn_iters = 100;
    double sinkhorn_tol = 1e-6;
    int simclr_sample_cap = 128;
    uint64_t simclr_seed = 0;   // pixel sample for the two-view term
};

struct PuTerms {
    double l_occ = 0.0;
    double l_ce = 0.0;
    double l_simclr = 0.0;
    double l_lort = 0.0;
    double l_neg_syn = 0.0;
    double l_neg_unl = 0.0;
    double l_neg = 0.0;
    double l_rep = 0.0;
    double total = 0.0;
};

std::string pu_terms_to_json(const PuTerms& terms);

struct PuLossResult {
    PuTerms terms;
    std::vector<double> d_features;      // FeatureMap-shaped, primary view
    std::vector<double> d_features_aug;  // FeatureMap-shaped; empty without an aug view
    CenterGrad d_centers;
    SinkhornDiagnostics sinkhorn;
};

// Assignment targets are constants within a step. A cache filled on the first
// call and reused holds them fixed across repeated evaluations, which is what
// finite-difference probes of the step objective need.
struct PuTargetCache {
    bool valid = false;
    TargetMatrix ce, syn, unl;
};

// Baseline objective: (1 - tau_mix) * compactness + tau_mix * prototype CE
// + two-view consistency (skipped when `aug` is null).
PuLossResult lort_base_loss(const FeatureMap& features, const LabelMask& labels,
                            const CenterBank& centers, const PuLossConfig& config,
                            const FeatureMap* aug = nullptr, PuTargetCache* cache = nullptr);

// Full objective: baseline + lambda_neg * negative-center assignment
// + lambda_rep * repulsion. Zero-weighted terms are never evaluated, so the
// zero-weight configuration reproduces the baseline bit-for-bit.
PuLossResult total_pu_loss(const FeatureMap& features, const LabelMask& labels,
                           const CenterBank& centers, const PuLossConfig& config,
                           const FeatureMap* aug = nullptr, PuTargetCache* cache = nullptr);

}  // namespace synet
