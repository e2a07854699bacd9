#include "synet/losses_pu.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "synet/errors.hpp"
#include "synet/rng.hpp"

namespace synet {

namespace {

constexpr double kZeroNorm = 1e-15;
constexpr double kRepClamp = 1e-6;

struct NormalizedRows {
    Mat unit;                   // rows scaled to unit length
    std::vector<double> norms;  // original row norms
};

NormalizedRows normalize_rows(const Mat& m, const char* what) {
    NormalizedRows out;
    out.unit = Mat(m.rows, m.cols);
    out.norms.resize(static_cast<size_t>(m.rows));
    for (int i = 0; i < m.rows; ++i) {
        double n = std::sqrt(norm2(m.row(i), m.cols));
        if (n < kZeroNorm) throw ConfigError(std::string(what) + " contains a zero vector");
        out.norms[static_cast<size_t>(i)] = n;
        const double* src = m.row(i);
        double* dst = out.unit.row(i);
        for (int j = 0; j < m.cols; ++j) dst[j] = src[j] / n;
    }
    return out;
}

// Chain rule through row normalization: d_raw = (g - (u . g) u) / norm.
void project_row(const double* unit, double norm, const double* g, double* out, int n,
                 double scale = 1.0) {
    double ug = dot(unit, g, n);
    for (int j = 0; j < n; ++j) out[j] += scale * (g[j] - ug * unit[j]) / norm;
}

void softmax_inplace(double* x, int n) {
    double m = x[0];
    for (int i = 1; i < n; ++i) m = std::max(m, x[i]);
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        x[i] = std::exp(x[i] - m);
        s += x[i];
    }
    for (int i = 0; i < n; ++i) x[i] /= s;
}

std::vector<int> label_pixels(const LabelMask& labels, Label want) {
    std::vector<int> out;
    for (size_t i = 0; i < labels.labels.size(); ++i)
        if (labels.labels[i] == static_cast<uint8_t>(want)) out.push_back(static_cast<int>(i));
    return out;
}

Mat gather_rows(const FeatureMap& f, const std::vector<int>& pixels) {
    Mat m(static_cast<int>(pixels.size()), f.dim);
    for (size_t i = 0; i < pixels.size(); ++i) {
        const double* src = f.at(static_cast<size_t>(pixels[i]));
        std::copy(src, src + f.dim, m.row(static_cast<int>(i)));
    }
    return m;
}

void scatter_rows(const Mat& grads, const std::vector<int>& pixels, double scale,
                  std::vector<double>& d_features, int dim) {
    for (size_t i = 0; i < pixels.size(); ++i) {
        const double* g = grads.row(static_cast<int>(i));
        double* dst = d_features.data() + static_cast<size_t>(pixels[i]) * static_cast<size_t>(dim);
        for (int j = 0; j < dim; ++j) dst[j] += scale * g[j];
    }
}

Mat centers_as_mat(const std::vector<double>& flat, int rows, int dim) {
    Mat m(rows, dim);
    std::copy(flat.begin(), flat.end(), m.a.begin());
    return m;
}

void check_finite(double v, const char* term) {
    if (!std::isfinite(v)) throw GradientError(std::string("non-finite loss term: ") + term, term);
}

}  // namespace

CenterBank init_centers(int dim, int k, int m, uint64_t seed) {
    if (dim < 1 || k < 2 || m < 1) throw ConfigError("center bank needs dim >= 1, K >= 2, M >= 1");
    CenterBank bank;
    bank.dim = dim;
    bank.k = k;
    bank.m = m;
    bank.c_pos.assign(static_cast<size_t>(dim), 0.0);
    Rng rng(derive_seed(seed, 0xcb17));
    auto unit_rows = [&](int rows) {
        std::vector<double> v(static_cast<size_t>(rows) * static_cast<size_t>(dim));
        for (int i = 0; i < rows; ++i) {
            double n2 = 0.0;
            do {
                n2 = 0.0;
                for (int j = 0; j < dim; ++j) {
                    double g = rng.next_gaussian();
                    v[static_cast<size_t>(i) * dim + static_cast<size_t>(j)] = g;
                    n2 += g * g;
                }
            } while (n2 < 1e-12);
            double n = std::sqrt(n2);
            for (int j = 0; j < dim; ++j) v[static_cast<size_t>(i) * dim + static_cast<size_t>(j)] /= n;
        }
        return v;
    };
    bank.c_neg = unit_rows(k);
    bank.prototypes = unit_rows(m);
    return bank;
}

CenterGrad CenterGrad::zeros(const CenterBank& bank) {
    CenterGrad g;
    g.c_pos.assign(bank.c_pos.size(), 0.0);
    g.c_neg.assign(bank.c_neg.size(), 0.0);
    g.prototypes.assign(bank.prototypes.size(), 0.0);
    return g;
}

void CenterGrad::add_scaled(const CenterGrad& other, double s) {
    for (size_t i = 0; i < c_pos.size(); ++i) c_pos[i] += s * other.c_pos[i];
    for (size_t i = 0; i < c_neg.size(); ++i) c_neg[i] += s * other.c_neg[i];
    for (size_t i = 0; i < prototypes.size(); ++i) prototypes[i] += s * other.prototypes[i];
}

TargetMatrix softmax_responsibilities(const Mat& feats, const Mat& centers, double temperature) {
    if (feats.rows == 0) throw EmptyFeatureSet("softmax_responsibilities: empty feature set");
    if (temperature <= 0.0) throw ConfigError("temperature must be positive");
    NormalizedRows f = normalize_rows(feats, "features");
    NormalizedRows c = normalize_rows(centers, "centers");
    TargetMatrix t(feats.rows, centers.rows);
    for (int i = 0; i < feats.rows; ++i) {
        double* row = t.row(i);
        for (int k = 0; k < centers.rows; ++k)
            row[k] = dot(f.unit.row(i), c.unit.row(k), feats.cols) / temperature;
        softmax_inplace(row, centers.rows);
    }
    return t;
}

TargetMatrix sinkhorn_targets(const Mat& feats, const Mat& centers, double epsilon, int iters,
                              double tol, SinkhornDiagnostics* diag, Mat* plan_out) {
    const int n = feats.rows, k = centers.rows;
    if (n == 0) throw EmptyFeatureSet("sinkhorn_targets: empty feature set");
    if (n < k) throw ConfigError("sinkhorn_targets needs at least K feature rows");
    if (epsilon <= 0.0) throw ConfigError("sinkhorn epsilon must be positive");
    if (iters < 1) throw ConfigError("sinkhorn needs at least one iteration");

    NormalizedRows f = normalize_rows(feats, "features");
    NormalizedRows c = normalize_rows(centers, "centers");

    // Gibbs kernel of cost 1 - cos, row marginal 1, column marginal n/k.
    Mat g(n, k);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j)
            g.at(i, j) = std::exp(-(1.0 - dot(f.unit.row(i), c.unit.row(j), feats.cols)) / epsilon);

    const double col_mass = static_cast<double>(n) / static_cast<double>(k);
    std::vector<double> u(static_cast<size_t>(n), 1.0), v(static_cast<size_t>(k), 1.0);
    SinkhornDiagnostics d;
    // Overrelaxed scaling: same fixed point as the plain iteration, but the
    // relaxation weight is tuned from the observed contraction rate. A plain
    // final round restores exact unit row sums before convergence is declared.
    double omega = 1.0;
    double prev_res = 1e300;
    std::vector<double> res_hist;
    for (int it = 0; it < iters; ++it) {
        for (int j = 0; j < k; ++j) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += g.at(i, j) * u[static_cast<size_t>(i)];
            double cand = col_mass / std::max(s, 1e-300);
            double& vj = v[static_cast<size_t>(j)];
            vj = omega == 1.0 ? cand : vj * std::pow(cand / vj, omega);
        }
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < k; ++j) s += g.at(i, j) * v[static_cast<size_t>(j)];
            double cand = 1.0 / std::max(s, 1e-300);
            double& ui = u[static_cast<size_t>(i)];
            ui = omega == 1.0 ? cand : ui * std::pow(cand / ui, omega);
        }
        d.iterations = it + 1;
        double worst = 0.0;
        for (int j = 0; j < k; ++j) {
            double s = 0.0;
            for (int i = 0; i < n; ++i)
                s += u[static_cast<size_t>(i)] * g.at(i, j) * v[static_cast<size_t>(j)];
            worst = std::max(worst, std::abs(s - col_mass));
        }
        d.max_col_residual = worst;
        res_hist.push_back(worst);
        if (worst <= tol) {
            if (omega == 1.0) {
                d.converged = true;
                break;
            }
            omega = 1.0;
        } else if (d.iterations == 6 && res_hist[5] > 0.0 && res_hist[2] > 0.0) {
            double rho = std::pow(res_hist[5] / res_hist[2], 1.0 / 3.0);
            if (rho > 0.05 && rho < 1.0)
                omega = std::min(1.9, 2.0 / (1.0 + std::sqrt(1.0 - rho * rho)));
        } else if (worst > prev_res && d.iterations > 6) {
            omega = 1.0 + (omega - 1.0) * 0.7;
        }
        prev_res = worst;
    }

    Mat plan(n, k);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j)
            plan.at(i, j) = u[static_cast<size_t>(i)] * g.at(i, j) * v[static_cast<size_t>(j)];
    if (plan_out) *plan_out = plan;
    if (diag) *diag = d;

    TargetMatrix t = plan;
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < k; ++j) s += t.at(i, j);
        for (int j = 0; j < k; ++j) t.at(i, j) /= s;
    }
    return t;
}

SetLossGrad neg_center_loss(const Mat& feats, const Mat& centers, const TargetMatrix& targets,
                            double temperature) {
    const int n = feats.rows, k = centers.rows, dim = feats.cols;
    if (n == 0) throw EmptyFeatureSet("neg_center_loss: empty feature set");
    if (temperature <= 0.0) throw ConfigError("temperature must be positive");
    if (targets.rows != n || targets.cols != k)
        throw ConfigError("target matrix shape mismatch");
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < k; ++j) s += targets.at(i, j);
        if (std::abs(s - 1.0) > 1e-6) throw ConfigError("target rows must sum to 1");
    }

    NormalizedRows f = normalize_rows(feats, "features");
    NormalizedRows c = normalize_rows(centers, "centers");

    SetLossGrad out;
    out.d_feats = Mat(n, dim);
    out.d_centers = Mat(k, dim);
    Mat d_unit_c(k, dim);  // accumulated in normalized space, projected once

    std::vector<double> p(static_cast<size_t>(k));
    double loss = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < k; ++j)
            p[static_cast<size_t>(j)] = dot(f.unit.row(i), c.unit.row(j), dim) / temperature;
        double m = *std::max_element(p.begin(), p.end());
        double lse = 0.0;
        for (int j = 0; j < k; ++j) lse += std::exp(p[static_cast<size_t>(j)] - m);
        lse = m + std::log(lse);
        std::vector<double> logit = p;
        softmax_inplace(p.data(), k);

        std::vector<double> df(static_cast<size_t>(dim), 0.0);
        for (int j = 0; j < k; ++j) {
            loss -= targets.at(i, j) * (logit[static_cast<size_t>(j)] - lse);
            double coeff = (p[static_cast<size_t>(j)] - targets.at(i, j)) / (n * temperature);
            const double* cu = c.unit.row(j);
            for (int t = 0; t < dim; ++t) df[static_cast<size_t>(t)] += coeff * cu[t];
            double* dc = d_unit_c.row(j);
            const double* fu = f.unit.row(i);
            for (int t = 0; t < dim; ++t) dc[t] += coeff * fu[t];
        }
        project_row(f.unit.row(i), f.norms[static_cast<size_t>(i)], df.data(), out.d_feats.row(i),
                    dim);
    }
    for (int j = 0; j < k; ++j)
        project_row(c.unit.row(j), c.norms[static_cast<size_t>(j)], d_unit_c.row(j),
                    out.d_centers.row(j), dim);
    out.value = loss / n;
    return out;
}

double combined_neg_loss(double l_syn, double l_unl, double lambda_n, double lambda_u) {
    if (lambda_n < 0.0 || lambda_u < 0.0 || std::abs(lambda_n + lambda_u - 1.0) > 1e-9)
        throw ConfigError("lambda_n and lambda_u must be nonnegative and sum to 1");
    return lambda_n * l_syn + lambda_u * l_unl;
}

RepulsionGrad repulsion_loss(const Mat& c_neg, const std::vector<double>& c_pos, double gamma) {
    const int k = c_neg.rows, dim = c_neg.cols;
    if (k < 2) throw ConfigError("repulsion needs at least two negative centers");
    if (static_cast<int>(c_pos.size()) != dim) throw ConfigError("c_pos dimension mismatch");

    Mat pos_mat(1, dim);
    std::copy(c_pos.begin(), c_pos.end(), pos_mat.a.begin());
    NormalizedRows p = normalize_rows(pos_mat, "positive center");
    NormalizedRows c = normalize_rows(c_neg, "negative centers");

    RepulsionGrad out;
    out.d_neg = Mat(k, dim);
    out.d_pos.assign(static_cast<size_t>(dim), 0.0);
    Mat d_unit_neg(k, dim);
    std::vector<double> d_unit_pos(static_cast<size_t>(dim), 0.0);

    double loss = 0.0;
    const double* pu = p.unit.row(0);
    for (int i = 0; i < k; ++i) {
        double raw = 1.0 - dot(c.unit.row(i), pu, dim);
        double gval = std::max(raw, kRepClamp);
        loss -= std::log(gval) / k;
        if (raw > kRepClamp) {
            double w = 1.0 / (k * gval);
            double* dn = d_unit_neg.row(i);
            for (int t = 0; t < dim; ++t) {
                dn[t] += w * pu[t];
                d_unit_pos[static_cast<size_t>(t)] += w * c.unit.at(i, t);
            }
        }
    }
    if (gamma != 0.0) {
        double w0 = gamma / (static_cast<double>(k) * (k - 1));
        for (int i = 0; i < k; ++i) {
            for (int j = 0; j < k; ++j) {
                if (i == j) continue;
                double raw = 1.0 - dot(c.unit.row(i), c.unit.row(j), dim);
                double gval = std::max(raw, kRepClamp);
                loss -= w0 * std::log(gval);
                if (raw > kRepClamp) {
                    double w = w0 / gval;
                    double* di = d_unit_neg.row(i);
                    double* dj = d_unit_neg.row(j);
                    for (int t = 0; t < dim; ++t) {
                        di[t] += w * c.unit.at(j, t);
                        dj[t] += w * c.unit.at(i, t);
                    }
                }
            }
        }
    }
    for (int i = 0; i < k; ++i)
        project_row(c.unit.row(i), c.norms[static_cast<size_t>(i)], d_unit_neg.row(i),
                    out.d_neg.row(i), dim);
    project_row(pu, p.norms[0], d_unit_pos.data(), out.d_pos.data(), dim);
    out.value = loss;
    return out;
}

namespace {

// Two-view consistency over a seeded pixel sample: anchor in view A, positive
// partner at the same pixel in view B, other sampled B pixels as negatives.
double simclr_term(const FeatureMap& a, const FeatureMap& b, double temperature, int cap,
                   uint64_t seed, std::vector<double>& d_a, std::vector<double>& d_b,
                   double weight) {
    const int dim = a.dim;
    const size_t total = a.pixel_count();
    Rng rng(derive_seed(seed, 0x51c1));
    int take = std::min<int>(cap, static_cast<int>(total));
    if (take < 2) return 0.0;
    std::vector<int> sample = rng.sample_without_replacement(static_cast<int>(total), take);

    const int n = take;
    Mat fa(n, dim), fb(n, dim);
    for (int i = 0; i < n; ++i) {
        std::copy(a.at(static_cast<size_t>(sample[static_cast<size_t>(i)])),
                  a.at(static_cast<size_t>(sample[static_cast<size_t>(i)])) + dim, fa.row(i));
        std::copy(b.at(static_cast<size_t>(sample[static_cast<size_t>(i)])),
                  b.at(static_cast<size_t>(sample[static_cast<size_t>(i)])) + dim, fb.row(i));
    }
    NormalizedRows na = normalize_rows(fa, "view A features");
    NormalizedRows nb = normalize_rows(fb, "view B features");

    Mat d_unit_a(n, dim), d_unit_b(n, dim);
    std::vector<double> sims(static_cast<size_t>(n));
    double loss = 0.0;
    for (int i = 0; i < n; ++i) {
        const double* ai = na.unit.row(i);
        for (int j = 0; j < n; ++j) sims[static_cast<size_t>(j)] = dot(ai, nb.unit.row(j), dim) / temperature;
        double m = *std::max_element(sims.begin(), sims.end());
        double z = 0.0;
        for (int j = 0; j < n; ++j) z += std::exp(sims[static_cast<size_t>(j)] - m);
        double lse = m + std::log(z);
        loss -= (sims[static_cast<size_t>(i)] - lse) / n;

        for (int j = 0; j < n; ++j) {
            double alpha = std::exp(sims[static_cast<size_t>(j)] - m) / z;
            double coeff = (alpha - (j == i ? 1.0 : 0.0)) / (n * temperature);
            const double* bj = nb.unit.row(j);
            double* da = d_unit_a.row(i);
            for (int t = 0; t < dim; ++t) da[t] += coeff * bj[t];
            double* db = d_unit_b.row(j);
            for (int t = 0; t < dim; ++t) db[t] += coeff * ai[t];
        }
    }
    for (int i = 0; i < n; ++i) {
        size_t px = static_cast<size_t>(sample[static_cast<size_t>(i)]);
        project_row(na.unit.row(i), na.norms[static_cast<size_t>(i)], d_unit_a.row(i),
                    d_a.data() + px * static_cast<size_t>(dim), dim, weight);
        project_row(nb.unit.row(i), nb.norms[static_cast<size_t>(i)], d_unit_b.row(i),
                    d_b.data() + px * static_cast<size_t>(dim), dim, weight);
    }
    return loss;
}

PuLossResult pu_loss_impl(const FeatureMap& features, const LabelMask& labels,
                          const CenterBank& centers, const PuLossConfig& config,
                          const FeatureMap* aug, bool with_extensions, PuTargetCache* cache) {
    const bool use_cached = cache && cache->valid;
    if (labels.labels.height() != features.height || labels.labels.width() != features.width)
        throw ConfigError("label mask does not match feature map");
    const int dim = features.dim;

    PuLossResult out;
    out.d_features.assign(features.v.size(), 0.0);
    if (aug) out.d_features_aug.assign(aug->v.size(), 0.0);
    out.d_centers = CenterGrad::zeros(centers);

    std::vector<int> pos = label_pixels(labels, Label::Positive);
    std::vector<int> unl = label_pixels(labels, Label::Unlabeled);
    if (pos.empty()) throw EmptyFeatureSet("no positive pixels");

    Mat pos_feats = gather_rows(features, pos);
    NormalizedRows pf = normalize_rows(pos_feats, "positive features");

    // Compactness toward the normalized positive center.
    const double occ_weight = 1.0 - config.tau_mix;
    {
        Mat pos_mat(1, dim);
        std::copy(centers.c_pos.begin(), centers.c_pos.end(), pos_mat.a.begin());
        NormalizedRows cp = normalize_rows(pos_mat, "positive center");
        const double* cu = cp.unit.row(0);
        double acc = 0.0;
        std::vector<double> d_unit_pos(static_cast<size_t>(dim), 0.0);
        const double inv = 1.0 / static_cast<double>(pos.size());
        for (int i = 0; i < pos_feats.rows; ++i) {
            const double* fu = pf.unit.row(i);
            acc += 2.0 - 2.0 * dot(fu, cu, dim);
            if (occ_weight != 0.0) {
                std::vector<double> df(static_cast<size_t>(dim));
                for (int t = 0; t < dim; ++t) {
                    df[static_cast<size_t>(t)] = -2.0 * inv * cu[t];
                    d_unit_pos[static_cast<size_t>(t)] += -2.0 * inv * fu[t];
                }
                Mat tmp(1, dim);
                project_row(fu, pf.norms[static_cast<size_t>(i)], df.data(), tmp.row(0), dim);
                double* dst = out.d_features.data() +
                              static_cast<size_t>(pos[static_cast<size_t>(i)]) * static_cast<size_t>(dim);
                for (int t = 0; t < dim; ++t) dst[t] += occ_weight * tmp.at(0, t);
            }
        }
        out.terms.l_occ = acc * (1.0 / static_cast<double>(pos.size()));
        check_finite(out.terms.l_occ, "l_occ");
        if (occ_weight != 0.0) {
            std::vector<double> d_raw(static_cast<size_t>(dim), 0.0);
            project_row(cu, cp.norms[0], d_unit_pos.data(), d_raw.data(), dim);
            for (int t = 0; t < dim; ++t) out.d_centers.c_pos[static_cast<size_t>(t)] += occ_weight * d_raw[static_cast<size_t>(t)];
        }
    }

    // Prototype soft-assignment cross-entropy over the unlabeled pixels.
    if (config.tau_mix != 0.0 && !unl.empty()) {
        Mat unl_feats = gather_rows(features, unl);
        Mat proto = centers_as_mat(centers.prototypes, centers.m, dim);
        TargetMatrix t = use_cached ? cache->ce
                                    : softmax_responsibilities(unl_feats, proto,
                                                               config.target_temperature);
        if (cache && !use_cached) cache->ce = t;
        SetLossGrad ce = neg_center_loss(unl_feats, proto, t, config.pred_temperature);
        out.terms.l_ce = ce.value;
        check_finite(out.terms.l_ce, "l_ce");
        scatter_rows(ce.d_feats, unl, config.tau_mix, out.d_features, dim);
        for (size_t i = 0; i < centers.prototypes.size(); ++i)
            out.d_centers.prototypes[i] += config.tau_mix * ce.d_centers.a[i];
    } else if (config.tau_mix != 0.0 && unl.empty()) {
        out.terms.l_ce = 0.0;
    }

    if (aug && config.simclr_weight != 0.0) {
        out.terms.l_simclr =
            config.simclr_weight *
            simclr_term(features, *aug, config.temperature, config.simclr_sample_cap,
                        config.simclr_seed, out.d_features, out.d_features_aug,
                        config.simclr_weight);
        check_finite(out.terms.l_simclr, "l_simclr");
    }

    out.terms.l_lort =
        occ_weight * out.terms.l_occ + config.tau_mix * out.terms.l_ce + out.terms.l_simclr;
    out.terms.total = out.terms.l_lort;
    if (!with_extensions) return out;

    // Negative-center assignment: softmax targets for synthetic pixels,
    // Sinkhorn targets for unlabeled pixels.
    if (config.lambda_neg != 0.0) {
        std::vector<int> syn = label_pixels(labels, Label::NegSynthetic);
        Mat neg = centers_as_mat(centers.c_neg, centers.k, dim);
        double l_syn = 0.0, l_unl = 0.0;
        if (config.lambda_n != 0.0 && !syn.empty()) {
            Mat syn_feats = gather_rows(features, syn);
            TargetMatrix t = use_cached
                                 ? cache->syn
                                 : softmax_responsibilities(syn_feats, neg,
                                                            config.target_temperature);
            if (cache && !use_cached) cache->syn = t;
            SetLossGrad g = neg_center_loss(syn_feats, neg, t, config.pred_temperature);
            l_syn = g.value;
            check_finite(l_syn, "l_neg_syn");
            double w = config.lambda_neg * config.lambda_n;
            scatter_rows(g.d_feats, syn, w, out.d_features, dim);
            for (size_t i = 0; i < centers.c_neg.size(); ++i)
                out.d_centers.c_neg[i] += w * g.d_centers.a[i];
        }
        if (config.lambda_u != 0.0 && static_cast<int>(unl.size()) >= centers.k) {
            Mat unl_feats = gather_rows(features, unl);
            TargetMatrix t = use_cached ? cache->unl
                                        : sinkhorn_targets(unl_feats, neg, config.sinkhorn_epsilon,
                                                           config.sinkhorn_iters,
                                                           config.sinkhorn_tol, &out.sinkhorn);
            if (cache && !use_cached) cache->unl = t;
            SetLossGrad g = neg_center_loss(unl_feats, neg, t, config.pred_temperature);
            l_unl = g.value;
            check_finite(l_unl, "l_neg_unl");
            double w = config.lambda_neg * config.lambda_u;
            scatter_rows(g.d_feats, unl, w, out.d_features, dim);
            for (size_t i = 0; i < centers.c_neg.size(); ++i)
                out.d_centers.c_neg[i] += w * g.d_centers.a[i];
        }
        out.terms.l_neg_syn = l_syn;
        out.terms.l_neg_unl = l_unl;
        out.terms.l_neg = combined_neg_loss(l_syn, l_unl, config.lambda_n, config.lambda_u);
        out.terms.total += config.lambda_neg * out.terms.l_neg;
    }

    if (config.lambda_rep != 0.0) {
        Mat neg = centers_as_mat(centers.c_neg, centers.k, dim);
        RepulsionGrad rep = repulsion_loss(neg, centers.c_pos, config.gamma);
        out.terms.l_rep = rep.value;
        check_finite(out.terms.l_rep, "l_rep");
        for (size_t i = 0; i < centers.c_neg.size(); ++i)
            out.d_centers.c_neg[i] += config.lambda_rep * rep.d_neg.a[i];
        for (size_t i = 0; i < centers.c_pos.size(); ++i)
            out.d_centers.c_pos[i] += config.lambda_rep * rep.d_pos[i];
        out.terms.total += config.lambda_rep * out.terms.l_rep;
    }
    check_finite(out.terms.total, "total");
    return out;
}

}  // namespace

PuLossResult lort_base_loss(const FeatureMap& features, const LabelMask& labels,
                            const CenterBank& centers, const PuLossConfig& config,
                            const FeatureMap* aug, PuTargetCache* cache) {
    PuLossResult out = pu_loss_impl(features, labels, centers, config, aug, false, cache);
    if (cache) cache->valid = true;
    return out;
}

PuLossResult total_pu_loss(const FeatureMap& features, const LabelMask& labels,
                           const CenterBank& centers, const PuLossConfig& config,
                           const FeatureMap* aug, PuTargetCache* cache) {
    PuLossResult out = pu_loss_impl(features, labels, centers, config, aug, true, cache);
    if (cache) cache->valid = true;
    return out;
}

std::string pu_terms_to_json(const PuTerms& t) {
    nlohmann::json j;
    j["total"] = t.total;
    j["l_lort"] = t.l_lort;
    j["l_occ"] = t.l_occ;
    j["l_ce"] = t.l_ce;
    j["l_simclr"] = t.l_simclr;
    j["l_neg_syn"] = t.l_neg_syn;
    j["l_neg_unl"] = t.l_neg_unl;
    j["l_rep"] = t.l_rep;
    return j.dump();
}

}  // namespace synet
