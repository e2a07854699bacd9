#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "synet/embedding.hpp"
#include "synet/losses_pn.hpp"
#include "synet/losses_pu.hpp"
#include "synet/negatives.hpp"
#include "synet/optimizer.hpp"
#include "synet/scene.hpp"

namespace synet {

enum class Branch { PU, PN };

const char* branch_name(Branch b);

struct AugmentationConfig {
    double flip_prob = 0.5;
    double crop_prob = 0.3;
    double crop_fraction = 0.8;   // kept side length, relative
    double jitter_prob = 0.8;
    double jitter_strength = 0.05;
};

struct TrainConfig {
    Branch branch = Branch::PU;
    int epochs = 30;       // PN toy default is 10; the CLI applies it
    int batch_size = 4;    // PN toy default is 1
    double learning_rate = 1e-3;
    double injection_ratio = 0.2;
    AugmentationConfig aug;
    PuLossConfig pu;
    PnLossConfig pn;
    SampleCaps caps;
    ExpandConfig expand;
    InjectConfig inject;
    EmbeddingConfig embed;
    int k_centers = 4;
    int m_prototypes = 8;
    AdamConfig adam;
    uint64_t seed = 0;
};

struct LossLogRow {
    int epoch = 0;
    int step = 0;
    std::vector<double> values;
};

struct TrainResult {
    EmbeddingParams params;
    CenterBank centers;
    std::vector<std::string> log_header;  // column names after epoch,step
    std::vector<LossLogRow> log;
    std::vector<CompositionRecord> injections;
    int degenerate_skips = 0;  // PN scenes whose sample sets could not be built
};

// Seeded end-to-end loop: inject negatives, init parameters, iterate
// forward/loss/backward with Adam, checkpoint params and centers.
TrainResult train(const std::vector<SceneRecord>& dataset, const TrainConfig& config);

// Parameter segments in checkpoint order: w1, b1, w2, b2, c_pos, c_neg,
// prototypes. The same ordering defines optimizer-state and gradient layout.
std::vector<std::vector<double>*> parameter_segments(EmbeddingParams& params, CenterBank& centers);

struct Checkpoint {
    EmbeddingParams params;
    CenterBank centers;
    std::string config_json;  // resolved config echo
};

// "SYNP" core followed by a center-bank section and the config echo.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string loss_log_to_csv(const std::vector<std::string>& header,
                            const std::vector<LossLogRow>& rows);

}  // namespace synet
