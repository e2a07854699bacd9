#include "synet/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "synet/binio.hpp"
#include "synet/errors.hpp"
#include "synet/evalmetrics.hpp"
#include "synet/negatives.hpp"
#include "synet/scene_gen.hpp"
#include "synet/svg_plot.hpp"
#include "synet/trainer.hpp"

namespace synet {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitMissingInput = 3;

struct GenOptions {
    int scenes = 20;
    uint64_t seed = 0;
    std::string out;
    int height = 64;
    int width = 64;
    int channels = 4;
    double obstacle_density = 0.05;
    double sky_fraction = 0.35;
    std::string mode = "pu";
    double neg_distance = 12.0;
    int halfwidth = 2;
    double inject_ratio = 0.0;
    double low_quality_fraction = 0.0;
};

struct TrainOptions {
    std::string branch = "pu";
    std::string data;
    std::string out;
    double ratio = 0.2;
    int epochs = -1;      // -1: branch default (PU 30, PN 10)
    int batch_size = -1;  // -1: branch default (PU 4, PN 1)
    double lr = 1e-3;
    uint64_t seed = 0;
    int dim = 16;
    int radius = 2;
    int k_centers = 4;
    int m_prototypes = 8;
    double tau_mix = 0.5;
    double temperature = 0.55;
    double pred_temperature = 1.0;
    double target_temperature = 0.05;
    double simclr_weight = 0.25;
    double lambda_n_mix = 0.5;
    double lambda_u_mix = 0.5;
    double lambda_neg = 0.5;
    double lambda_rep = 0.5;
    double gamma = 0.1;
    double sinkhorn_epsilon = 0.05;
    int sinkhorn_iters = 100;
    int simclr_cap = 128;
    double omega_e = 0.5;
    double lambda_syn = 1.2;
    int sample_cap = 256;
    double expand_radius = 4.0;
    double far_distance = 16.0;
    double flip_prob = 0.5;
    double crop_prob = 0.3;
    double crop_fraction = 0.8;
    double jitter_prob = 0.8;
    double jitter_strength = 0.05;
    double low_quality_fraction = 0.0;
    int min_objects = 1;
    int max_objects = 3;
};

uint64_t env_seed_default() {
    if (const char* env = std::getenv("SYNET_SEED")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(env, &end, 10);
        if (end && *end == '\0') return static_cast<uint64_t>(v);
    }
    return 0;
}

json gen_config_json(const GenOptions& o) {
    return json{{"scenes", o.scenes},
                {"seed", o.seed},
                {"height", o.height},
                {"width", o.width},
                {"channels", o.channels},
                {"obstacle_density", o.obstacle_density},
                {"sky_fraction", o.sky_fraction},
                {"mode", o.mode},
                {"neg_distance", o.neg_distance},
                {"halfwidth", o.halfwidth},
                {"inject_ratio", o.inject_ratio},
                {"low_quality_fraction", o.low_quality_fraction}};
}

TrainConfig build_train_config(const TrainOptions& o, int scene_channels) {
    TrainConfig cfg;
    cfg.branch = o.branch == "pn" ? Branch::PN : Branch::PU;
    cfg.epochs = o.epochs > 0 ? o.epochs : (cfg.branch == Branch::PU ? 30 : 10);
    cfg.batch_size = o.batch_size > 0 ? o.batch_size : (cfg.branch == Branch::PU ? 4 : 1);
    cfg.learning_rate = o.lr;
    cfg.injection_ratio = o.ratio;
    cfg.seed = o.seed;
    cfg.embed.channels = scene_channels;
    cfg.embed.radius = o.radius;
    cfg.embed.dim = o.dim;
    cfg.k_centers = o.k_centers;
    cfg.m_prototypes = o.m_prototypes;
    cfg.pu.tau_mix = o.tau_mix;
    cfg.pu.temperature = o.temperature;
    cfg.pu.pred_temperature = o.pred_temperature;
    cfg.pu.target_temperature = o.target_temperature;
    cfg.pu.simclr_weight = o.simclr_weight;
    cfg.pu.lambda_n = o.lambda_n_mix;
    cfg.pu.lambda_u = o.lambda_u_mix;
    cfg.pu.lambda_neg = o.lambda_neg;
    cfg.pu.lambda_rep = o.lambda_rep;
    cfg.pu.gamma = o.gamma;
    cfg.pu.sinkhorn_epsilon = o.sinkhorn_epsilon;
    cfg.pu.sinkhorn_iters = o.sinkhorn_iters;
    cfg.pu.simclr_sample_cap = o.simclr_cap;
    cfg.pn.omega_e = o.omega_e;
    cfg.pn.temperature = o.temperature;
    cfg.pn.lambda_n = o.lambda_syn;
    cfg.caps.p = o.sample_cap;
    cfg.caps.n = o.sample_cap;
    cfg.caps.syn = o.sample_cap;
    cfg.expand.expand_radius = o.expand_radius;
    cfg.expand.far_distance = o.far_distance;
    cfg.inject.filters.low_quality_fraction = o.low_quality_fraction;
    cfg.inject.min_objects = o.min_objects;
    cfg.inject.max_objects = o.max_objects;
    cfg.aug.flip_prob = o.flip_prob;
    cfg.aug.crop_prob = o.crop_prob;
    cfg.aug.crop_fraction = o.crop_fraction;
    cfg.aug.jitter_prob = o.jitter_prob;
    cfg.aug.jitter_strength = o.jitter_strength;
    return cfg;
}

json train_config_json(const TrainConfig& c) {
    return json{{"branch", branch_name(c.branch)},
                {"epochs", c.epochs},
                {"batch_size", c.batch_size},
                {"learning_rate", c.learning_rate},
                {"injection_ratio", c.injection_ratio},
                {"seed", c.seed},
                {"embed", {{"channels", c.embed.channels}, {"radius", c.embed.radius}, {"dim", c.embed.dim}}},
                {"k_centers", c.k_centers},
                {"m_prototypes", c.m_prototypes},
                {"pu",
                 {{"tau_mix", c.pu.tau_mix},
                  {"temperature", c.pu.temperature},
                  {"pred_temperature", c.pu.pred_temperature},
                  {"target_temperature", c.pu.target_temperature},
                  {"simclr_weight", c.pu.simclr_weight},
                  {"lambda_n", c.pu.lambda_n},
                  {"lambda_u", c.pu.lambda_u},
                  {"lambda_neg", c.pu.lambda_neg},
                  {"lambda_rep", c.pu.lambda_rep},
                  {"gamma", c.pu.gamma},
                  {"sinkhorn_epsilon", c.pu.sinkhorn_epsilon},
                  {"sinkhorn_iters", c.pu.sinkhorn_iters},
                  {"simclr_sample_cap", c.pu.simclr_sample_cap}}},
                {"pn",
                 {{"omega_e", c.pn.omega_e},
                  {"temperature", c.pn.temperature},
                  {"lambda_n", c.pn.lambda_n}}},
                {"sample_cap", c.caps.p},
                {"expand", {{"radius", c.expand.expand_radius}, {"far", c.expand.far_distance}}},
                {"inject",
                 {{"low_quality_fraction", c.inject.filters.low_quality_fraction},
                  {"min_objects", c.inject.min_objects},
                  {"max_objects", c.inject.max_objects}}},
                {"aug",
                 {{"flip_prob", c.aug.flip_prob},
                  {"crop_prob", c.aug.crop_prob},
                  {"crop_fraction", c.aug.crop_fraction},
                  {"jitter_prob", c.aug.jitter_prob},
                  {"jitter_strength", c.aug.jitter_strength}}}};
}

// Manifest written before the heavy work starts; hashes filled in afterward.
struct ManifestWriter {
    fs::path path;
    json body;

    void begin(const std::string& command, const json& config, uint64_t seed,
               const std::vector<std::string>& inputs) {
        body = json{{"command", command},
                    {"config", config},
                    {"seed", seed},
                    {"inputs", inputs},
                    {"outputs", json::array()},
                    {"hashes", json::object()}};
        atomic_write_file(path, body.dump(2) + "\n");
    }

    void finish(const std::vector<fs::path>& outputs) {
        json outs = json::array();
        json hashes = json::object();
        for (const auto& p : outputs) {
            outs.push_back(p.filename().string());
            hashes[p.filename().string()] = hash_file(p);
        }
        body["outputs"] = outs;
        body["hashes"] = hashes;
        atomic_write_file(path, body.dump(2) + "\n");
    }
};

std::vector<SceneRecord> generate_dataset(const GenOptions& o) {
    SceneConfig scfg;
    scfg.height = o.height;
    scfg.width = o.width;
    scfg.channels = o.channels;
    scfg.obstacle_density = o.obstacle_density;
    scfg.sky_fraction = o.sky_fraction;
    LabelConfig lcfg;
    lcfg.mode = o.mode == "pn" ? LabelMode::PN : LabelMode::PU;
    lcfg.neg_distance = o.neg_distance;

    std::vector<SceneRecord> records;
    records.reserve(static_cast<size_t>(o.scenes));
    for (int i = 0; i < o.scenes; ++i) {
        uint64_t scene_seed = derive_seed(o.seed, 1000 + static_cast<uint64_t>(i));
        // Rare blocked layouts retry under derived seeds so generation stays
        // a pure function of (config, seed).
        for (int attempt = 0;; ++attempt) {
            try {
                Scene scene = generate_scene(scfg, scene_seed);
                TrajectoryTrace traj =
                    simulate_trajectory(scene, derive_seed(scene_seed, 7), o.halfwidth);
                LabelMask labels = make_labels(scene, traj, lcfg);
                char name[32];
                std::snprintf(name, sizeof(name), "scene_%05d", i);
                records.push_back({name, std::move(scene), std::move(labels)});
                break;
            } catch (const NoTraversableCorridor&) {
                if (attempt >= 16) throw;
                scene_seed = derive_seed(scene_seed, 99);
            }
        }
    }
    if (o.inject_ratio > 0.0) {
        Rng rng(derive_seed(o.seed, 0x1a5ecd));
        InjectConfig icfg;
        icfg.filters.low_quality_fraction = o.low_quality_fraction;
        inject_dataset(records, o.inject_ratio, rng, icfg);
    }
    return records;
}

int cmd_gen_data(const GenOptions& o) {
    fs::create_directories(o.out);
    ManifestWriter manifest{fs::path(o.out) / "manifest.json", {}};
    manifest.begin("gen-data", gen_config_json(o), o.seed, {});

    GenOptions gen = o;
    gen.inject_ratio = 0.0;  // injection handled below so masks are recorded
    std::vector<SceneRecord> records = generate_dataset(gen);
    std::vector<CompositionRecord> comps;
    if (o.inject_ratio > 0.0) {
        Rng rng(derive_seed(o.seed, 0x1a5ecd));
        InjectConfig icfg;
        icfg.filters.low_quality_fraction = o.low_quality_fraction;
        comps = inject_dataset(records, o.inject_ratio, rng, icfg);
    }

    std::vector<fs::path> outputs;
    for (const auto& rec : records) {
        fs::path p = fs::path(o.out) / (rec.id + ".synt");
        write_scene_container(p, rec.scene, rec.labels);
        outputs.push_back(p);
    }
    fs::path mpath = fs::path(o.out) / "negatives.jsonl";
    write_manifest(mpath, comps);
    outputs.push_back(mpath);
    manifest.finish(outputs);
    return 0;
}

int cmd_train(const TrainOptions& o) {
    if (!fs::is_directory(o.data)) {
        std::cerr << "missing input directory: " << o.data << "\n";
        return kExitMissingInput;
    }
    std::vector<SceneRecord> data = load_scene_dir(o.data);
    if (data.empty()) {
        std::cerr << "no scene containers in " << o.data << "\n";
        return kExitMissingInput;
    }
    fs::create_directories(o.out);
    TrainConfig cfg = build_train_config(o, data.front().scene.channels);
    json cfg_json = train_config_json(cfg);

    ManifestWriter manifest{fs::path(o.out) / "manifest.json", {}};
    manifest.begin("train", cfg_json, cfg.seed, {o.data});

    TrainResult result = train(data, cfg);

    fs::path ckpt = fs::path(o.out) / "checkpoint.synp";
    save_checkpoint(ckpt, {result.params, result.centers, cfg_json.dump()});
    fs::path log_path = fs::path(o.out) / "loss_log.csv";
    atomic_write_file(log_path, loss_log_to_csv(result.log_header, result.log));
    fs::path inj = fs::path(o.out) / "injections.jsonl";
    write_manifest(inj, result.injections);
    manifest.finish({ckpt, log_path, inj});
    return 0;
}

struct EvalArtifacts {
    MetricsReport report;
    std::vector<ScoreMap> score_maps;
    std::vector<Grid<uint8_t>> neg_masks;  // aligned with score_maps
    std::vector<double> pooled_scores;
    std::vector<uint8_t> pooled_gt;
};

EvalArtifacts evaluate_dataset(const Checkpoint& ckpt, const std::vector<SceneRecord>& data) {
    EvalArtifacts art;
    for (const auto& rec : data) {
        FeatureMap f = forward(rec.scene, ckpt.params);
        ScoreMap sm = similarity_map(f, ckpt.centers.c_pos);
        sm.scene_id = rec.id;
        std::vector<uint8_t> gt = traversable_ground_truth(rec.scene, rec.labels);
        for (size_t i = 0; i < gt.size(); ++i) {
            art.pooled_scores.push_back(sm.scores[i]);
            art.pooled_gt.push_back(gt[i]);
        }
        Grid<uint8_t> mask(rec.scene.height, rec.scene.width, 0);
        for (size_t i = 0; i < mask.size(); ++i)
            mask[i] = rec.labels.labels[i] == static_cast<uint8_t>(Label::NegSynthetic) ? 1 : 0;
        art.neg_masks.push_back(std::move(mask));
        art.score_maps.push_back(std::move(sm));
    }
    art.report = pixel_metrics(art.pooled_scores, art.pooled_gt);
    return art;
}

int cmd_eval(const std::string& ckpt_path, const std::string& data_dir,
             const std::string& report_path, const std::string& dump_scores) {
    if (!fs::exists(ckpt_path)) {
        std::cerr << "missing checkpoint: " << ckpt_path << "\n";
        return kExitMissingInput;
    }
    if (!fs::is_directory(data_dir)) {
        std::cerr << "missing data directory: " << data_dir << "\n";
        return kExitMissingInput;
    }
    Checkpoint ckpt = load_checkpoint(ckpt_path);
    std::vector<SceneRecord> data = load_scene_dir(data_dir);
    if (data.empty()) {
        std::cerr << "no scene containers in " << data_dir << "\n";
        return kExitMissingInput;
    }

    ManifestWriter manifest{fs::path(report_path).string() + ".manifest.json", {}};
    manifest.begin("eval", json{{"ckpt", ckpt_path}, {"data", data_dir}}, 0,
                   {ckpt_path, data_dir});

    EvalArtifacts art = evaluate_dataset(ckpt, data);
    atomic_write_file(report_path, metrics_to_csv(art.report));
    std::vector<fs::path> outputs = {report_path};

    if (!dump_scores.empty()) {
        std::string csv = "scene_id,row,col,score,gt\n";
        char buf[128];
        size_t k = 0;
        for (size_t s = 0; s < art.score_maps.size(); ++s) {
            const auto& sm = art.score_maps[s];
            for (int r = 0; r < sm.scores.height(); ++r)
                for (int c = 0; c < sm.scores.width(); ++c, ++k) {
                    std::snprintf(buf, sizeof(buf), "%s,%d,%d,%.12g,%d\n", sm.scene_id.c_str(), r,
                                  c, sm.scores.at(r, c), art.pooled_gt[k] ? 1 : 0);
                    csv += buf;
                }
        }
        atomic_write_file(dump_scores, csv);
        outputs.push_back(dump_scores);
    }
    manifest.finish(outputs);
    return 0;
}

int cmd_sweep_fpr(const std::string& ckpt_path, const std::string& data_dir,
                  const std::string& out_path) {
    if (!fs::exists(ckpt_path)) {
        std::cerr << "missing checkpoint: " << ckpt_path << "\n";
        return kExitMissingInput;
    }
    if (!fs::is_directory(data_dir)) {
        std::cerr << "missing data directory: " << data_dir << "\n";
        return kExitMissingInput;
    }
    Checkpoint ckpt = load_checkpoint(ckpt_path);
    std::vector<SceneRecord> data = load_scene_dir(data_dir);

    ManifestWriter manifest{out_path + ".manifest.json", {}};
    manifest.begin("sweep-fpr", json{{"ckpt", ckpt_path}, {"data", data_dir}}, 0,
                   {ckpt_path, data_dir});

    EvalArtifacts art = evaluate_dataset(ckpt, data);
    std::vector<const ScoreMap*> maps;
    std::vector<const Grid<uint8_t>*> masks;
    for (size_t i = 0; i < art.score_maps.size(); ++i) {
        maps.push_back(&art.score_maps[i]);
        masks.push_back(&art.neg_masks[i]);
    }
    FprCurve curve = object_centric_fpr(maps, masks, threshold_grid());
    atomic_write_file(out_path, fpr_curve_to_csv(curve));
    manifest.finish({out_path});
    return 0;
}

struct AblationRun {
    double overlap = 0.0;
    MetricsReport report;
};

AblationRun run_once(const TrainOptions& topt, const GenOptions& gopt, double ratio,
                     double low_quality_fraction) {
    GenOptions train_gen = gopt;
    train_gen.inject_ratio = 0.0;
    std::vector<SceneRecord> train_data = generate_dataset(train_gen);

    TrainOptions t = topt;
    t.ratio = ratio;
    t.low_quality_fraction = low_quality_fraction;
    TrainConfig cfg = build_train_config(t, gopt.channels);
    TrainResult trained = train(train_data, cfg);

    GenOptions eval_gen = gopt;
    eval_gen.seed = derive_seed(gopt.seed, 0xe7a1);
    eval_gen.scenes = std::max(8, gopt.scenes / 4);
    eval_gen.inject_ratio = 1.0;
    eval_gen.low_quality_fraction = 0.0;
    std::vector<SceneRecord> eval_data = generate_dataset(eval_gen);

    Checkpoint ckpt{trained.params, trained.centers, ""};
    EvalArtifacts art = evaluate_dataset(ckpt, eval_data);
    auto [dpos, dneg] = similarity_histograms(art.pooled_scores, art.pooled_gt);

    AblationRun run;
    run.overlap = overlap_coefficient(dpos, dneg);
    run.report = art.report;
    return run;
}

int cmd_ablate_ratio(const TrainOptions& topt, const GenOptions& gopt,
                     const std::vector<double>& ratios, const std::string& out_dir) {
    fs::create_directories(out_dir);
    ManifestWriter manifest{fs::path(out_dir) / "manifest.json", {}};
    json cfg = train_config_json(build_train_config(topt, gopt.channels));
    cfg["ratios"] = ratios;
    cfg["gen"] = gen_config_json(gopt);
    manifest.begin("ablate-ratio", cfg, topt.seed, {});

    std::string csv = "ratio,overlap,auroc,maxf\n";
    char buf[128];
    for (double r : ratios) {
        AblationRun run = run_once(topt, gopt, r, topt.low_quality_fraction);
        std::snprintf(buf, sizeof(buf), "%.3f,%.9f,%.9f,%.9f\n", r, run.overlap, run.report.auroc,
                      run.report.maxf);
        csv += buf;
        std::fprintf(stderr, "ratio %.2f: overlap=%.4f auroc=%.4f\n", r, run.overlap,
                     run.report.auroc);
    }
    fs::path table = fs::path(out_dir) / "ratio_ablation.csv";
    atomic_write_file(table, csv);
    manifest.finish({table});
    return 0;
}

int cmd_ablate_quality(const TrainOptions& topt, const GenOptions& gopt,
                       const std::string& out_dir) {
    fs::create_directories(out_dir);
    ManifestWriter manifest{fs::path(out_dir) / "manifest.json", {}};
    json cfg = train_config_json(build_train_config(topt, gopt.channels));
    cfg["gen"] = gen_config_json(gopt);
    manifest.begin("ablate-quality", cfg, topt.seed, {});

    // Table III design: all-high vs mostly-low synthetic negatives.
    const std::pair<const char*, double> settings[] = {{"high_only", 0.0},
                                                       {"low80_high20", 0.8}};
    std::string csv = "setting,low_fraction,auroc,maxf,ap\n";
    char buf[160];
    for (auto [name, frac] : settings) {
        AblationRun run = run_once(topt, gopt, topt.ratio, frac);
        std::snprintf(buf, sizeof(buf), "%s,%.2f,%.9f,%.9f,%.9f\n", name, frac, run.report.auroc,
                      run.report.maxf, run.report.ap);
        csv += buf;
        std::fprintf(stderr, "quality %s: auroc=%.4f\n", name, run.report.auroc);
    }
    fs::path table = fs::path(out_dir) / "quality_ablation.csv";
    atomic_write_file(table, csv);
    manifest.finish({table});
    return 0;
}

int cmd_plot(const std::string& kind, const std::string& in_path, const std::string& out_path) {
    if (!fs::exists(in_path)) {
        std::cerr << "missing input CSV: " << in_path << "\n";
        return kExitMissingInput;
    }
    std::string svg = render_plot(plot_kind_from_string(kind), read_file_text(in_path));
    atomic_write_file(out_path, svg);
    return 0;
}

// Applies config-file values before CLI11 overrides the flags that were
// actually passed; precedence is flags > config file > defaults.
template <typename T>
void from_config(const json& cfg, const char* key, T& value) {
    if (cfg.contains(key)) value = cfg[key].get<T>();
}

void apply_gen_config(const json& cfg, GenOptions& o) {
    from_config(cfg, "scenes", o.scenes);
    from_config(cfg, "seed", o.seed);
    from_config(cfg, "height", o.height);
    from_config(cfg, "width", o.width);
    from_config(cfg, "channels", o.channels);
    from_config(cfg, "obstacle_density", o.obstacle_density);
    from_config(cfg, "sky_fraction", o.sky_fraction);
    from_config(cfg, "mode", o.mode);
    from_config(cfg, "neg_distance", o.neg_distance);
    from_config(cfg, "halfwidth", o.halfwidth);
    from_config(cfg, "inject_ratio", o.inject_ratio);
    from_config(cfg, "low_quality_fraction", o.low_quality_fraction);
}

void apply_train_config(const json& cfg, TrainOptions& o) {
    from_config(cfg, "branch", o.branch);
    from_config(cfg, "ratio", o.ratio);
    from_config(cfg, "epochs", o.epochs);
    from_config(cfg, "batch_size", o.batch_size);
    from_config(cfg, "learning_rate", o.lr);
    from_config(cfg, "seed", o.seed);
    from_config(cfg, "dim", o.dim);
    from_config(cfg, "radius", o.radius);
    from_config(cfg, "k_centers", o.k_centers);
    from_config(cfg, "m_prototypes", o.m_prototypes);
    from_config(cfg, "tau_mix", o.tau_mix);
    from_config(cfg, "temperature", o.temperature);
    from_config(cfg, "pred_temperature", o.pred_temperature);
    from_config(cfg, "target_temperature", o.target_temperature);
    from_config(cfg, "simclr_weight", o.simclr_weight);
    from_config(cfg, "lambda_n_mix", o.lambda_n_mix);
    from_config(cfg, "lambda_u_mix", o.lambda_u_mix);
    from_config(cfg, "lambda_neg", o.lambda_neg);
    from_config(cfg, "lambda_rep", o.lambda_rep);
    from_config(cfg, "gamma", o.gamma);
    from_config(cfg, "omega_e", o.omega_e);
    from_config(cfg, "lambda_syn", o.lambda_syn);
    from_config(cfg, "sample_cap", o.sample_cap);
    from_config(cfg, "low_quality_fraction", o.low_quality_fraction);
}

std::optional<json> load_config_file(const std::vector<std::string>& args) {
    for (size_t i = 0; i + 1 < args.size(); ++i)
        if (args[i] == "--config") {
            if (!fs::exists(args[i + 1])) throw IoError("missing config file: " + args[i + 1]);
            return json::parse(read_file_text(args[i + 1]));
        }
    return std::nullopt;
}

void add_train_flags(CLI::App* cmd, TrainOptions& t) {
    cmd->add_option("--branch", t.branch)->check(CLI::IsMember({"pu", "pn"}));
    cmd->add_option("--ratio", t.ratio);
    cmd->add_option("--epochs", t.epochs);
    cmd->add_option("--batch", t.batch_size);
    cmd->add_option("--lr", t.lr);
    cmd->add_option("--seed", t.seed);
    cmd->add_option("--dim", t.dim);
    cmd->add_option("--radius", t.radius);
    cmd->add_option("--k-centers", t.k_centers);
    cmd->add_option("--prototypes", t.m_prototypes);
    cmd->add_option("--tau-mix", t.tau_mix);
    cmd->add_option("--temperature", t.temperature);
    cmd->add_option("--pred-temperature", t.pred_temperature);
    cmd->add_option("--target-temperature", t.target_temperature);
    cmd->add_option("--simclr-weight", t.simclr_weight);
    cmd->add_option("--lambda-n-mix", t.lambda_n_mix);
    cmd->add_option("--lambda-u-mix", t.lambda_u_mix);
    cmd->add_option("--lambda-neg", t.lambda_neg);
    cmd->add_option("--lambda-rep", t.lambda_rep);
    cmd->add_option("--gamma", t.gamma);
    cmd->add_option("--sinkhorn-epsilon", t.sinkhorn_epsilon);
    cmd->add_option("--sinkhorn-iters", t.sinkhorn_iters);
    cmd->add_option("--simclr-cap", t.simclr_cap);
    cmd->add_option("--omega-e", t.omega_e);
    cmd->add_option("--lambda-syn", t.lambda_syn);
    cmd->add_option("--sample-cap", t.sample_cap);
    cmd->add_option("--expand-radius", t.expand_radius);
    cmd->add_option("--far-distance", t.far_distance);
    cmd->add_option("--flip-prob", t.flip_prob);
    cmd->add_option("--crop-prob", t.crop_prob);
    cmd->add_option("--crop-fraction", t.crop_fraction);
    cmd->add_option("--jitter-prob", t.jitter_prob);
    cmd->add_option("--jitter-strength", t.jitter_strength);
    cmd->add_option("--low-quality-frac", t.low_quality_fraction);
    cmd->add_option("--min-objects", t.min_objects);
    cmd->add_option("--max-objects", t.max_objects);
}

void add_gen_flags(CLI::App* cmd, GenOptions& g, bool standalone = true) {
    cmd->add_option("--scenes", g.scenes);
    if (standalone) {
        cmd->add_option("--out", g.out)->required();
        cmd->add_option("--seed", g.seed);
    }
    cmd->add_option("--height", g.height);
    cmd->add_option("--width", g.width);
    cmd->add_option("--channels", g.channels);
    cmd->add_option("--obstacle-density", g.obstacle_density);
    cmd->add_option("--sky-fraction", g.sky_fraction);
    cmd->add_option("--mode", g.mode)->check(CLI::IsMember({"pu", "pn"}));
    cmd->add_option("--neg-distance", g.neg_distance);
    cmd->add_option("--halfwidth", g.halfwidth);
    cmd->add_option("--inject-ratio", g.inject_ratio);
    if (standalone) cmd->add_option("--low-quality-frac", g.low_quality_fraction);
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"synthetic-negative traversability lab"};
    app.require_subcommand(1);

    uint64_t default_seed = env_seed_default();

    GenOptions gen;
    gen.seed = default_seed;
    TrainOptions tr;
    tr.seed = default_seed;
    std::string config_path;

    auto* c_gen = app.add_subcommand("gen-data", "generate a scene dataset");
    add_gen_flags(c_gen, gen);
    c_gen->add_option("--config", config_path);

    auto* c_train = app.add_subcommand("train", "train a branch on a dataset");
    std::string train_data, train_out;
    c_train->add_option("--data", train_data)->required();
    c_train->add_option("--out", train_out)->required();
    c_train->add_option("--config", config_path);
    add_train_flags(c_train, tr);

    auto* c_eval = app.add_subcommand("eval", "score a checkpoint on a dataset");
    std::string eval_ckpt, eval_data, eval_report, eval_dump;
    c_eval->add_option("--ckpt", eval_ckpt)->required();
    c_eval->add_option("--data", eval_data)->required();
    c_eval->add_option("--report", eval_report)->required();
    c_eval->add_option("--dump-scores", eval_dump);

    auto* c_sweep = app.add_subcommand("sweep-fpr", "object-centric FPR threshold sweep");
    std::string sweep_ckpt, sweep_data, sweep_out;
    c_sweep->add_option("--ckpt", sweep_ckpt)->required();
    c_sweep->add_option("--data", sweep_data)->required();
    c_sweep->add_option("--out", sweep_out)->required();

    auto* c_ratio = app.add_subcommand("ablate-ratio", "injection-ratio ablation");
    GenOptions gen_ratio;
    gen_ratio.seed = default_seed;
    TrainOptions tr_ratio;
    tr_ratio.seed = default_seed;
    tr_ratio.branch = "pn";
    std::string ratio_out;
    std::vector<double> ratios = {0.0, 0.1, 0.2, 0.5};
    c_ratio->add_option("--out", ratio_out)->required();
    c_ratio->add_option("--ratios", ratios);
    add_gen_flags(c_ratio, gen_ratio, false);
    add_train_flags(c_ratio, tr_ratio);

    auto* c_quality = app.add_subcommand("ablate-quality", "synthetic-quality ablation");
    GenOptions gen_quality;
    gen_quality.seed = default_seed;
    TrainOptions tr_quality;
    tr_quality.seed = default_seed;
    tr_quality.branch = "pn";
    std::string quality_out;
    c_quality->add_option("--out", quality_out)->required();
    add_gen_flags(c_quality, gen_quality, false);
    add_train_flags(c_quality, tr_quality);

    auto* c_plot = app.add_subcommand("plot", "render a CSV artifact to SVG");
    std::string plot_kind, plot_in, plot_out;
    c_plot->add_option("--kind", plot_kind)
        ->required()
        ->check(CLI::IsMember({"fpr-curve", "histogram", "loss-log"}));
    c_plot->add_option("--in", plot_in)->required();
    c_plot->add_option("--out", plot_out)->required();

    try {
        std::optional<json> cfg = load_config_file(args);
        if (cfg) {
            apply_gen_config(*cfg, gen);
            apply_train_config(*cfg, tr);
        }
        std::vector<const char*> argv;
        argv.push_back("synet");
        for (const auto& a : args) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());

        // --seed on the shared flag set wins over the env fallback; both
        // ablations keep their own copies parsed above.
        if (c_gen->parsed()) return cmd_gen_data(gen);
        if (c_train->parsed()) {
            tr.data = train_data;
            tr.out = train_out;
            return cmd_train(tr);
        }
        if (c_eval->parsed()) return cmd_eval(eval_ckpt, eval_data, eval_report, eval_dump);
        if (c_sweep->parsed()) return cmd_sweep_fpr(sweep_ckpt, sweep_data, sweep_out);
        if (c_ratio->parsed()) {
            std::sort(ratios.begin(), ratios.end());
            gen_ratio.seed = tr_ratio.seed;
            return cmd_ablate_ratio(tr_ratio, gen_ratio, ratios, ratio_out);
        }
        if (c_quality->parsed()) {
            gen_quality.seed = tr_quality.seed;
            return cmd_ablate_quality(tr_quality, gen_quality, quality_out);
        }
        if (c_plot->parsed()) return cmd_plot(plot_kind, plot_in, plot_out);
        return kExitUsage;
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const SchemaError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const IoError& e) {
        std::string what = e.what();
        std::cerr << what << "\n";
        return what.find("missing") != std::string::npos || what.find("cannot open") != std::string::npos
                   ? kExitMissingInput
                   : kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

}  // namespace synet
