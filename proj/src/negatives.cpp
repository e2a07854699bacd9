#include "synet/negatives.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "synet/binio.hpp"
#include "synet/errors.hpp"
#include "synet/scene_gen.hpp"

namespace synet {

namespace {

// Hard negatives: each class sits a small offset away from a ground texture,
// close enough that unsupervised compactness mistakes it for terrain.
// Hard negatives: each class sits a small offset off a ground texture, close
// enough that unsupervised compactness mistakes it for terrain. The offsets
// point away from the GroundA-GroundB axis so no object collides with the
// other ground class either.
constexpr double kObjectMeans[4][4] = {
    {0.72, 0.48, 0.45, 0.35},  // Blob: GroundA + (+,+,-,-) * 0.1
    {0.58, 0.50, 0.30, 0.68},  // Box: GroundB + (+,-,-,+) * 0.1
    {0.52, 0.48, 0.65, 0.35},  // Post: GroundA + (-,+,+,-) * 0.1
    {0.38, 0.50, 0.50, 0.68},  // Clutter: GroundB + (-,-,+,+) * 0.1
};

double object_channel_mean(ObjectClass cls, int channel) {
    return kObjectMeans[static_cast<int>(cls)][channel % 4];
}

int ground_band_top(const Scene& scene) {
    for (int r = 0; r < scene.height; ++r)
        for (int c = 0; c < scene.width; ++c)
            if (scene.terrain_at(r, c) != TerrainClass::Sky) return r;
    return scene.height;
}

void render_mask(Grid<uint8_t>& mask, ObjectClass cls, Rng& rng) {
    const int h = mask.height(), w = mask.width();
    std::fill(mask.data(), mask.data() + mask.size(), uint8_t{0});
    switch (cls) {
        case ObjectClass::Blob: {
            double cr = h / 2.0 + rng.next_range(-0.15, 0.15) * h;
            double cc = w / 2.0 + rng.next_range(-0.15, 0.15) * w;
            double ra = rng.next_range(0.28, 0.46) * h;
            double rb = rng.next_range(0.28, 0.46) * w;
            double wobble = rng.next_range(0.0, 0.18);
            double phase = rng.next_range(0.0, 6.283185307179586);
            for (int r = 0; r < h; ++r)
                for (int c = 0; c < w; ++c) {
                    double dr = (r - cr) / ra, dc = (c - cc) / rb;
                    double ang = std::atan2(dr, dc);
                    double lim = 1.0 + wobble * std::sin(3.0 * ang + phase);
                    if (dr * dr + dc * dc <= lim) mask.at(r, c) = 1;
                }
            break;
        }
        case ObjectClass::Box: {
            int inset_r = rng.next_int(0, std::max(0, h / 6));
            int inset_c = rng.next_int(0, std::max(0, w / 6));
            for (int r = inset_r; r < h - inset_r; ++r)
                for (int c = inset_c; c < w - inset_c; ++c) mask.at(r, c) = 1;
            break;
        }
        case ObjectClass::Post: {
            int bar = std::max(1, w / 4 + rng.next_int(-1, 1));
            int c0 = std::max(0, (w - bar) / 2 + rng.next_int(-w / 6, w / 6));
            for (int r = 0; r < h; ++r)
                for (int c = c0; c < std::min(w, c0 + bar); ++c) mask.at(r, c) = 1;
            break;
        }
        case ObjectClass::Clutter: {
            int pieces = rng.next_int(3, 6);
            for (int p = 0; p < pieces; ++p) {
                double cr = rng.next_range(0.15, 0.85) * h;
                double cc = rng.next_range(0.15, 0.85) * w;
                double rad = rng.next_range(0.10, 0.22) * std::min(h, w);
                for (int r = 0; r < h; ++r)
                    for (int c = 0; c < w; ++c) {
                        double dr = r - cr, dc = c - cc;
                        if (dr * dr + dc * dc <= rad * rad) mask.at(r, c) = 1;
                    }
            }
            break;
        }
    }
}

void render_patch(std::vector<float>& patch, const Roi& roi, int channels, ObjectClass cls,
                  Rng& rng) {
    patch.resize(static_cast<size_t>(channels) * static_cast<size_t>(roi.height) *
                 static_cast<size_t>(roi.width));
    for (int k = 0; k < channels; ++k) {
        double mean = object_channel_mean(cls, k);
        double shade = rng.next_range(-0.04, 0.04);
        for (int r = 0; r < roi.height; ++r)
            for (int c = 0; c < roi.width; ++c) {
                double v = mean + shade + 0.05 * rng.next_gaussian();
                patch[(static_cast<size_t>(k) * static_cast<size_t>(roi.height) +
                       static_cast<size_t>(r)) *
                          static_cast<size_t>(roi.width) +
                      static_cast<size_t>(c)] = static_cast<float>(std::clamp(v, 0.0, 1.0));
            }
    }
}

void erode_once(Grid<uint8_t>& mask) {
    Grid<uint8_t> src = mask;
    for (int r = 0; r < mask.height(); ++r)
        for (int c = 0; c < mask.width(); ++c) {
            if (!src.at(r, c)) continue;
            bool keep = true;
            for (int dr = -1; dr <= 1 && keep; ++dr)
                for (int dc = -1; dc <= 1 && keep; ++dc) {
                    int nr = r + dr, nc = c + dc;
                    if (nr < 0 || nr >= mask.height() || nc < 0 || nc >= mask.width() ||
                        !src.at(nr, nc))
                        keep = false;
                }
            mask.at(r, c) = keep ? 1 : 0;
        }
}

// Low-quality degradation: eroded silhouette plus a cropped-off bottom.
void degrade(NegativeProposal& p) {
    erode_once(p.mask);
    int cut = p.roi.height - std::max(1, (p.roi.height * 7) / 10);
    for (int r = p.roi.height - cut; r < p.roi.height; ++r)
        for (int c = 0; c < p.roi.width; ++c) p.mask.at(r, c) = 0;
}

}  // namespace

const char* object_class_name(ObjectClass c) {
    switch (c) {
        case ObjectClass::Blob: return "blob";
        case ObjectClass::Box: return "box";
        case ObjectClass::Post: return "post";
        case ObjectClass::Clutter: return "clutter";
    }
    return "?";
}

const char* quality_name(Quality q) { return q == Quality::High ? "high" : "low"; }

int NegativeProposal::mask_area() const {
    int n = 0;
    for (size_t i = 0; i < mask.size(); ++i) n += mask[i] ? 1 : 0;
    return n;
}

NegativeProposal propose_negative(const Scene& scene, Rng& rng, const FilterConfig& filters) {
    if (filters.area_min > filters.area_max)
        throw ConfigError("area_min must not exceed area_max");
    if (filters.max_retries < 0) throw ConfigError("max_retries must be >= 0");

    const int top = ground_band_top(scene);
    if (top >= scene.height) throw ConfigError("scene has no ground band");

    int size_hi = std::min({filters.size_max, scene.height - top, scene.width});
    int size_lo = std::min(filters.size_min, size_hi);
    if (size_lo < 2) size_lo = 2;
    if (size_hi < size_lo) size_hi = size_lo;

    // Fig. 2 structure: one ROI, then repeated render+filter on that ROI.
    NegativeProposal p;
    p.roi.height = rng.next_int(size_lo, size_hi);
    p.roi.width = rng.next_int(size_lo, size_hi);
    p.roi.row = rng.next_int(top, scene.height - p.roi.height);
    p.roi.col = rng.next_int(0, scene.width - p.roi.width);
    p.object_class = static_cast<ObjectClass>(rng.next_below(4));
    p.quality = rng.next_bool(filters.low_quality_fraction) ? Quality::Low : Quality::High;
    p.mask = Grid<uint8_t>(p.roi.height, p.roi.width, 0);

    for (int attempt = 0; attempt <= filters.max_retries; ++attempt) {
        render_mask(p.mask, p.object_class, rng);
        render_patch(p.patch, p.roi, scene.channels, p.object_class, rng);
        if (p.quality == Quality::Low) degrade(p);
        int area = p.mask_area();
        if (area >= filters.area_min && area <= filters.area_max) {
            p.retries = attempt;
            return p;
        }
    }
    throw ProposalRejected("no render passed the area filter", filters.max_retries);
}

CompositionResult compose(const Scene& scene, const LabelMask& labels,
                          const NegativeProposal& proposal) {
    const Roi& roi = proposal.roi;
    if (roi.row < 0 || roi.col < 0 || roi.height < 0 || roi.width < 0 ||
        roi.row + roi.height > scene.height || roi.col + roi.width > scene.width)
        throw BoundsError("proposal roi outside scene bounds");

    CompositionResult out{scene, labels, {}};
    out.record.negative_mask = Grid<uint8_t>(scene.height, scene.width, 0);

    for (int r = 0; r < roi.height; ++r) {
        for (int c = 0; c < roi.width; ++c) {
            if (!proposal.mask.at(r, c)) continue;
            int sr = roi.row + r, sc = roi.col + c;
            for (int k = 0; k < scene.channels; ++k)
                out.scene.value(k, sr, sc) = proposal.patch_value(k, r, c);
            if (out.labels.at(sr, sc) == Label::Positive) ++out.record.overridden_positive;
            out.labels.set(sr, sc, Label::NegSynthetic);
            out.record.negative_mask.at(sr, sc) = 1;
        }
    }
    out.record.proposals.push_back({roi, proposal.object_class, proposal.mask_area(),
                                    proposal.quality, proposal.retries});
    return out;
}

std::vector<CompositionRecord> inject_dataset(std::vector<SceneRecord>& dataset, double ratio,
                                              Rng& rng, const InjectConfig& config) {
    if (ratio < 0.0 || ratio > 1.0) throw ConfigError("injection ratio must be in [0,1]");
    const int n = static_cast<int>(dataset.size());
    const int pick = static_cast<int>(std::llround(ratio * n));
    std::vector<int> chosen = rng.sample_without_replacement(n, pick);
    std::sort(chosen.begin(), chosen.end());

    std::vector<CompositionRecord> records;
    records.reserve(chosen.size());
    for (int idx : chosen) {
        SceneRecord& rec = dataset[static_cast<size_t>(idx)];
        CompositionRecord merged;
        merged.scene_id = rec.id;
        merged.negative_mask = Grid<uint8_t>(rec.scene.height, rec.scene.width, 0);

        int want = rng.next_int(config.min_objects, config.max_objects);
        int placed = 0;
        // A rejected ROI is retried with a fresh one; the budget is generous
        // because at least one instance per selected scene is mandatory.
        for (int attempt = 0; attempt < 8 * config.max_objects && placed < want; ++attempt) {
            try {
                NegativeProposal p = propose_negative(rec.scene, rng, config.filters);
                CompositionResult res = compose(rec.scene, rec.labels, p);
                rec.scene = std::move(res.scene);
                rec.labels = std::move(res.labels);
                merged.overridden_positive += res.record.overridden_positive;
                merged.proposals.push_back(res.record.proposals.front());
                for (size_t i = 0; i < merged.negative_mask.size(); ++i)
                    if (res.record.negative_mask[i]) merged.negative_mask[i] = 1;
                ++placed;
            } catch (const ProposalRejected&) {
                continue;
            }
        }
        if (placed == 0)
            throw ProposalRejected("could not place a negative in scene " + rec.id,
                                   config.filters.max_retries);
        records.push_back(std::move(merged));
    }
    return records;
}

std::vector<int> encode_mask_rle(const Grid<uint8_t>& mask) {
    std::vector<int> runs;
    uint8_t current = 0;  // runs alternate starting with zeros
    int len = 0;
    for (size_t i = 0; i < mask.size(); ++i) {
        uint8_t v = mask[i] ? 1 : 0;
        if (v == current) {
            ++len;
        } else {
            runs.push_back(len);
            current = v;
            len = 1;
        }
    }
    runs.push_back(len);
    return runs;
}

Grid<uint8_t> decode_mask_rle(const std::vector<int>& runs, int height, int width) {
    Grid<uint8_t> mask(height, width, 0);
    size_t pos = 0;
    uint8_t current = 0;
    for (int run : runs) {
        if (run < 0 || pos + static_cast<size_t>(run) > mask.size())
            throw IoError("RLE runs exceed mask size");
        for (int i = 0; i < run; ++i) mask[pos++] = current;
        current = current ? 0 : 1;
    }
    if (pos != mask.size()) throw IoError("RLE runs do not cover mask");
    return mask;
}

std::string manifest_to_jsonl(const std::vector<CompositionRecord>& records) {
    std::string out;
    for (const auto& rec : records) {
        nlohmann::json j;
        j["scene_id"] = rec.scene_id;
        nlohmann::json props = nlohmann::json::array();
        for (const auto& p : rec.proposals) {
            props.push_back({{"roi", {p.roi.row, p.roi.col, p.roi.height, p.roi.width}},
                             {"class", object_class_name(p.object_class)},
                             {"area", p.area},
                             {"quality", quality_name(p.quality)},
                             {"retries", p.retries}});
        }
        j["proposals"] = props;
        j["overridden_positive"] = rec.overridden_positive;
        j["mask_height"] = rec.negative_mask.height();
        j["mask_width"] = rec.negative_mask.width();
        j["mask_rle"] = encode_mask_rle(rec.negative_mask);
        out += j.dump();
        out += '\n';
    }
    return out;
}

void write_manifest(const std::filesystem::path& path,
                    const std::vector<CompositionRecord>& records) {
    atomic_write_file(path, manifest_to_jsonl(records));
}

}  // namespace synet
