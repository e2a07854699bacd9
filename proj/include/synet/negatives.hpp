#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "synet/rng.hpp"
#include "synet/scene.hpp"

namespace synet {

enum class ObjectClass : uint8_t { Blob = 0, Box = 1, Post = 2, Clutter = 3 };
enum class Quality : uint8_t { High = 0, Low = 1 };

const char* object_class_name(ObjectClass c);
const char* quality_name(Quality q);

struct Roi {
    int row = 0;
    int col = 0;
    int height = 0;
    int width = 0;
};

struct NegativeProposal {
    Roi roi;
    ObjectClass object_class = ObjectClass::Blob;
    std::vector<float> patch;  // channels * roi.height * roi.width, plane-major
    Grid<uint8_t> mask;        // roi.height x roi.width, 0/1
    Quality quality = Quality::High;
    int retries = 0;           // rejected render attempts before acceptance

    int mask_area() const;
    float patch_value(int ch, int r, int c) const {
        return patch[(static_cast<size_t>(ch) * static_cast<size_t>(roi.height) +
                      static_cast<size_t>(r)) *
                         static_cast<size_t>(roi.width) +
                     static_cast<size_t>(c)];
    }
};

struct FilterConfig {
    int area_min = 20;
    int area_max = 1 << 22;   // effectively unbounded for toy scenes
    int max_retries = 16;
    double low_quality_fraction = 0.0;  // probability a proposal is degraded
    int size_min = 6;                   // ROI side sampling range, pixels
    int size_max = 18;
};

struct ProposalRecord {
    Roi roi;
    ObjectClass object_class;
    int area = 0;
    Quality quality = Quality::High;
    int retries = 0;
};

struct CompositionRecord {
    std::string scene_id;
    std::vector<ProposalRecord> proposals;
    Grid<uint8_t> negative_mask;   // scene-sized union of applied masks
    int overridden_positive = 0;   // POSITIVE pixels flipped to NEG_SYNTHETIC
};

// Samples an ROI in the ground band and loops render-then-filter on that ROI
// until a mask passes the area filter. Throws ProposalRejected when the retry
// budget is exhausted.
NegativeProposal propose_negative(const Scene& scene, Rng& rng, const FilterConfig& filters);

struct CompositionResult {
    Scene scene;
    LabelMask labels;
    CompositionRecord record;
};

// Hard-alpha blend of the proposal into the scene; pixels outside the mask
// are untouched and labels inside become NEG_SYNTHETIC.
CompositionResult compose(const Scene& scene, const LabelMask& labels,
                          const NegativeProposal& proposal);

struct InjectConfig {
    FilterConfig filters;
    int min_objects = 1;
    int max_objects = 3;
};

// Augments exactly round(ratio * N) scenes in place, each with at least one
// composed negative. Returns one record per augmented scene in dataset order.
std::vector<CompositionRecord> inject_dataset(std::vector<SceneRecord>& dataset, double ratio,
                                              Rng& rng, const InjectConfig& config);

// Flat row-major RLE, alternating run lengths starting with zeros.
std::vector<int> encode_mask_rle(const Grid<uint8_t>& mask);
Grid<uint8_t> decode_mask_rle(const std::vector<int>& runs, int height, int width);

// JSON-lines manifest, one record per augmented scene.
std::string manifest_to_jsonl(const std::vector<CompositionRecord>& records);
void write_manifest(const std::filesystem::path& path,
                    const std::vector<CompositionRecord>& records);

}  // namespace synet
