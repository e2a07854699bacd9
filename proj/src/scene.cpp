#include "synet/scene.hpp"

#include <algorithm>

#include "synet/binio.hpp"
#include "synet/errors.hpp"

namespace synet {

namespace {
constexpr char kMagic[4] = {'S', 'Y', 'N', 'T'};
constexpr uint16_t kVersion = 1;
}  // namespace

std::vector<uint8_t> encode_scene_container(const Scene& scene, const LabelMask& labels) {
    if (labels.labels.height() != scene.height || labels.labels.width() != scene.width)
        throw ConfigError("label mask dimensions do not match scene");
    ByteWriter w;
    w.magic(kMagic);
    w.u16(kVersion);
    w.u32(static_cast<uint32_t>(scene.height));
    w.u32(static_cast<uint32_t>(scene.width));
    w.u32(static_cast<uint32_t>(scene.channels));
    for (float v : scene.data) w.f32(v);
    w.bytes(scene.terrain.data(), scene.terrain.size());
    w.bytes(labels.labels.data(), labels.labels.size());
    return w.buffer();
}

std::pair<Scene, LabelMask> decode_scene_container(const std::vector<uint8_t>& bytes) {
    ByteReader r(bytes);
    r.expect_magic(kMagic, "scene container");
    uint16_t version = r.u16();
    if (version != kVersion) throw IoError("unsupported scene container version");
    Scene s;
    s.height = static_cast<int>(r.u32());
    s.width = static_cast<int>(r.u32());
    s.channels = static_cast<int>(r.u32());
    if (s.height <= 0 || s.width <= 0 || s.channels <= 0)
        throw IoError("corrupt scene container header");
    size_t plane = static_cast<size_t>(s.height) * static_cast<size_t>(s.width);
    s.data.resize(plane * static_cast<size_t>(s.channels));
    for (auto& v : s.data) v = r.f32();
    s.terrain = Grid<uint8_t>(s.height, s.width);
    r.bytes(s.terrain.data(), plane);
    LabelMask m;
    m.labels = Grid<uint8_t>(s.height, s.width);
    r.bytes(m.labels.data(), plane);
    return {std::move(s), std::move(m)};
}

void write_scene_container(const std::filesystem::path& path, const Scene& scene,
                           const LabelMask& labels) {
    atomic_write_file(path, encode_scene_container(scene, labels));
}

std::pair<Scene, LabelMask> read_scene_container(const std::filesystem::path& path) {
    return decode_scene_container(read_file_bytes(path));
}

std::vector<SceneRecord> load_scene_dir(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".synt")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<SceneRecord> out;
    out.reserve(files.size());
    for (const auto& f : files) {
        auto [scene, labels] = read_scene_container(f);
        out.push_back({f.stem().string(), std::move(scene), std::move(labels)});
    }
    return out;
}

}  // namespace synet
