#include "synet/binio.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

#include "synet/errors.hpp"

namespace synet {

void ByteWriter::f32(float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    u32(bits);
}

void ByteWriter::f64(double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    u64(bits);
}

void ByteWriter::bytes(const void* p, size_t n) {
    const auto* b = static_cast<const uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
}

void ByteReader::need(size_t n) {
    if (pos_ + n > buf_.size()) throw IoError("unexpected end of data");
}

uint8_t ByteReader::u8() {
    need(1);
    return buf_[pos_++];
}

uint16_t ByteReader::u16() {
    need(2);
    uint16_t v = static_cast<uint16_t>(buf_[pos_] | (buf_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
}

uint32_t ByteReader::u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(buf_[pos_ + static_cast<size_t>(i)]) << (8 * i);
    pos_ += 4;
    return v;
}

uint64_t ByteReader::u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(buf_[pos_ + static_cast<size_t>(i)]) << (8 * i);
    pos_ += 8;
    return v;
}

float ByteReader::f32() {
    uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

double ByteReader::f64() {
    uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

void ByteReader::bytes(void* p, size_t n) {
    need(n);
    std::memcpy(p, buf_.data() + pos_, n);
    pos_ += n;
}

void ByteReader::expect_magic(const char tag[4], const std::string& what) {
    char got[4];
    bytes(got, 4);
    if (std::memcmp(got, tag, 4) != 0) throw IoError("bad magic in " + what);
}

void atomic_write_file(const std::filesystem::path& path, const void* data, size_t n) {
    namespace fs = std::filesystem;
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + tmp.string());
        out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
        if (!out) throw IoError("short write: " + tmp.string());
    }
    fs::rename(tmp, path);
}

void atomic_write_file(const std::filesystem::path& path, const std::string& text) {
    atomic_write_file(path, text.data(), text.size());
}

void atomic_write_file(const std::filesystem::path& path, const std::vector<uint8_t>& data) {
    atomic_write_file(path, data.data(), data.size());
}

std::vector<uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());
    in.seekg(0, std::ios::end);
    auto n = in.tellg();
    in.seekg(0, std::ios::beg);
    std::vector<uint8_t> buf(static_cast<size_t>(n));
    in.read(reinterpret_cast<char*>(buf.data()), n);
    if (!in) throw IoError("short read: " + path.string());
    return buf;
}

std::string read_file_text(const std::filesystem::path& path) {
    auto b = read_file_bytes(path);
    return std::string(b.begin(), b.end());
}

std::string fnv1a_hex(const std::vector<uint8_t>& data) {
    uint64_t h = 1469598103934665603ull;
    for (uint8_t b : data) {
        h ^= b;
        h *= 1099511628211ull;
    }
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
    return std::string(out);
}

std::string hash_file(const std::filesystem::path& path) {
    return fnv1a_hex(read_file_bytes(path));
}

}  // namespace synet
