#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace synet {

// Little-endian byte buffer writer/reader for the container formats.
class ByteWriter {
 public:
    void u8(uint8_t v) { buf_.push_back(v); }
    void u16(uint16_t v) {
        buf_.push_back(static_cast<uint8_t>(v & 0xff));
        buf_.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
    }
    void u32(uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
    }
    void u64(uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
    }
    void f32(float v);
    void f64(double v);
    void bytes(const void* p, size_t n);
    void magic(const char tag[4]) { bytes(tag, 4); }

    const std::vector<uint8_t>& buffer() const { return buf_; }

 private:
    std::vector<uint8_t> buf_;
};

class ByteReader {
 public:
    explicit ByteReader(std::vector<uint8_t> data) : buf_(std::move(data)) {}

    uint8_t u8();
    uint16_t u16();
    uint32_t u32();
    uint64_t u64();
    float f32();
    double f64();
    void bytes(void* p, size_t n);
    void expect_magic(const char tag[4], const std::string& what);
    size_t remaining() const { return buf_.size() - pos_; }
    bool at_end() const { return pos_ == buf_.size(); }

 private:
    void need(size_t n);
    std::vector<uint8_t> buf_;
    size_t pos_ = 0;
};

// Write-to-temp + rename so failed runs leave no partial artifacts.
void atomic_write_file(const std::filesystem::path& path, const void* data, size_t n);
void atomic_write_file(const std::filesystem::path& path, const std::string& text);
void atomic_write_file(const std::filesystem::path& path, const std::vector<uint8_t>& data);

std::vector<uint8_t> read_file_bytes(const std::filesystem::path& path);
std::string read_file_text(const std::filesystem::path& path);

// FNV-1a 64 over file bytes, hex string; used for artifact hashes.
std::string fnv1a_hex(const std::vector<uint8_t>& data);
std::string hash_file(const std::filesystem::path& path);

}  // namespace synet
