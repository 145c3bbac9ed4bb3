#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "harmonize/numerics.hpp"

namespace harmonize {

// ============================================================================
//  Hashing
// ============================================================================

std::string sha256_hex(const void* data, std::size_t size);
std::string sha256_hex(const std::string& data);
std::string sha256_hex(const Mat& m);  // over the row-major double bytes

// ============================================================================
//  PGM images
// ============================================================================

// Reads P2/P5 with maxval <= 255; values scaled to [0, 1].
Mat read_pgm(const std::filesystem::path& path);

struct QuantizedImage {
    std::vector<std::uint8_t> bytes;  // row-major
    Index height = 0, width = 0;
    double min = 0.0, max = 0.0;  // pre-quantization range, for the manifest
};

// Min-max normalization to 0..255; a constant image maps to all zeros.
QuantizedImage quantize_minmax(const Mat& grid);

// Binary 0/1 grid to 0/255 bytes.
QuantizedImage quantize_binary(const Mat& grid);

// 8-bit binary PGM (P5). Byte-deterministic for identical input.
void write_pgm(const std::filesystem::path& path, const QuantizedImage& img);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& data);

}  // namespace harmonize
