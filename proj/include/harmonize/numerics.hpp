#pragma once

#include <Eigen/Dense>

#include <cstdint>

#include "harmonize/errors.hpp"

namespace harmonize {

// Dense 64-bit float types used everywhere. Row-major storage so that the
// (pixel, feature) layout of latents and the token layout of embeddings are
// contiguous by row.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

// ============================================================================
//  Deterministic PRNG: SplitMix64 + Box-Muller
// ============================================================================

// Identical seed yields an identical stream on every platform; next_u64 is
// pure integer arithmetic, so golden values can be pinned bit-exactly.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform draw in (0, 1]: ((x >> 11) + 1) * 2^-53.
    double next_unit() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1p-53;
    }

    // One standard normal per call, consuming two raw outputs
    // (Box-Muller cosine branch).
    double gaussian();

private:
    std::uint64_t state_;
};

// Derives an independent stream seed for (seed, stream). Injective in
// `stream` for a fixed seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// Fills row-major, one gaussian() per entry, scaled by `scale`.
Mat gaussian_mat(SeededRng& rng, Index rows, Index cols, double scale = 1.0);

// ============================================================================
//  Kernels
// ============================================================================

// Plain product with per-element accumulation running k-ascending, bitwise
// equal to the naive (row, col, inner) triple loop.
Mat matmul(const Mat& a, const Mat& b);

// Each row r is replaced by exp(scale*r - max(scale*r)) / sum(...).
// Output rows sum to 1 within 1e-12; max subtraction prevents overflow.
Mat softmax_rows(const Mat& m, double scale);

// Nearest-neighbour resample of an H x W grid; source index for target i is
// floor((i + 0.5) * H / target_h). Binary inputs stay binary.
Mat resample_nearest(const Mat& map, Index target_h, Index target_w);

// ============================================================================
//  Small helpers
// ============================================================================

void ensure_finite(const Mat& m, const char* what);

inline std::string shape_str(const Mat& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace harmonize
