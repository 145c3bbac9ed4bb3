#include "harmonize/numerics.hpp"

#include <cmath>

namespace harmonize {

double SeededRng::gaussian() {
    const double u1 = next_unit();
    const double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    // (stream + gamma) * odd is a bijection of stream, so distinct streams
    // never collide for the same seed.
    SeededRng r(seed ^ ((stream + 0x632BE59BD9B4E019ull) * 0x9E3779B97F4A7C15ull));
    return r.next_u64();
}

Mat gaussian_mat(SeededRng& rng, Index rows, Index cols, double scale) {
    Mat m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j)
            m(i, j) = scale * rng.gaussian();
    return m;
}

Mat matmul(const Mat& a, const Mat& b) {
    if (a.cols() != b.rows())
        throw dimension_error("matmul: incompatible shapes " + shape_str(a) + " * " + shape_str(b));
    Mat c = Mat::Zero(a.rows(), b.cols());
    const Index n = b.cols();
    for (Index i = 0; i < a.rows(); ++i) {
        double* crow = c.data() + i * n;
        for (Index k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            const double* brow = b.data() + k * n;
            for (Index j = 0; j < n; ++j)
                crow[j] += aik * brow[j];
        }
    }
    return c;
}

Mat softmax_rows(const Mat& m, double scale) {
    Mat out(m.rows(), m.cols());
    for (Index i = 0; i < m.rows(); ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (Index j = 0; j < m.cols(); ++j)
            mx = std::max(mx, scale * m(i, j));
        double sum = 0.0;
        for (Index j = 0; j < m.cols(); ++j) {
            const double e = std::exp(scale * m(i, j) - mx);
            out(i, j) = e;
            sum += e;
        }
        for (Index j = 0; j < m.cols(); ++j)
            out(i, j) /= sum;
    }
    return out;
}

Mat resample_nearest(const Mat& map, Index target_h, Index target_w) {
    if (map.rows() < 1 || map.cols() < 1)
        throw dimension_error("resample_nearest: empty source map");
    if (target_h < 1 || target_w < 1)
        throw dimension_error("resample_nearest: target dims must be >= 1, got " +
                              std::to_string(target_h) + "x" + std::to_string(target_w));
    const Index h = map.rows(), w = map.cols();
    Mat out(target_h, target_w);
    for (Index i = 0; i < target_h; ++i) {
        const Index si = std::min<Index>(
            h - 1, static_cast<Index>(std::floor((i + 0.5) * static_cast<double>(h) / static_cast<double>(target_h))));
        for (Index j = 0; j < target_w; ++j) {
            const Index sj = std::min<Index>(
                w - 1, static_cast<Index>(std::floor((j + 0.5) * static_cast<double>(w) / static_cast<double>(target_w))));
            out(i, j) = map(si, sj);
        }
    }
    return out;
}

void ensure_finite(const Mat& m, const char* what) {
    if (!m.allFinite())
        throw parameter_error(std::string(what) + ": non-finite entries");
}

}  // namespace harmonize
