#include "harmonize/io.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace harmonize {

// ============================================================================
//  SHA-256 (FIPS 180-4)
// ============================================================================

namespace {

constexpr std::array<std::uint32_t, 64> kSha256K = {
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4,
    0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe,
    0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f,
    0x4a7484aa, 0x5cb0a9dc, 0x76f988da, 0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7,
    0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc,
    0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
    0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070, 0x19a4c116,
    0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
    0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7,
    0xc67178f2};

inline std::uint32_t rotr(std::uint32_t x, int n) {
    return (x >> n) | (x << (32 - n));
}

struct Sha256 {
    std::array<std::uint32_t, 8> h = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                                      0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
    std::array<std::uint8_t, 64> block{};
    std::size_t block_len = 0;
    std::uint64_t total = 0;

    void compress() {
        std::uint32_t w[64];
        for (int i = 0; i < 16; ++i)
            w[i] = (std::uint32_t(block[4 * i]) << 24) | (std::uint32_t(block[4 * i + 1]) << 16) |
                   (std::uint32_t(block[4 * i + 2]) << 8) | std::uint32_t(block[4 * i + 3]);
        for (int i = 16; i < 64; ++i) {
            const std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
            const std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
            w[i] = w[i - 16] + s0 + w[i - 7] + s1;
        }
        auto [a, b, c, d, e, f, g, hh] = h;
        for (int i = 0; i < 64; ++i) {
            const std::uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
            const std::uint32_t ch = (e & f) ^ (~e & g);
            const std::uint32_t t1 = hh + s1 + ch + kSha256K[static_cast<std::size_t>(i)] + w[i];
            const std::uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
            const std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
            const std::uint32_t t2 = s0 + maj;
            hh = g; g = f; f = e; e = d + t1;
            d = c; c = b; b = a; a = t1 + t2;
        }
        h[0] += a; h[1] += b; h[2] += c; h[3] += d;
        h[4] += e; h[5] += f; h[6] += g; h[7] += hh;
    }

    void update(const std::uint8_t* data, std::size_t size) {
        total += size;
        while (size > 0) {
            const std::size_t take = std::min(size, block.size() - block_len);
            std::memcpy(block.data() + block_len, data, take);
            block_len += take;
            data += take;
            size -= take;
            if (block_len == block.size()) {
                compress();
                block_len = 0;
            }
        }
    }

    std::string finish() {
        const std::uint64_t bits = total * 8;
        const std::uint8_t pad = 0x80;
        update(&pad, 1);
        const std::uint8_t zero = 0;
        while (block_len != 56)
            update(&zero, 1);
        std::uint8_t len[8];
        for (int i = 0; i < 8; ++i)
            len[i] = static_cast<std::uint8_t>(bits >> (56 - 8 * i));
        update(len, 8);

        static const char* hex = "0123456789abcdef";
        std::string out;
        out.reserve(64);
        for (std::uint32_t word : h)
            for (int i = 3; i >= 0; --i) {
                const std::uint8_t byte = static_cast<std::uint8_t>(word >> (8 * i));
                out.push_back(hex[byte >> 4]);
                out.push_back(hex[byte & 0xF]);
            }
        return out;
    }
};

}  // namespace

std::string sha256_hex(const void* data, std::size_t size) {
    Sha256 state;
    state.update(static_cast<const std::uint8_t*>(data), size);
    return state.finish();
}

std::string sha256_hex(const std::string& data) {
    return sha256_hex(data.data(), data.size());
}

std::string sha256_hex(const Mat& m) {
    return sha256_hex(m.data(), static_cast<std::size_t>(m.size()) * sizeof(double));
}

// ============================================================================
//  PGM
// ============================================================================

namespace {

int next_pgm_token(std::istream& in) {
    // Skips whitespace and '#' comments, returns the next integer.
    char c;
    while (in.get(c)) {
        if (c == '#') {
            while (in.get(c) && c != '\n') {}
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            in.unget();
            int value;
            if (in >> value)
                return value;
            break;
        }
    }
    throw parameter_error("pgm: truncated header");
}

}  // namespace

Mat read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw parameter_error("pgm: cannot open " + path.string());
    std::string magic(2, '\0');
    in.read(magic.data(), 2);
    if (magic != "P5" && magic != "P2")
        throw parameter_error("pgm: unsupported magic '" + magic + "' in " + path.string());
    const int width = next_pgm_token(in);
    const int height = next_pgm_token(in);
    const int maxval = next_pgm_token(in);
    if (width < 1 || height < 1 || maxval < 1 || maxval > 255)
        throw parameter_error("pgm: unsupported dimensions/maxval in " + path.string());

    Mat grid(height, width);
    if (magic == "P5") {
        in.get();  // single whitespace after maxval
        std::vector<std::uint8_t> bytes(static_cast<std::size_t>(width) * height);
        in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!in)
            throw parameter_error("pgm: truncated pixel data in " + path.string());
        for (Index i = 0; i < height; ++i)
            for (Index j = 0; j < width; ++j)
                grid(i, j) = bytes[static_cast<std::size_t>(i) * width + j] /
                             static_cast<double>(maxval);
    } else {
        for (Index i = 0; i < height; ++i)
            for (Index j = 0; j < width; ++j)
                grid(i, j) = next_pgm_token(in) / static_cast<double>(maxval);
    }
    return grid;
}

QuantizedImage quantize_minmax(const Mat& grid) {
    QuantizedImage img;
    img.height = grid.rows();
    img.width = grid.cols();
    img.min = grid.minCoeff();
    img.max = grid.maxCoeff();
    img.bytes.resize(static_cast<std::size_t>(grid.size()));
    const double range = img.max - img.min;
    std::size_t k = 0;
    for (Index i = 0; i < grid.rows(); ++i)
        for (Index j = 0; j < grid.cols(); ++j) {
            const double unit = range > 0.0 ? (grid(i, j) - img.min) / range : 0.0;
            const long q = std::lround(unit * 255.0);
            img.bytes[k++] = static_cast<std::uint8_t>(std::clamp(q, 0L, 255L));
        }
    return img;
}

QuantizedImage quantize_binary(const Mat& grid) {
    QuantizedImage img;
    img.height = grid.rows();
    img.width = grid.cols();
    img.min = 0.0;
    img.max = 1.0;
    img.bytes.resize(static_cast<std::size_t>(grid.size()));
    std::size_t k = 0;
    for (Index i = 0; i < grid.rows(); ++i)
        for (Index j = 0; j < grid.cols(); ++j)
            img.bytes[k++] = grid(i, j) != 0.0 ? 255 : 0;
    return img;
}

void write_pgm(const std::filesystem::path& path, const QuantizedImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw parameter_error("pgm: cannot write " + path.string());
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.bytes.data()),
              static_cast<std::streamsize>(img.bytes.size()));
    if (!out)
        throw parameter_error("pgm: write failed for " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw parameter_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw parameter_error("cannot write " + path.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out)
        throw parameter_error("write failed for " + path.string());
}

}  // namespace harmonize
