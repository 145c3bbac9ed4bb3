#pragma once

#include "harmonize/numerics.hpp"

namespace harmonize {

// Spatial latent as l = H*W tokens of dimension h, row-major pixel order.
struct LatentState {
    Index grid_h = 0, grid_w = 0;
    Mat features;  // [H*W, h]

    Index pixels() const { return features.rows(); }
    Index dim() const { return features.cols(); }
};

LatentState make_latent(Index grid_h, Index grid_w, Mat features);

// Pixel grid with C channels; same storage layout as LatentState so the
// identity autoencoder is pure bookkeeping.
struct Image {
    Index height = 0, width = 0, channels = 1;
    Mat pixels;  // [H*W, C]
};

Image make_image(Index height, Index width, Mat pixels);

// Grid helpers for single-channel data.
Image image_from_grid(const Mat& grid);
Mat grid_from_image(const Image& img);  // channel mean, [H, W]

// Identity autoencoder: decode(encode(x)) == x bit-exactly. The interface
// exists so a learned pair could be plugged in.
struct Autoencoder {
    LatentState encode(const Image& x) const;
    Image decode(const LatentState& z) const;
};

}  // namespace harmonize
