#include "harmonize/latent.hpp"

namespace harmonize {

LatentState make_latent(Index grid_h, Index grid_w, Mat features) {
    if (grid_h < 1 || grid_w < 1)
        throw dimension_error("latent: grid must be >= 1x1");
    if (features.rows() != grid_h * grid_w)
        throw dimension_error("latent: " + std::to_string(features.rows()) + " rows for a " +
                              std::to_string(grid_h) + "x" + std::to_string(grid_w) + " grid");
    ensure_finite(features, "latent");
    return LatentState{grid_h, grid_w, std::move(features)};
}

Image make_image(Index height, Index width, Mat pixels) {
    if (height < 1 || width < 1)
        throw dimension_error("image: dims must be >= 1x1");
    if (pixels.rows() != height * width || pixels.cols() < 1)
        throw dimension_error("image: pixel matrix " + shape_str(pixels) + " for a " +
                              std::to_string(height) + "x" + std::to_string(width) + " grid");
    ensure_finite(pixels, "image");
    return Image{height, width, pixels.cols(), std::move(pixels)};
}

Image image_from_grid(const Mat& grid) {
    Mat pixels(grid.rows() * grid.cols(), 1);
    Index k = 0;
    for (Index i = 0; i < grid.rows(); ++i)
        for (Index j = 0; j < grid.cols(); ++j)
            pixels(k++, 0) = grid(i, j);
    return make_image(grid.rows(), grid.cols(), std::move(pixels));
}

Mat grid_from_image(const Image& img) {
    Mat grid(img.height, img.width);
    for (Index i = 0; i < img.height; ++i)
        for (Index j = 0; j < img.width; ++j)
            grid(i, j) = img.pixels.row(i * img.width + j).mean();
    return grid;
}

LatentState Autoencoder::encode(const Image& x) const {
    return LatentState{x.height, x.width, x.pixels};
}

Image Autoencoder::decode(const LatentState& z) const {
    return Image{z.grid_h, z.grid_w, z.dim(), z.features};
}

}  // namespace harmonize
