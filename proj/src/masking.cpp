#include "harmonize/masking.hpp"

namespace harmonize {

Vec SubjectMask::flat() const {
    Vec out(values.size());
    Index k = 0;
    for (Index i = 0; i < values.rows(); ++i)
        for (Index j = 0; j < values.cols(); ++j)
            out(k++) = values(i, j);
    return out;
}

Mat aggregate_subject_saliency(const std::vector<AttentionRecord>& records,
                               const std::vector<Index>& subject_slots, Index h_ref,
                               Index w_ref) {
    if (subject_slots.empty())
        throw parameter_error("aggregate_subject_saliency: no subject slots given");
    if (h_ref < 1 || w_ref < 1)
        throw dimension_error("aggregate_subject_saliency: reference grid must be >= 1x1");

    Mat accum = Mat::Zero(h_ref, w_ref);
    int used = 0;
    for (const AttentionRecord& rec : records) {
        if (rec.kind != AttentionKind::Cross)
            continue;
        if (rec.grid_h * rec.grid_w != rec.map.rows())
            throw dimension_error("aggregate_subject_saliency: record grid " +
                                  std::to_string(rec.grid_h) + "x" + std::to_string(rec.grid_w) +
                                  " does not match map rows " + std::to_string(rec.map.rows()));
        Vec col = Vec::Zero(rec.map.rows());
        for (Index slot : subject_slots) {
            if (slot < 0 || slot >= rec.map.cols())
                throw dimension_error("aggregate_subject_saliency: subject slot " +
                                      std::to_string(slot) + " outside context length " +
                                      std::to_string(rec.map.cols()));
            col += rec.map.col(slot);
        }
        col /= static_cast<double>(subject_slots.size());
        const Eigen::Map<const Mat> grid(col.data(), rec.grid_h, rec.grid_w);
        accum += resample_nearest(grid, h_ref, w_ref);
        ++used;
    }
    if (used == 0)
        throw missing_record_error("aggregate_subject_saliency: no cross-attention records");

    accum /= static_cast<double>(used);
    const double lo = accum.minCoeff();
    const double hi = accum.maxCoeff();
    if (hi == lo)
        return Mat::Zero(h_ref, w_ref);
    return (accum.array() - lo) / (hi - lo);
}

SubjectMask binarize(const Mat& saliency, double threshold, int source_step) {
    if (threshold < 0.0 || threshold > 1.0)
        throw parameter_error("binarize: threshold " + std::to_string(threshold) +
                              " outside [0, 1]");
    SubjectMask mask;
    mask.values.resize(saliency.rows(), saliency.cols());
    for (Index i = 0; i < saliency.rows(); ++i)
        for (Index j = 0; j < saliency.cols(); ++j)
            mask.values(i, j) = saliency(i, j) >= threshold ? 1.0 : 0.0;
    mask.source_step = source_step;
    mask.coverage = saliency.size() > 0 ? mask.values.sum() / static_cast<double>(saliency.size()) : 0.0;
    return mask;
}

}  // namespace harmonize
