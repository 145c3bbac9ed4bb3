#pragma once

#include <vector>

#include "harmonize/attention.hpp"
#include "harmonize/numerics.hpp"

namespace harmonize {

// Binary subject mask over the latent grid at a reference resolution.
struct SubjectMask {
    Mat values;            // [H_ref, W_ref], entries 0/1
    int source_step = -1;  // executed step whose records produced the mask
    int applied_step = -1; // executed step the mask was applied at, when swapped
    double coverage = 0.0;

    // Row-major flattening to the l = H*W latent pixel order.
    Vec flat() const;
};

// Per cross record: average the M_C columns at the subject slots, reshape to
// that record's grid, resample to H_ref x W_ref; then average across records
// and min-max normalize to [0, 1]. Constant maps normalize to all-zeros.
Mat aggregate_subject_saliency(const std::vector<AttentionRecord>& records,
                               const std::vector<Index>& subject_slots, Index h_ref,
                               Index w_ref);

// m_i = 1 iff saliency_i >= threshold. An all-zero mask is valid; the caller
// is expected to log it (the swap degenerates to plain self-attention).
SubjectMask binarize(const Mat& saliency, double threshold = 0.5, int source_step = -1);

}  // namespace harmonize
