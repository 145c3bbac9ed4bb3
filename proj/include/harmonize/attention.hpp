#pragma once

#include <map>
#include <vector>

#include "harmonize/embedding.hpp"
#include "harmonize/numerics.hpp"

namespace harmonize {

// ============================================================================
//  Types
// ============================================================================

struct AttentionWeights {
    Mat w_q;  // [h, d]
    Mat w_k;  // [src, d]   src = h for self-attention, h_c for cross-attention
    Mat w_v;  // [src, d]

    Index proj_dim() const { return w_q.cols(); }
};

enum class AttentionKind { Self, Cross };

// One attention evaluation, as recorded during a forward pass. `map` rows sum
// to 1 within 1e-9. Q/K/V are retained only at designated swap layers.
struct AttentionRecord {
    int layer = -1;
    int step = -1;
    AttentionKind kind = AttentionKind::Self;
    Index grid_h = 0, grid_w = 0;  // latent grid behind the l query rows
    Mat map;                       // [l, l] self / [l, l_c] cross
    Mat q, k, v;                   // [l, d] each, when has_qkv
    bool has_qkv = false;
};

struct AttentionResult {
    Mat output;  // [l, d]
    AttentionRecord record;
};

struct SwapResult {
    Mat output;  // [l, d]
    Mat map;     // [l, l]
};

// Donor-side K'/V' captured from the visual-only pass at one timestep, plus
// the subject mask resampled to each swap layer's grid. Populated for exactly
// the configured swap layers.
struct SwapBuffer {
    struct LayerDonation {
        Mat k, v;  // [l, d]
        Vec mask;  // [l], binary
    };
    int step = -1;  // lockstep tag: must match the recipient's timestep
    std::map<int, LayerDonation> layers;
};

// ============================================================================
//  Operations
// ============================================================================

// softmax(Q K^T / sqrt(d)) V. Shared kernel behind every attention variant,
// so degenerate swaps reduce to standard attention bitwise.
SwapResult scaled_dot_attention(const Mat& q, const Mat& k, const Mat& v);

// Attention with K, V projected from the contextual embedding.
AttentionResult cross_attention(const Mat& f, const ContextualEmbedding& c,
                                const AttentionWeights& w);

// Attention with K, V projected from the latent features themselves.
AttentionResult self_attention(const Mat& f, const AttentionWeights& w, bool keep_qkv = false);

// M'_S V' with M'_S = softmax(Q K'^T / sqrt(d)); Q from the main process,
// K'/V' from the visual-only process.
SwapResult attn_swap(const Mat& q, const Mat& k_donor, const Mat& v_donor);

// Row i of the output is the attn_swap row where mask_i = 1 and the standard
// self-attention row where mask_i = 0; the mask selects whole query rows.
SwapResult masked_attn_swap(const Mat& q, const Mat& k, const Mat& v, const Mat& k_donor,
                            const Mat& v_donor, const Vec& mask);

}  // namespace harmonize
