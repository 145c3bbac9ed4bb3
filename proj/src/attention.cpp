#include "harmonize/attention.hpp"

#include <cmath>

namespace harmonize {

namespace {

void check_projection(const Mat& src, const AttentionWeights& w, const char* what) {
    if (src.cols() != w.w_q.rows())
        throw dimension_error(std::string(what) + ": feature dim " + std::to_string(src.cols()) +
                              " vs W_Q rows " + std::to_string(w.w_q.rows()));
    if (w.w_k.cols() != w.w_q.cols() || w.w_v.cols() != w.w_q.cols())
        throw dimension_error(std::string(what) + ": inconsistent projection dim d");
    if (w.w_k.rows() != w.w_v.rows())
        throw dimension_error(std::string(what) + ": W_K/W_V source dim mismatch");
}

}  // namespace

SwapResult scaled_dot_attention(const Mat& q, const Mat& k, const Mat& v) {
    const Mat kt = k.transpose();
    const Mat scores = matmul(q, kt);  // [l, n]
    const Mat map = softmax_rows(scores, 1.0 / std::sqrt(static_cast<double>(q.cols())));
    return SwapResult{matmul(map, v), map};
}

AttentionResult cross_attention(const Mat& f, const ContextualEmbedding& c,
                                const AttentionWeights& w) {
    if (c.length() < 1)
        throw empty_input_error("cross_attention: empty contextual embedding");
    check_projection(f, w, "cross_attention");
    if (c.feature_dim() != w.w_k.rows())
        throw dimension_error("cross_attention: context dim " + std::to_string(c.feature_dim()) +
                              " vs W_K rows " + std::to_string(w.w_k.rows()));

    const Mat q = matmul(f, w.w_q);
    const Mat k = matmul(c.rows, w.w_k);
    const Mat v = matmul(c.rows, w.w_v);
    SwapResult r = scaled_dot_attention(q, k, v);

    AttentionResult out;
    out.output = std::move(r.output);
    out.record.kind = AttentionKind::Cross;
    out.record.map = std::move(r.map);
    return out;
}

AttentionResult self_attention(const Mat& f, const AttentionWeights& w, bool keep_qkv) {
    if (f.rows() < 1)
        throw empty_input_error("self_attention: empty feature sequence");
    check_projection(f, w, "self_attention");
    if (f.cols() != w.w_k.rows())
        throw dimension_error("self_attention: feature dim " + std::to_string(f.cols()) +
                              " vs W_K rows " + std::to_string(w.w_k.rows()));

    Mat q = matmul(f, w.w_q);
    Mat k = matmul(f, w.w_k);
    Mat v = matmul(f, w.w_v);
    SwapResult r = scaled_dot_attention(q, k, v);

    AttentionResult out;
    out.output = std::move(r.output);
    out.record.kind = AttentionKind::Self;
    out.record.map = std::move(r.map);
    if (keep_qkv) {
        out.record.q = std::move(q);
        out.record.k = std::move(k);
        out.record.v = std::move(v);
        out.record.has_qkv = true;
    }
    return out;
}

SwapResult attn_swap(const Mat& q, const Mat& k_donor, const Mat& v_donor) {
    if (k_donor.rows() != q.rows() || v_donor.rows() != q.rows())
        throw dual_shape_error("attn_swap: latent length mismatch between processes, Q " +
                               std::to_string(q.rows()) + " vs K'/V' " +
                               std::to_string(k_donor.rows()) + "/" +
                               std::to_string(v_donor.rows()));
    if (k_donor.cols() != q.cols() || v_donor.cols() != q.cols())
        throw dimension_error("attn_swap: projection dim mismatch");
    return scaled_dot_attention(q, k_donor, v_donor);
}

SwapResult masked_attn_swap(const Mat& q, const Mat& k, const Mat& v, const Mat& k_donor,
                            const Mat& v_donor, const Vec& mask) {
    if (mask.size() != q.rows())
        throw mask_error("masked_attn_swap: mask length " + std::to_string(mask.size()) +
                         " vs latent length " + std::to_string(q.rows()));
    for (Index i = 0; i < mask.size(); ++i)
        if (mask(i) != 0.0 && mask(i) != 1.0)
            throw mask_error("masked_attn_swap: mask entry " + std::to_string(i) +
                             " is not binary");

    const SwapResult swapped = attn_swap(q, k_donor, v_donor);
    const SwapResult standard = scaled_dot_attention(q, k, v);

    SwapResult out;
    out.output.resize(q.rows(), swapped.output.cols());
    out.map.resize(q.rows(), swapped.map.cols());
    for (Index i = 0; i < q.rows(); ++i) {
        if (mask(i) == 1.0) {
            out.output.row(i) = swapped.output.row(i);
            out.map.row(i) = swapped.map.row(i);
        } else {
            out.output.row(i) = standard.output.row(i);
            out.map.row(i) = standard.map.row(i);
        }
    }
    return out;
}

}  // namespace harmonize
