#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "harmonize/attention.hpp"

using namespace harmonize;

namespace {

AttentionWeights seeded_weights(SeededRng& rng, Index h, Index src, Index d) {
    return AttentionWeights{gaussian_mat(rng, h, d), gaussian_mat(rng, src, d),
                            gaussian_mat(rng, src, d)};
}

ContextualEmbedding plain_context(Mat rows) {
    ContextualEmbedding c;
    c.mode = ContextMode::TextualOnly;
    c.slots.assign(static_cast<std::size_t>(rows.rows()),
                   SlotRef{SlotOrigin::Textual, 0, TokenRole::Regular});
    c.rows = std::move(rows);
    return c;
}

}  // namespace

TEST_CASE("cross_attention: single context token pins every output row") {
    SeededRng rng(3);
    const Mat f = gaussian_mat(rng, 4, 6);
    const AttentionWeights w = seeded_weights(rng, 6, 5, 3);
    const ContextualEmbedding c = plain_context(gaussian_mat(rng, 1, 5));

    const AttentionResult r = cross_attention(f, c, w);
    const Mat value_row = matmul(c.rows, w.w_v);
    for (Index i = 0; i < 4; ++i)
        CHECK(r.output.row(i) == value_row.row(0));
    CHECK(r.record.kind == AttentionKind::Cross);
    CHECK(r.record.map == Mat::Ones(4, 1));
}

TEST_CASE("cross_attention: zero value projection zeroes the output") {
    SeededRng rng(5);
    const Mat f = gaussian_mat(rng, 3, 4);
    AttentionWeights w = seeded_weights(rng, 4, 6, 4);
    w.w_v.setZero();
    const ContextualEmbedding c = plain_context(gaussian_mat(rng, 5, 6));
    CHECK(cross_attention(f, c, w).output == Mat::Zero(3, 4));
}

TEST_CASE("cross_attention: straight-line evaluation of the formula") {
    Mat f(2, 2);
    f << 0.5, -1.0, 2.0, 0.25;
    Mat c_rows(3, 2);
    c_rows << 1.0, 0.0, 0.0, 1.0, 0.5, 0.5;
    AttentionWeights w;
    w.w_q.resize(2, 2);
    w.w_q << 1.0, 0.5, -0.5, 1.0;
    w.w_k.resize(2, 2);
    w.w_k << 0.25, 0.0, 0.0, 0.25;
    w.w_v.resize(2, 2);
    w.w_v << 1.0, 2.0, 3.0, 4.0;

    const AttentionResult got = cross_attention(f, plain_context(c_rows), w);

    for (Index i = 0; i < 2; ++i) {
        double q[2], scores[3], value[3][2];
        for (int a = 0; a < 2; ++a)
            q[a] = f(i, 0) * w.w_q(0, a) + f(i, 1) * w.w_q(1, a);
        for (int j = 0; j < 3; ++j) {
            double k[2];
            for (int a = 0; a < 2; ++a)
                k[a] = c_rows(j, 0) * w.w_k(0, a) + c_rows(j, 1) * w.w_k(1, a);
            scores[j] = (q[0] * k[0] + q[1] * k[1]) / std::sqrt(2.0);
            for (int a = 0; a < 2; ++a)
                value[j][a] = c_rows(j, 0) * w.w_v(0, a) + c_rows(j, 1) * w.w_v(1, a);
        }
        const double mx = std::max({scores[0], scores[1], scores[2]});
        double weights[3], total = 0.0;
        for (int j = 0; j < 3; ++j) {
            weights[j] = std::exp(scores[j] - mx);
            total += weights[j];
        }
        for (int a = 0; a < 2; ++a) {
            double out = 0.0;
            for (int j = 0; j < 3; ++j)
                out += weights[j] / total * value[j][a];
            CHECK(got.output(i, a) == doctest::Approx(out).epsilon(1e-14));
        }
    }
}

TEST_CASE("cross_attention: empty context rejected") {
    SeededRng rng(7);
    const Mat f = gaussian_mat(rng, 2, 4);
    const AttentionWeights w = seeded_weights(rng, 4, 4, 4);
    ContextualEmbedding empty;
    empty.rows = Mat(0, 4);
    CHECK_THROWS_AS(cross_attention(f, empty, w), empty_input_error);
}

TEST_CASE("self_attention: single latent pixel returns its projected value") {
    SeededRng rng(11);
    const Mat f = gaussian_mat(rng, 1, 5);
    const AttentionWeights w = seeded_weights(rng, 5, 5, 3);
    const AttentionResult r = self_attention(f, w);
    CHECK(r.output == matmul(f, w.w_v));
}

TEST_CASE("self_attention: identical rows give identical outputs") {
    SeededRng rng(13);
    Mat f = gaussian_mat(rng, 2, 4);
    f.row(1) = f.row(0);
    const AttentionWeights w = seeded_weights(rng, 4, 4, 4);
    const AttentionResult r = self_attention(f, w);
    CHECK(r.output.row(0) == r.output.row(1));
}

TEST_CASE("self_attention: matches a naive evaluation") {
    SeededRng rng(17);
    const Mat f = gaussian_mat(rng, 3, 4);
    const AttentionWeights w = seeded_weights(rng, 4, 4, 4);
    const AttentionResult got = self_attention(f, w);

    const Mat q = matmul(f, w.w_q), k = matmul(f, w.w_k), v = matmul(f, w.w_v);
    for (Index i = 0; i < 3; ++i) {
        double scores[3];
        for (Index j = 0; j < 3; ++j) {
            double acc = 0.0;
            for (Index a = 0; a < 4; ++a)
                acc += q(i, a) * k(j, a);
            scores[j] = acc / 2.0;  // sqrt(d) = 2
        }
        const double mx = std::max({scores[0], scores[1], scores[2]});
        double weights[3], total = 0.0;
        for (int j = 0; j < 3; ++j) {
            weights[j] = std::exp(scores[j] - mx);
            total += weights[j];
        }
        for (Index a = 0; a < 4; ++a) {
            double out = 0.0;
            for (Index j = 0; j < 3; ++j)
                out += weights[j] / total * v(j, a);
            CHECK(got.output(i, a) == doctest::Approx(out).epsilon(1e-13));
        }
    }
}

TEST_CASE("self_attention: q/k/v retained only on request") {
    SeededRng rng(19);
    const Mat f = gaussian_mat(rng, 3, 4);
    const AttentionWeights w = seeded_weights(rng, 4, 4, 4);
    CHECK_FALSE(self_attention(f, w).record.has_qkv);
    const AttentionResult kept = self_attention(f, w, true);
    CHECK(kept.record.has_qkv);
    CHECK(kept.record.q == matmul(f, w.w_q));
    CHECK(kept.record.k == matmul(f, w.w_k));
    CHECK(kept.record.v == matmul(f, w.w_v));
}

TEST_CASE("attn_swap: degenerate swap reproduces self-attention bitwise") {
    SeededRng rng(23);
    const Mat f = gaussian_mat(rng, 5, 4);
    const AttentionWeights w = seeded_weights(rng, 4, 4, 3);
    const AttentionResult self = self_attention(f, w, true);
    const SwapResult swapped = attn_swap(self.record.q, self.record.k, self.record.v);
    CHECK(swapped.output == self.output);
    CHECK(swapped.map == self.record.map);
}

TEST_CASE("attn_swap: single pixel copies the donor value row") {
    SeededRng rng(29);
    const Mat q = gaussian_mat(rng, 1, 4);
    const Mat k = gaussian_mat(rng, 1, 4);
    const Mat v = gaussian_mat(rng, 1, 4);
    CHECK(attn_swap(q, k, v).output == v);
}

TEST_CASE("attn_swap: worked 2x2 example") {
    Mat q(2, 2), k(2, 2), v(2, 2);
    q << 1, 0, 0, 1;
    k << 2, 0, 0, 2;
    v << 1, 2, 3, 4;
    const SwapResult r = attn_swap(q, k, v);
    // scores / sqrt(2): row0 = (sqrt(2), 0), row1 = (0, sqrt(2)).
    const double w_big = std::exp(std::sqrt(2.0)) / (std::exp(std::sqrt(2.0)) + 1.0);
    const double w_small = 1.0 - w_big;
    CHECK(r.output(0, 0) == doctest::Approx(w_big * 1.0 + w_small * 3.0).epsilon(1e-14));
    CHECK(r.output(0, 1) == doctest::Approx(w_big * 2.0 + w_small * 4.0).epsilon(1e-14));
    CHECK(r.output(1, 0) == doctest::Approx(w_small * 1.0 + w_big * 3.0).epsilon(1e-14));
    CHECK(r.output(1, 1) == doctest::Approx(w_small * 2.0 + w_big * 4.0).epsilon(1e-14));
}

TEST_CASE("attn_swap: latent length mismatch between processes") {
    SeededRng rng(31);
    const Mat q = gaussian_mat(rng, 4, 3);
    const Mat k = gaussian_mat(rng, 5, 3);
    const Mat v = gaussian_mat(rng, 5, 3);
    CHECK_THROWS_AS(attn_swap(q, k, v), dual_shape_error);
}

TEST_CASE("masked_attn_swap: endpoint masks reproduce both paths bitwise") {
    SeededRng rng(37);
    const Mat f = gaussian_mat(rng, 6, 4);
    const AttentionWeights w = seeded_weights(rng, 4, 4, 4);
    const AttentionResult self = self_attention(f, w, true);
    const Mat k_donor = gaussian_mat(rng, 6, 4);
    const Mat v_donor = gaussian_mat(rng, 6, 4);

    const SwapResult all_swap = masked_attn_swap(self.record.q, self.record.k, self.record.v,
                                                 k_donor, v_donor, Vec::Ones(6));
    CHECK(all_swap.output == attn_swap(self.record.q, k_donor, v_donor).output);

    const SwapResult none = masked_attn_swap(self.record.q, self.record.k, self.record.v, k_donor,
                                             v_donor, Vec::Zero(6));
    CHECK(none.output == self.output);
}

TEST_CASE("masked_attn_swap: rows assemble from the two endpoints") {
    SeededRng rng(41);
    const Mat q = gaussian_mat(rng, 2, 3);
    const Mat k = gaussian_mat(rng, 2, 3);
    const Mat v = gaussian_mat(rng, 2, 3);
    const Mat kd = gaussian_mat(rng, 2, 3);
    const Mat vd = gaussian_mat(rng, 2, 3);
    Vec mask(2);
    mask << 1, 0;
    const SwapResult r = masked_attn_swap(q, k, v, kd, vd, mask);
    CHECK(r.output.row(0) == attn_swap(q, kd, vd).output.row(0));
    CHECK(r.output.row(1) == scaled_dot_attention(q, k, v).output.row(1));
}

TEST_CASE("masked_attn_swap: row-wise exactness for random binary masks") {
    SeededRng rng(43);
    for (int trial = 0; trial < 50; ++trial) {
        const Index l = 1 + static_cast<Index>(rng.next_u64() % 8);
        const Index d = 1 + static_cast<Index>(rng.next_u64() % 6);
        const Mat q = gaussian_mat(rng, l, d), k = gaussian_mat(rng, l, d),
                  v = gaussian_mat(rng, l, d), kd = gaussian_mat(rng, l, d),
                  vd = gaussian_mat(rng, l, d);
        Vec mask(l);
        for (Index i = 0; i < l; ++i)
            mask(i) = static_cast<double>(rng.next_u64() % 2);
        const SwapResult got = masked_attn_swap(q, k, v, kd, vd, mask);
        const SwapResult swapped = attn_swap(q, kd, vd);
        const SwapResult standard = scaled_dot_attention(q, k, v);
        for (Index i = 0; i < l; ++i) {
            if (mask(i) == 1.0)
                CHECK(got.output.row(i) == swapped.output.row(i));
            else
                CHECK(got.output.row(i) == standard.output.row(i));
        }
        CHECK(got.output.rows() == l);
        CHECK(got.output.cols() == d);
    }
}

TEST_CASE("masked_attn_swap: non-binary masks rejected") {
    SeededRng rng(47);
    const Mat m = gaussian_mat(rng, 2, 2);
    Vec mask(2);
    mask << 0.5, 1.0;
    CHECK_THROWS_AS(masked_attn_swap(m, m, m, m, m, mask), mask_error);
    Vec short_mask(1);
    short_mask << 1.0;
    CHECK_THROWS_AS(masked_attn_swap(m, m, m, m, m, short_mask), mask_error);
}

TEST_CASE("attention maps are row-stochastic within 1e-9") {
    SeededRng rng(53);
    for (int trial = 0; trial < 100; ++trial) {
        const Index l = 1 + static_cast<Index>(rng.next_u64() % 12);
        const Index h = 2 + static_cast<Index>(rng.next_u64() % 6);
        const Index d = 1 + static_cast<Index>(rng.next_u64() % 6);
        const Mat f = gaussian_mat(rng, l, h);
        const AttentionWeights w = seeded_weights(rng, h, h, d);
        const AttentionResult r = self_attention(f, w);
        for (Index i = 0; i < l; ++i)
            CHECK(std::abs(r.record.map.row(i).sum() - 1.0) <= 1e-9);
    }
}
