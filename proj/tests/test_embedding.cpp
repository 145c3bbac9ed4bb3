#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "harmonize/embedding.hpp"

using namespace harmonize;

TEST_CASE("encode_text: same token id twice yields identical vectors") {
    const std::vector<PromptToken> tokens = {{17, TokenRole::Regular}, {3, TokenRole::Article},
                                             {17, TokenRole::Regular}};
    const TextEmbedding t = encode_text(tokens, 12, 9);
    CHECK(t.vectors.row(0) == t.vectors.row(2));
    CHECK(t.vectors.row(0) != t.vectors.row(1));
}

TEST_CASE("encode_text: different seeds decorrelate") {
    const std::vector<PromptToken> tokens = {{5, TokenRole::Regular}};
    const TextEmbedding a = encode_text(tokens, 16, 1);
    const TextEmbedding b = encode_text(tokens, 16, 2);
    CHECK(a.vectors != b.vectors);
}

TEST_CASE("encode_text: id 0, seed 42 reproduces the pinned stream") {
    const TextEmbedding t = encode_text({{0, TokenRole::Regular}}, 8, 42);
    SeededRng rng(mix_seed(42, 0));
    const double scale = 1.0 / std::sqrt(8.0);
    for (Index j = 0; j < 8; ++j)
        CHECK(t.vectors(0, j) == scale * rng.gaussian());
}

TEST_CASE("encode_text: error paths") {
    CHECK_THROWS_AS(encode_text({}, 8, 0), empty_input_error);
    CHECK_THROWS_AS(encode_text({{70000, TokenRole::Regular}}, 8, 0), parameter_error);
    CHECK_NOTHROW(encode_text({{70000, TokenRole::Regular}}, 8, 0, 1 << 20));
    CHECK_THROWS_AS(encode_text({{1, TokenRole::Subject}, {2, TokenRole::Subject}}, 8, 0),
                    parameter_error);
}

TEST_CASE("encode_visual: constant-zero image maps to zero tokens") {
    const Mat image = Mat::Zero(8, 8);
    const VisualEmbedding v = encode_visual(image, 4, 16, 7);
    CHECK(v.count() == 4);
    CHECK(v.vectors == Mat::Zero(4, 16));
}

TEST_CASE("encode_visual: linear in the image") {
    SeededRng rng(11);
    const Mat image = gaussian_mat(rng, 8, 6);
    const VisualEmbedding one = encode_visual(image, 4, 10, 3);
    const VisualEmbedding two = encode_visual(2.0 * image, 4, 10, 3);
    CHECK(two.vectors == 2.0 * one.vectors);
}

TEST_CASE("encode_visual: checkerboard matches a straight-line reimplementation") {
    Mat image(8, 8);
    for (Index i = 0; i < 8; ++i)
        for (Index j = 0; j < 8; ++j)
            image(i, j) = static_cast<double>((i + j) % 2);
    const Index h_c = 6;
    const VisualEmbedding got = encode_visual(image, 4, h_c, 7);

    // Straight-line oracle: 2x8 strips pooled onto 4x4 cells, then the
    // seeded 16 -> h_c map.
    SeededRng rng(mix_seed(7, 0x76697375616Cull));
    Mat mapper(h_c, 16);
    for (Index i = 0; i < h_c; ++i)
        for (Index j = 0; j < 16; ++j)
            mapper(i, j) = 0.25 * rng.gaussian();
    for (Index s = 0; s < 4; ++s) {
        double desc[16] = {0};
        int cnt[16] = {0};
        for (Index r = 0; r < 2; ++r)
            for (Index c = 0; c < 8; ++c) {
                const Index cell = (r * 4 / 2) * 4 + c * 4 / 8;
                desc[cell] += image(s * 2 + r, c);
                cnt[cell] += 1;
            }
        for (int k = 0; k < 16; ++k)
            desc[k] = cnt[k] > 0 ? desc[k] / cnt[k] : 0.0;
        for (Index i = 0; i < h_c; ++i) {
            double acc = 0.0;
            for (int k = 0; k < 16; ++k)
                acc += mapper(i, k) * desc[k];
            CHECK(got.vectors(s, i) == acc);
        }
    }
}

TEST_CASE("encode_visual: non-divisible strip count rejected") {
    const Mat image = Mat::Zero(9, 4);
    CHECK_THROWS_AS(encode_visual(image, 4, 8, 0), dimension_error);
}

TEST_CASE("compose_context: full mode keeps visual rows first") {
    SeededRng rng(23);
    const VisualEmbedding v = make_visual_embedding(gaussian_mat(rng, 4, 8));
    const TextEmbedding t = make_text_embedding(
        gaussian_mat(rng, 6, 8),
        {TokenRole::Article, TokenRole::Subject, TokenRole::ClassName, TokenRole::Regular,
         TokenRole::Regular, TokenRole::Padding});

    const ContextualEmbedding c = compose_context(&v, &t, ContextMode::Full);
    REQUIRE(c.length() == 10);
    CHECK(c.rows.topRows(4) == v.vectors);
    CHECK(c.rows.bottomRows(6) == t.vectors);
    for (Index i = 0; i < 4; ++i) {
        CHECK(c.slots[i].origin == SlotOrigin::Visual);
        CHECK(c.slots[i].index == i);
        CHECK_FALSE(c.slots[i].role.has_value());
    }
    for (Index j = 0; j < 6; ++j) {
        CHECK(c.slots[4 + j].origin == SlotOrigin::Textual);
        CHECK(c.slots[4 + j].index == j);
        CHECK(c.slots[4 + j].role == t.roles[j]);
    }
}

TEST_CASE("compose_context: visual-only and textual-only omit the other operand") {
    SeededRng rng(29);
    const VisualEmbedding v = make_visual_embedding(gaussian_mat(rng, 4, 8));
    const TextEmbedding t = make_text_embedding(gaussian_mat(rng, 6, 8),
                                                std::vector<TokenRole>(6, TokenRole::Regular));

    const ContextualEmbedding cv = compose_context(&v, nullptr, ContextMode::VisualOnly);
    CHECK(cv.length() == 4);
    CHECK(cv.rows == v.vectors);

    const ContextualEmbedding ct = compose_context(nullptr, &t, ContextMode::TextualOnly);
    CHECK(ct.length() == 6);
    CHECK(ct.rows == t.vectors);
}

TEST_CASE("compose_context: missing operands rejected") {
    SeededRng rng(31);
    const VisualEmbedding v = make_visual_embedding(gaussian_mat(rng, 2, 4));
    CHECK_THROWS_AS(compose_context(&v, nullptr, ContextMode::Full), mode_error);
    CHECK_THROWS_AS(compose_context(nullptr, nullptr, ContextMode::VisualOnly), mode_error);
    CHECK_THROWS_AS(compose_context(&v, nullptr, ContextMode::TextualOnly), mode_error);
}

TEST_CASE("slots_with_roles finds the subject column") {
    SeededRng rng(37);
    const VisualEmbedding v = make_visual_embedding(gaussian_mat(rng, 3, 4));
    const TextEmbedding t = make_text_embedding(
        gaussian_mat(rng, 3, 4), {TokenRole::Article, TokenRole::Subject, TokenRole::Regular});
    const ContextualEmbedding c = compose_context(&v, &t, ContextMode::Full);
    const auto slots = slots_with_roles(c, {TokenRole::Subject});
    REQUIRE(slots.size() == 1);
    CHECK(slots[0] == 4);  // 3 visual rows, then article, then subject
}

TEST_CASE("make_text_embedding enforces invariants") {
    CHECK_THROWS_AS(make_text_embedding(Mat::Zero(2, 4), {TokenRole::Regular}), dimension_error);
    Mat bad = Mat::Zero(1, 2);
    bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(make_text_embedding(bad, {TokenRole::Regular}), parameter_error);
}
