#include "harmonize/embedding.hpp"

#include <algorithm>
#include <cmath>

namespace harmonize {

namespace {

// Stream tag for the visual mapper weights; above any valid token id.
constexpr std::uint64_t kVisualMapperStream = 0x76697375616Cull;  // "visual"

constexpr Index kDescriptorCells = 16;  // 4x4 per strip

}  // namespace

const char* to_string(TokenRole role) {
    switch (role) {
        case TokenRole::Subject: return "subject";
        case TokenRole::ClassName: return "class_name";
        case TokenRole::Article: return "article";
        case TokenRole::Padding: return "padding";
        case TokenRole::Special: return "special";
        case TokenRole::Regular: return "regular";
    }
    return "regular";
}

std::optional<TokenRole> role_from_string(const std::string& name) {
    if (name == "subject") return TokenRole::Subject;
    if (name == "class_name") return TokenRole::ClassName;
    if (name == "article") return TokenRole::Article;
    if (name == "padding") return TokenRole::Padding;
    if (name == "special") return TokenRole::Special;
    if (name == "regular") return TokenRole::Regular;
    return std::nullopt;
}

TextEmbedding make_text_embedding(Mat vectors, std::vector<TokenRole> roles,
                                  std::vector<std::uint64_t> ids) {
    if (static_cast<Index>(roles.size()) != vectors.rows())
        throw dimension_error("text embedding: " + std::to_string(roles.size()) + " roles for " +
                              std::to_string(vectors.rows()) + " vectors");
    if (ids.empty())
        ids.resize(roles.size(), 0);
    if (ids.size() != roles.size())
        throw dimension_error("text embedding: id/role count mismatch");
    const auto subjects = std::count(roles.begin(), roles.end(), TokenRole::Subject);
    if (subjects > 1)
        throw parameter_error("text embedding: more than one Subject token");
    ensure_finite(vectors, "text embedding");
    return TextEmbedding{std::move(ids), std::move(roles), std::move(vectors)};
}

VisualEmbedding make_visual_embedding(Mat vectors) {
    if (vectors.rows() < 1)
        throw empty_input_error("visual embedding: no tokens");
    ensure_finite(vectors, "visual embedding");
    return VisualEmbedding{std::move(vectors)};
}

TextEmbedding encode_text(const std::vector<PromptToken>& tokens, Index h_c,
                          std::uint64_t seed, std::uint64_t vocab_bound) {
    if (tokens.empty())
        throw empty_input_error("encode_text: empty token list");
    if (h_c < 1)
        throw parameter_error("encode_text: h_c must be >= 1");

    Mat vectors(static_cast<Index>(tokens.size()), h_c);
    std::vector<TokenRole> roles;
    std::vector<std::uint64_t> ids;
    roles.reserve(tokens.size());
    ids.reserve(tokens.size());

    const double scale = 1.0 / std::sqrt(static_cast<double>(h_c));
    for (std::size_t p = 0; p < tokens.size(); ++p) {
        if (tokens[p].id >= vocab_bound)
            throw parameter_error("encode_text: token id " + std::to_string(tokens[p].id) +
                                  " outside vocabulary bound " + std::to_string(vocab_bound));
        SeededRng rng(mix_seed(seed, tokens[p].id));
        for (Index j = 0; j < h_c; ++j)
            vectors(static_cast<Index>(p), j) = scale * rng.gaussian();
        roles.push_back(tokens[p].role);
        ids.push_back(tokens[p].id);
    }
    return make_text_embedding(std::move(vectors), std::move(roles), std::move(ids));
}

VisualEmbedding encode_visual(const Mat& image, Index strips, Index h_c, std::uint64_t seed) {
    if (strips < 1)
        throw parameter_error("encode_visual: strip count must be >= 1");
    if (h_c < 1)
        throw parameter_error("encode_visual: h_c must be >= 1");
    if (image.rows() < 1 || image.cols() < 1)
        throw empty_input_error("encode_visual: empty image");
    if (image.rows() % strips != 0)
        throw dimension_error("encode_visual: image height " + std::to_string(image.rows()) +
                              " not divisible into " + std::to_string(strips) + " strips");
    ensure_finite(image, "encode_visual image");

    SeededRng rng(mix_seed(seed, kVisualMapperStream));
    const Mat mapper = gaussian_mat(rng, h_c, kDescriptorCells, 0.25);  // [h_c, 16]

    const Index strip_h = image.rows() / strips;
    const Index w = image.cols();
    Mat tokens = Mat::Zero(strips, h_c);
    for (Index s = 0; s < strips; ++s) {
        // Average-pool the strip onto a 4x4 cell grid; cells that receive no
        // pixels (strip smaller than 4 in a dimension) stay zero.
        double sum[kDescriptorCells] = {0};
        Index cnt[kDescriptorCells] = {0};
        for (Index r = 0; r < strip_h; ++r) {
            const Index cr = r * 4 / strip_h;
            for (Index c = 0; c < w; ++c) {
                const Index cc = c * 4 / w;
                sum[cr * 4 + cc] += image(s * strip_h + r, c);
                cnt[cr * 4 + cc] += 1;
            }
        }
        Vec descriptor(kDescriptorCells);
        for (Index k = 0; k < kDescriptorCells; ++k)
            descriptor(k) = cnt[k] > 0 ? sum[k] / static_cast<double>(cnt[k]) : 0.0;
        for (Index i = 0; i < h_c; ++i) {
            double acc = 0.0;
            for (Index k = 0; k < kDescriptorCells; ++k)
                acc += mapper(i, k) * descriptor(k);
            tokens(s, i) = acc;
        }
    }
    return VisualEmbedding{std::move(tokens)};
}

ContextualEmbedding compose_context(const VisualEmbedding* v, const TextEmbedding* t,
                                    ContextMode mode) {
    const bool need_v = mode == ContextMode::Full || mode == ContextMode::VisualOnly;
    const bool need_t = mode == ContextMode::Full || mode == ContextMode::TextualOnly;
    if (need_v && v == nullptr)
        throw mode_error("compose_context: mode requires a visual embedding");
    if (need_t && t == nullptr)
        throw mode_error("compose_context: mode requires a textual embedding");
    if (need_v && need_t && v->feature_dim() != t->feature_dim())
        throw dimension_error("compose_context: h_c mismatch, visual " +
                              std::to_string(v->feature_dim()) + " vs textual " +
                              std::to_string(t->feature_dim()));

    const Index m = need_v ? v->count() : 0;
    const Index n = need_t ? t->count() : 0;
    const Index h_c = need_v ? v->feature_dim() : t->feature_dim();

    ContextualEmbedding c;
    c.mode = mode;
    c.rows.resize(m + n, h_c);
    c.slots.reserve(static_cast<std::size_t>(m + n));
    for (Index i = 0; i < m; ++i) {
        c.rows.row(i) = v->vectors.row(i);
        c.slots.push_back(SlotRef{SlotOrigin::Visual, i, std::nullopt});
    }
    for (Index j = 0; j < n; ++j) {
        c.rows.row(m + j) = t->vectors.row(j);
        c.slots.push_back(SlotRef{SlotOrigin::Textual, j, t->roles[static_cast<std::size_t>(j)]});
    }
    return c;
}

std::vector<Index> slots_with_roles(const ContextualEmbedding& c,
                                    const std::vector<TokenRole>& roles) {
    std::vector<Index> out;
    for (std::size_t i = 0; i < c.slots.size(); ++i) {
        const auto& slot = c.slots[i];
        if (slot.origin != SlotOrigin::Textual || !slot.role.has_value())
            continue;
        if (std::find(roles.begin(), roles.end(), *slot.role) != roles.end())
            out.push_back(static_cast<Index>(i));
    }
    return out;
}

}  // namespace harmonize
