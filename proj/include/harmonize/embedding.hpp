#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "harmonize/numerics.hpp"

namespace harmonize {

// ============================================================================
//  Token roles
// ============================================================================

enum class TokenRole { Subject, ClassName, Article, Padding, Special, Regular };

const char* to_string(TokenRole role);
std::optional<TokenRole> role_from_string(const std::string& name);

struct PromptToken {
    std::uint64_t id = 0;
    TokenRole role = TokenRole::Regular;
};

// ============================================================================
//  Embeddings
// ============================================================================

// Ordered textual tokens: vectors row j belongs to token j. At most one token
// carries the Subject role.
struct TextEmbedding {
    std::vector<std::uint64_t> ids;
    std::vector<TokenRole> roles;
    Mat vectors;  // [N, h_c]

    Index count() const { return vectors.rows(); }
    Index feature_dim() const { return vectors.cols(); }
};

struct VisualEmbedding {
    Mat vectors;  // [M, h_c]

    Index count() const { return vectors.rows(); }
    Index feature_dim() const { return vectors.cols(); }
};

// Validating constructors for hand-built embeddings.
TextEmbedding make_text_embedding(Mat vectors, std::vector<TokenRole> roles,
                                  std::vector<std::uint64_t> ids = {});
VisualEmbedding make_visual_embedding(Mat vectors);

// ============================================================================
//  Contextual embedding c = [v; t]
// ============================================================================

enum class ContextMode { Full, VisualOnly, TextualOnly };

enum class SlotOrigin { Visual, Textual };

// Per-row provenance: which source token produced this context row.
struct SlotRef {
    SlotOrigin origin = SlotOrigin::Visual;
    Index index = 0;                      // token index within its embedding
    std::optional<TokenRole> role;        // populated for textual rows
};

struct ContextualEmbedding {
    ContextMode mode = ContextMode::Full;
    Mat rows;                    // [l_c, h_c], visual rows first in Full mode
    std::vector<SlotRef> slots;  // one entry per row

    Index length() const { return rows.rows(); }
    Index feature_dim() const { return rows.cols(); }
};

// Deterministic toy text encoder: the vector for token id k is drawn from a
// SeededRng seeded with mix_seed(seed, k) and scaled by 1/sqrt(h_c). The same
// (seed, id) always yields the same vector, regardless of position or role.
TextEmbedding encode_text(const std::vector<PromptToken>& tokens, Index h_c,
                          std::uint64_t seed, std::uint64_t vocab_bound = 65536);

// Toy visual mapper: the image is cut into `strips` equal horizontal strips,
// each strip is average-pooled onto a 4x4 cell grid (16 values), and the
// descriptor is mapped to h_c dims by a seeded linear map with weights drawn
// gaussian * 1/4. Linear in the image by construction.
VisualEmbedding encode_visual(const Mat& image, Index strips, Index h_c, std::uint64_t seed);

// Concatenates the operands the mode asks for; absent operands are omitted
// entirely (the sequence is shorter), never zero-padded.
ContextualEmbedding compose_context(const VisualEmbedding* v, const TextEmbedding* t,
                                    ContextMode mode);

// Context rows whose source token carries one of `roles` (textual rows only).
std::vector<Index> slots_with_roles(const ContextualEmbedding& c,
                                    const std::vector<TokenRole>& roles);

}  // namespace harmonize
