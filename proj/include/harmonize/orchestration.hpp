#pragma once

#include <set>
#include <vector>

#include "harmonize/embedding.hpp"
#include "harmonize/numerics.hpp"

namespace harmonize {

// Roles that never contribute to the textual subspace: the subject
// pseudo-token and its class name, articles, padding and special tokens.
const std::set<TokenRole>& default_excluded_roles();

// Orthonormal basis of the included textual tokens' span. Pairwise dot
// products stay below 1e-10 in magnitude and every vector has unit norm.
struct OrthogonalBasis {
    Mat vectors;                          // [B, h_c], rows are basis vectors
    Index dim = 0;                        // h_c, kept even when the basis is empty
    std::vector<Index> source_indices;    // textual token behind each basis row
    std::vector<Index> excluded_indices;  // tokens removed by role
    std::vector<Index> dropped_indices;   // tokens removed as numerically dependent

    Index size() const { return vectors.rows(); }
    bool empty() const { return vectors.rows() == 0; }
};

// v split into the component inside the textual subspace and the component
// perpendicular to it; orthogonal + parallel reconstructs v.
struct Decomposition {
    Vec orthogonal;          // v_perp
    Vec parallel;            // v_par
    bool collapsed = false;  // |v_perp| < 1e-6 * |v|; value still returned unmodified
};

// Gram-Schmidt over the included tokens in prompt order. A token whose
// residual norm after projection onto the partial basis falls below
// eps_drop * (its own norm) is recorded as dropped; survivors get one
// reorthogonalization sweep before normalization.
OrthogonalBasis build_basis(const TextEmbedding& t,
                            const std::set<TokenRole>& excluded_roles = default_excluded_roles(),
                            double eps_drop = 1e-10);

// parallel = sum_j <t_j, v> t_j over the basis rows; orthogonal = v - parallel.
Decomposition orthogonalize(const Vec& v, const OrthogonalBasis& basis);

struct OrchestratedContext {
    ContextualEmbedding context;
    std::vector<Index> collapsed_rows;  // visual rows that fell inside the textual span
};

// Replaces every visual row of a Full-mode context by its orthogonal
// component; textual rows and the slot map are untouched.
OrchestratedContext orchestrate(const ContextualEmbedding& c, const OrthogonalBasis& basis);

}  // namespace harmonize
