#include "harmonize/orchestration.hpp"

#include <cmath>

namespace harmonize {

const std::set<TokenRole>& default_excluded_roles() {
    static const std::set<TokenRole> roles = {TokenRole::Subject, TokenRole::ClassName,
                                              TokenRole::Article, TokenRole::Padding,
                                              TokenRole::Special};
    return roles;
}

OrthogonalBasis build_basis(const TextEmbedding& t, const std::set<TokenRole>& excluded_roles,
                            double eps_drop) {
    if (t.feature_dim() < 1)
        throw parameter_error("build_basis: h_c must be >= 1");
    if (!(eps_drop > 0.0))
        throw parameter_error("build_basis: eps_drop must be > 0");

    OrthogonalBasis basis;
    basis.dim = t.feature_dim();

    std::vector<Vec> rows;
    for (Index j = 0; j < t.count(); ++j) {
        if (excluded_roles.count(t.roles[static_cast<std::size_t>(j)]) > 0) {
            basis.excluded_indices.push_back(j);
            continue;
        }
        const Vec token = t.vectors.row(j).transpose();
        const double token_norm = token.norm();
        Vec r = token;
        for (const Vec& b : rows)
            r -= b.dot(r) * b;
        if (token_norm == 0.0 || r.norm() < eps_drop * token_norm) {
            basis.dropped_indices.push_back(j);
            continue;
        }
        // Second sweep ("twice is enough") keeps pairwise dots at machine
        // precision even for ill-conditioned prompts.
        for (const Vec& b : rows)
            r -= b.dot(r) * b;
        rows.push_back(r / r.norm());
        basis.source_indices.push_back(j);
    }

    basis.vectors.resize(static_cast<Index>(rows.size()), basis.dim);
    for (std::size_t i = 0; i < rows.size(); ++i)
        basis.vectors.row(static_cast<Index>(i)) = rows[i].transpose();
    return basis;
}

Decomposition orthogonalize(const Vec& v, const OrthogonalBasis& basis) {
    if (basis.dim > 0 && v.size() != basis.dim)
        throw dimension_error("orthogonalize: vector length " + std::to_string(v.size()) +
                              " vs basis dim " + std::to_string(basis.dim));
    Decomposition d;
    d.parallel = Vec::Zero(v.size());
    for (Index i = 0; i < basis.size(); ++i) {
        const Vec b = basis.vectors.row(i).transpose();
        d.parallel += b.dot(v) * b;
    }
    d.orthogonal = v - d.parallel;
    d.collapsed = d.orthogonal.norm() < 1e-6 * v.norm();
    return d;
}

OrchestratedContext orchestrate(const ContextualEmbedding& c, const OrthogonalBasis& basis) {
    if (c.mode != ContextMode::Full)
        throw mode_error("orchestrate: context must be in Full mode");

    OrchestratedContext out;
    out.context = c;
    for (Index i = 0; i < c.length(); ++i) {
        if (c.slots[static_cast<std::size_t>(i)].origin != SlotOrigin::Visual)
            continue;
        const Decomposition d = orthogonalize(c.rows.row(i).transpose(), basis);
        out.context.rows.row(i) = d.orthogonal.transpose();
        if (d.collapsed)
            out.collapsed_rows.push_back(i);
    }
    return out;
}

}  // namespace harmonize
