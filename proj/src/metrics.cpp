#include "harmonize/metrics.hpp"

#include <cmath>
#include <cstdio>

namespace harmonize {

namespace {

void check_mask(const Mat& image, const Mat& mask, const char* side) {
    if (image.rows() != mask.rows() || image.cols() != mask.cols())
        throw dimension_error(std::string("masked_similarity: ") + side + " image " +
                              shape_str(image) + " vs mask " + shape_str(mask));
    for (Index i = 0; i < mask.rows(); ++i)
        for (Index j = 0; j < mask.cols(); ++j)
            if (mask(i, j) != 0.0 && mask(i, j) != 1.0)
                throw mask_error(std::string("masked_similarity: ") + side + " mask not binary");
}

}  // namespace

Vec HistogramExtractor::extract(const Mat& image, const Mat& mask) const {
    Vec hist = Vec::Zero(bins_);
    double lo = 0.0, hi = 0.0;
    Index count = 0;
    for (Index i = 0; i < image.rows(); ++i)
        for (Index j = 0; j < image.cols(); ++j) {
            if (mask(i, j) != 1.0)
                continue;
            const double v = image(i, j);
            if (count == 0) {
                lo = hi = v;
            } else {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            ++count;
        }
    if (count == 0)
        return hist;  // empty mask -> zero feature

    for (Index i = 0; i < image.rows(); ++i)
        for (Index j = 0; j < image.cols(); ++j) {
            if (mask(i, j) != 1.0)
                continue;
            Index bin = 0;
            if (hi > lo)
                bin = std::min<Index>(bins_ - 1, static_cast<Index>(std::floor(
                                                     (image(i, j) - lo) / (hi - lo) * bins_)));
            hist(bin) += 1.0;
        }
    return hist / hist.norm();
}

SimilarityScore masked_similarity(const MaskedPair& pair, const FeatureExtractor& fx) {
    check_mask(pair.reference_image, pair.reference_mask, "reference");
    check_mask(pair.generated_image, pair.generated_mask, "generated");

    const Mat ref = pair.reference_image.cwiseProduct(pair.reference_mask);
    const Mat gen = pair.generated_image.cwiseProduct(pair.generated_mask);
    const Vec a = fx.extract(ref, pair.reference_mask);
    const Vec b = fx.extract(gen, pair.generated_mask);

    const double na2 = a.dot(a);
    const double nb2 = b.dot(b);
    if (na2 == 0.0 || nb2 == 0.0)
        return SimilarityScore{0.0, true};
    // sqrt(s*s) == s in IEEE double, so self-similarity is exactly 1.
    const double cosine = a.dot(b) / std::sqrt(na2 * nb2);
    return SimilarityScore{std::clamp(cosine, -1.0, 1.0), false};
}

std::string AblationReport::to_csv() const {
    std::string csv = "variant,masked_sim,unmasked_sim,mask_coverage\n";
    char line[256];
    for (const VariantMetrics& row : rows) {
        std::snprintf(line, sizeof(line), "%s,%.17g,%.17g,%.17g\n", row.variant.c_str(),
                      row.masked_sim, row.unmasked_sim, row.mask_coverage);
        csv += line;
    }
    return csv;
}

AblationReport ablation_report(const std::vector<VariantOutput>& variants,
                               const Mat& reference_image, const Mat& reference_mask,
                               const FeatureExtractor& fx) {
    static const char* expected[] = {"baseline", "orchestration", "swap", "ours"};
    if (variants.size() != 4)
        throw report_error("ablation_report: expected 4 variants, got " +
                           std::to_string(variants.size()));
    for (std::size_t i = 0; i < 4; ++i)
        if (variants[i].label != expected[i])
            throw report_error("ablation_report: variant " + std::to_string(i) + " is '" +
                               variants[i].label + "', expected '" + expected[i] + "'");

    AblationReport report;
    for (const VariantOutput& v : variants) {
        MaskedPair masked{reference_image, reference_mask, v.image, v.mask};
        MaskedPair unmasked{reference_image, Mat::Ones(reference_image.rows(), reference_image.cols()),
                            v.image, Mat::Ones(v.image.rows(), v.image.cols())};
        VariantMetrics row;
        row.variant = v.label;
        row.masked_sim = masked_similarity(masked, fx).value;
        row.unmasked_sim = masked_similarity(unmasked, fx).value;
        row.mask_coverage = v.mask.size() > 0 ? v.mask.sum() / static_cast<double>(v.mask.size()) : 0.0;
        report.rows.push_back(std::move(row));
    }
    return report;
}

}  // namespace harmonize
