#pragma once

#include <memory>
#include <string>
#include <vector>

#include "harmonize/numerics.hpp"

namespace harmonize {

// ============================================================================
//  Feature extraction
// ============================================================================

class FeatureExtractor {
public:
    virtual ~FeatureExtractor() = default;
    // `image` arrives with unmasked pixels already zeroed; `mask` marks the
    // region of interest. Returns a unit-norm feature (or zero for an empty
    // mask).
    virtual Vec extract(const Mat& image, const Mat& mask) const = 0;
};

// 64-bin intensity histogram of the masked region, binned over the region's
// own [min, max] range, L2-normalized.
class HistogramExtractor final : public FeatureExtractor {
public:
    explicit HistogramExtractor(int bins = 64) : bins_(bins) {}
    Vec extract(const Mat& image, const Mat& mask) const override;

private:
    int bins_;
};

// ============================================================================
//  Masked image-alignment scoring
// ============================================================================

struct MaskedPair {
    Mat reference_image, reference_mask;
    Mat generated_image, generated_mask;
};

struct SimilarityScore {
    double value = 0.0;
    bool empty_mask = false;  // one side had no masked pixels; value forced to 0
};

// Zeroes unmasked pixels on both sides, extracts features, returns their
// cosine similarity in [-1, 1].
SimilarityScore masked_similarity(const MaskedPair& pair, const FeatureExtractor& fx);

// ============================================================================
//  Ablation report
// ============================================================================

struct VariantOutput {
    std::string label;
    Mat image;  // generated, single channel
    Mat mask;   // generated subject mask, binary
};

struct VariantMetrics {
    std::string variant;
    double masked_sim = 0.0;
    double unmasked_sim = 0.0;
    double mask_coverage = 0.0;
};

struct AblationReport {
    std::vector<VariantMetrics> rows;  // fixed table order
    std::string to_csv() const;        // header + one row per variant
};

// Expects exactly the four variants in table order
// (baseline, orchestration, swap, ours).
AblationReport ablation_report(const std::vector<VariantOutput>& variants,
                               const Mat& reference_image, const Mat& reference_mask,
                               const FeatureExtractor& fx);

}  // namespace harmonize
