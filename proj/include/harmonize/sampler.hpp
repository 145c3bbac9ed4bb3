#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "harmonize/denoiser.hpp"
#include "harmonize/masking.hpp"
#include "harmonize/orchestration.hpp"
#include "harmonize/scheduler.hpp"

namespace harmonize {

// ============================================================================
//  Run configuration
// ============================================================================

// Executed denoising steps count 1..T from z_T down to z_0; swapping is
// active from `start_step` on. start_step = T+1 disables swapping entirely.
struct SwapWindow {
    int start_step = 21;
    std::vector<int> decoder_layers = {3, 4, 5};  // decoder-relative block indices
};

struct OrchestrationOptions {
    bool enabled = true;
    std::set<TokenRole> excluded_roles = default_excluded_roles();
    double eps_drop = 1e-10;
};

struct MaskOptions {
    double threshold = 0.5;
    std::vector<TokenRole> roles = {TokenRole::Subject};  // slots feeding the mask
};

struct DualRunConfig {
    std::uint64_t seed = 0;
    Index grid_h = 16, grid_w = 16;
    SchedulerConfig scheduler = SchedulerConfig::linear();
    SwapWindow swap_window;
    OrchestrationOptions orchestration;
    bool swap_enabled = true;
    MaskOptions mask;
    bool shared_initial_noise = true;

    // Test seam: replaces the derived mask grid for a given executed step.
    std::function<std::optional<Mat>(int executed_step)> mask_override;
};

// Throws config_error if the window or layer set does not fit the model.
void validate_run_config(const DualRunConfig& cfg, const DenoiserConfig& model);

struct RunOptions {
    bool retain_records = true;
    std::function<void(const AttentionRecord&)> observer;  // every record, as produced
};

struct RunResult {
    LatentState z0;
    Mat initial_noise;                           // z_T features [l, h]
    std::vector<AttentionRecord> records;        // main process (when retained)
    std::vector<AttentionRecord> donor_records;  // visual-only process (dual runs)
    std::vector<SubjectMask> step_masks;         // one per executed swap step
    SubjectMask final_mask;
    Mat heatmap;                                 // [H, W] subject saliency over the whole run
    std::vector<std::string> warnings;
};

// ============================================================================
//  Sampling
// ============================================================================

// Initial z_T draw; shared across processes and ablation variants.
Mat initial_noise(std::uint64_t seed, Index pixels, Index h);

// One denoising trajectory guided by c.
RunResult run_single(const ToyDenoiser& model, const ContextualEmbedding& c,
                     const DualRunConfig& cfg, const RunOptions& opts = {});

// Two lockstep trajectories: per step, the visual-only donor pass runs first
// and its K'/V' at the swap layers are injected into the main pass through
// masked_attn_swap. The mask comes from the main pass's cross-attention
// records of the previous executed step.
RunResult run_dual(const ToyDenoiser& model, const ContextualEmbedding& c_main,
                   const ContextualEmbedding& c_visual, const DualRunConfig& cfg,
                   const RunOptions& opts = {});

// ============================================================================
//  Ablation driver
// ============================================================================

extern const std::array<const char*, 4> kVariantLabels;  // baseline, orchestration, swap, ours

struct VariantResult {
    std::string label;
    RunResult result;
};

// One ablation row by label; all rows share the same z_T.
VariantResult run_variant(const ToyDenoiser& model, const VisualEmbedding& v,
                          const TextEmbedding& t, const DualRunConfig& cfg,
                          const std::string& label, const RunOptions& opts = {});

// All four rows in table order:
//   baseline       run_single on the unorchestrated full context
//   orchestration  run_single on the orthogonalized context
//   swap           run_dual with the unorchestrated main context
//   ours           run_dual with the orthogonalized main context
std::vector<VariantResult> run_ablation(const ToyDenoiser& model, const VisualEmbedding& v,
                                        const TextEmbedding& t, const DualRunConfig& cfg,
                                        const RunOptions& opts = {});

}  // namespace harmonize
