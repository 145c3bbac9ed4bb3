#pragma once

#include <functional>
#include <vector>

#include "harmonize/attention.hpp"
#include "harmonize/embedding.hpp"
#include "harmonize/latent.hpp"
#include "harmonize/scheduler.hpp"

namespace harmonize {

// ============================================================================
//  Model definition
// ============================================================================

enum class BlockStage { Encoder, Middle, Decoder };

// One transformer block: residual self-attention, residual cross-attention
// against the contextual embedding, residual two-layer feedforward.
struct DenoiserBlock {
    int id = 0;
    BlockStage stage = BlockStage::Encoder;
    AttentionWeights self_attn;
    AttentionWeights cross_attn;
    Mat self_out;   // [d, h]
    Mat cross_out;  // [d, h]
    Mat ff1;        // [h, 2h]
    Mat ff2;        // [2h, h]
};

struct DenoiserConfig {
    Index h = 32;    // spatial feature dim
    Index h_c = 32;  // context feature dim
    Index d = 32;    // key/query/value dim
    int encoder_blocks = 4;
    int middle_blocks = 1;
    int decoder_blocks = 6;

    int block_count() const { return encoder_blocks + middle_blocks + decoder_blocks; }
    // Global block id of decoder-relative index i.
    int decoder_block_id(int i) const { return encoder_blocks + middle_blocks + i; }
    void validate() const;
};

// Sinusoidal embedding of the step index, dimension `dim` (must be even).
Vec timestep_embedding(int tau, Index dim);

struct ForwardOptions {
    // Recipient role: replace self-attention by masked_attn_swap at the
    // buffer's layers. The buffer's step tag must match the current tau.
    const SwapBuffer* swap = nullptr;
    // Donor role: retain self-attention Q/K/V in the records at these layers.
    std::vector<int> capture_layers;
};

struct ForwardResult {
    LatentState eps;  // same shape as the input latent
    std::vector<AttentionRecord> records;
};

// Toy noise predictor eps_theta(z_tau, tau, c). Weights are seeded gaussians
// with scale 1/sqrt(fan-in), fixed after construction; there is no training.
struct ToyDenoiser {
    DenoiserConfig config;
    std::vector<DenoiserBlock> blocks;
    Mat out_proj;  // [h, h] final projection

    ToyDenoiser(const DenoiserConfig& cfg, std::uint64_t seed);

    ForwardResult forward(const LatentState& z, int tau, const ContextualEmbedding& c,
                          const ForwardOptions& opts = {}) const;
};

// ============================================================================
//  Training objective, evaluated (not optimized)
// ============================================================================

using EpsModel =
    std::function<LatentState(const LatentState& z_tau, int tau, const ContextualEmbedding& c)>;

// Noises z0 with `noise` at tau, runs the model, returns the mean squared
// error between noise and the prediction (mean over all l*h entries).
double ldm_loss(const EpsModel& model, const SchedulerConfig& sched, const LatentState& z0,
                const LatentState& noise, int tau, const ContextualEmbedding& c);

double ldm_loss(const ToyDenoiser& model, const SchedulerConfig& sched, const LatentState& z0,
                const LatentState& noise, int tau, const ContextualEmbedding& c);

}  // namespace harmonize
