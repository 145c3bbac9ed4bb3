#include "harmonize/denoiser.hpp"

#include <algorithm>
#include <cmath>

namespace harmonize {

namespace {

constexpr std::uint64_t kWeightStream = 0x77656967687473ull;  // "weights"

Mat relu(const Mat& m) {
    return m.cwiseMax(0.0);
}

}  // namespace

void DenoiserConfig::validate() const {
    if (h < 2 || h % 2 != 0)
        throw config_error("model.h must be even and >= 2 (sinusoidal timestep embedding)");
    if (h_c < 1 || d < 1)
        throw config_error("model.h_c and model.d must be >= 1");
    if (encoder_blocks < 0 || middle_blocks < 0 || decoder_blocks < 0)
        throw config_error("model block counts must be >= 0");
    if (block_count() < 1)
        throw config_error("model must have at least one block");
}

Vec timestep_embedding(int tau, Index dim) {
    if (dim < 2 || dim % 2 != 0)
        throw parameter_error("timestep_embedding: dim must be even and >= 2");
    const Index half = dim / 2;
    Vec emb(dim);
    for (Index i = 0; i < half; ++i) {
        const double freq = std::exp(-std::log(10000.0) * static_cast<double>(i) /
                                     static_cast<double>(half));
        const double angle = static_cast<double>(tau) * freq;
        emb(i) = std::sin(angle);
        emb(half + i) = std::cos(angle);
    }
    return emb;
}

ToyDenoiser::ToyDenoiser(const DenoiserConfig& cfg, std::uint64_t seed) : config(cfg) {
    config.validate();
    SeededRng rng(mix_seed(seed, kWeightStream));
    const Index h = config.h, h_c = config.h_c, d = config.d, ff = 2 * config.h;
    const double sh = 1.0 / std::sqrt(static_cast<double>(h));
    const double shc = 1.0 / std::sqrt(static_cast<double>(h_c));
    const double sd = 1.0 / std::sqrt(static_cast<double>(d));
    const double sff = 1.0 / std::sqrt(static_cast<double>(ff));

    blocks.reserve(static_cast<std::size_t>(config.block_count()));
    for (int id = 0; id < config.block_count(); ++id) {
        DenoiserBlock b;
        b.id = id;
        b.stage = id < config.encoder_blocks ? BlockStage::Encoder
                  : id < config.encoder_blocks + config.middle_blocks ? BlockStage::Middle
                                                                      : BlockStage::Decoder;
        b.self_attn = AttentionWeights{gaussian_mat(rng, h, d, sh), gaussian_mat(rng, h, d, sh),
                                       gaussian_mat(rng, h, d, sh)};
        b.self_out = gaussian_mat(rng, d, h, sd);
        b.cross_attn = AttentionWeights{gaussian_mat(rng, h, d, sh), gaussian_mat(rng, h_c, d, shc),
                                        gaussian_mat(rng, h_c, d, shc)};
        b.cross_out = gaussian_mat(rng, d, h, sd);
        b.ff1 = gaussian_mat(rng, h, ff, sh);
        b.ff2 = gaussian_mat(rng, ff, h, sff);
        blocks.push_back(std::move(b));
    }
    out_proj = gaussian_mat(rng, h, h, sh);
}

ForwardResult ToyDenoiser::forward(const LatentState& z, int tau, const ContextualEmbedding& c,
                                   const ForwardOptions& opts) const {
    if (tau < 1)
        throw step_error("forward: tau must be >= 1");
    if (z.dim() != config.h)
        throw dimension_error("forward: latent dim " + std::to_string(z.dim()) +
                              " vs model h " + std::to_string(config.h));
    if (c.length() < 1)
        throw empty_input_error("forward: empty contextual embedding");
    if (c.feature_dim() != config.h_c)
        throw dimension_error("forward: context dim " + std::to_string(c.feature_dim()) +
                              " vs model h_c " + std::to_string(config.h_c));

    auto check_layer = [&](int id, const char* what) {
        if (id < 0 || id >= config.block_count())
            throw config_error(std::string(what) + " references nonexistent layer id " +
                               std::to_string(id));
    };
    if (opts.swap != nullptr) {
        for (const auto& [id, donation] : opts.swap->layers)
            check_layer(id, "swap hook");
        if (opts.swap->step != tau)
            throw step_error("forward: swap buffer tagged for step " +
                             std::to_string(opts.swap->step) + " consumed at step " +
                             std::to_string(tau));
    }
    for (int id : opts.capture_layers)
        check_layer(id, "capture set");

    ForwardResult out;
    out.records.reserve(static_cast<std::size_t>(2 * config.block_count()));

    Mat f = z.features;  // [l, h]
    f.rowwise() += timestep_embedding(tau, config.h).transpose();

    for (const DenoiserBlock& block : blocks) {
        const SwapBuffer::LayerDonation* donation = nullptr;
        if (opts.swap != nullptr) {
            auto it = opts.swap->layers.find(block.id);
            if (it != opts.swap->layers.end())
                donation = &it->second;
        }
        const bool capture =
            std::find(opts.capture_layers.begin(), opts.capture_layers.end(), block.id) !=
            opts.capture_layers.end();

        // Self-attention, swapped against the donor process where hooked.
        // Q/K/V stay in the record only at designated swap layers.
        AttentionResult sa = self_attention(f, block.self_attn, capture || donation != nullptr);
        Mat self_value;
        if (donation != nullptr) {
            if (donation->k.rows() != f.rows())
                throw dual_shape_error("forward: donor latent length " +
                                       std::to_string(donation->k.rows()) + " vs " +
                                       std::to_string(f.rows()));
            SwapResult sw = masked_attn_swap(sa.record.q, sa.record.k, sa.record.v, donation->k,
                                             donation->v, donation->mask);
            self_value = std::move(sw.output);
            sa.record.map = std::move(sw.map);
        } else {
            self_value = std::move(sa.output);
        }
        sa.record.layer = block.id;
        sa.record.step = tau;
        sa.record.grid_h = z.grid_h;
        sa.record.grid_w = z.grid_w;
        f += matmul(self_value, block.self_out);
        out.records.push_back(std::move(sa.record));

        AttentionResult ca = cross_attention(f, c, block.cross_attn);
        ca.record.layer = block.id;
        ca.record.step = tau;
        ca.record.grid_h = z.grid_h;
        ca.record.grid_w = z.grid_w;
        f += matmul(ca.output, block.cross_out);
        out.records.push_back(std::move(ca.record));

        f += matmul(relu(matmul(f, block.ff1)), block.ff2);
    }

    out.eps.grid_h = z.grid_h;
    out.eps.grid_w = z.grid_w;
    out.eps.features = matmul(f, out_proj);
    return out;
}

double ldm_loss(const EpsModel& model, const SchedulerConfig& sched, const LatentState& z0,
                const LatentState& noise, int tau, const ContextualEmbedding& c) {
    if (tau < 1 || tau > sched.steps)
        throw step_error("ldm_loss: tau " + std::to_string(tau) + " outside [1, " +
                         std::to_string(sched.steps) + "]");
    if (z0.grid_h != noise.grid_h || z0.grid_w != noise.grid_w || z0.dim() != noise.dim())
        throw dimension_error("ldm_loss: noise shape " + shape_str(noise.features) +
                              " vs latent " + shape_str(z0.features));

    const double abar = sched.alpha_bar_at(tau);
    LatentState z_tau;
    z_tau.grid_h = z0.grid_h;
    z_tau.grid_w = z0.grid_w;
    z_tau.features = std::sqrt(abar) * z0.features + std::sqrt(1.0 - abar) * noise.features;

    const LatentState eps_hat = model(z_tau, tau, c);
    if (eps_hat.features.rows() != noise.features.rows() ||
        eps_hat.features.cols() != noise.features.cols())
        throw dimension_error("ldm_loss: prediction shape " + shape_str(eps_hat.features) +
                              " vs noise " + shape_str(noise.features));

    double acc = 0.0;
    for (Index i = 0; i < noise.features.rows(); ++i)
        for (Index j = 0; j < noise.features.cols(); ++j) {
            const double diff = noise.features(i, j) - eps_hat.features(i, j);
            acc += diff * diff;
        }
    return acc / static_cast<double>(noise.features.size());
}

double ldm_loss(const ToyDenoiser& model, const SchedulerConfig& sched, const LatentState& z0,
                const LatentState& noise, int tau, const ContextualEmbedding& c) {
    return ldm_loss(
        [&model](const LatentState& z, int t, const ContextualEmbedding& ctx) {
            return model.forward(z, t, ctx).eps;
        },
        sched, z0, noise, tau, c);
}

}  // namespace harmonize
