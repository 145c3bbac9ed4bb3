#include "harmonize/sampler.hpp"

#include <algorithm>
#include <array>

namespace harmonize {

namespace {

constexpr std::uint64_t kSharedNoiseStream = 0;               // z_T, shared across variants
constexpr std::uint64_t kDonorNoiseStream = 0x646F6E6F72ull;  // "donor", unshared donor z_T

// Streams per-record subject saliency and min-max normalizes at the end.
class SaliencyAccumulator {
public:
    SaliencyAccumulator(std::vector<Index> slots, Index h_ref, Index w_ref)
        : slots_(std::move(slots)), sum_(Mat::Zero(h_ref, w_ref)) {}

    void add(const AttentionRecord& rec) {
        if (rec.kind != AttentionKind::Cross)
            return;
        Vec col = Vec::Zero(rec.map.rows());
        for (Index slot : slots_)
            col += rec.map.col(slot);
        col /= static_cast<double>(slots_.size());
        const Eigen::Map<const Mat> grid(col.data(), rec.grid_h, rec.grid_w);
        sum_ += resample_nearest(grid, sum_.rows(), sum_.cols());
        ++count_;
    }

    Mat normalized() const {
        if (count_ == 0)
            return Mat::Zero(sum_.rows(), sum_.cols());
        const Mat avg = sum_ / static_cast<double>(count_);
        const double lo = avg.minCoeff(), hi = avg.maxCoeff();
        if (hi == lo)
            return Mat::Zero(sum_.rows(), sum_.cols());
        return (avg.array() - lo) / (hi - lo);
    }

private:
    std::vector<Index> slots_;
    Mat sum_;
    int count_ = 0;
};

std::vector<Index> required_mask_slots(const ContextualEmbedding& c, const MaskOptions& mask) {
    std::vector<Index> slots = slots_with_roles(c, mask.roles);
    if (slots.empty())
        throw parameter_error("sampler: no context slot carries a mask role");
    return slots;
}

std::vector<AttentionRecord> cross_only(const std::vector<AttentionRecord>& records) {
    std::vector<AttentionRecord> out;
    for (const AttentionRecord& r : records)
        if (r.kind == AttentionKind::Cross)
            out.push_back(r);
    return out;
}

void consume_records(std::vector<AttentionRecord>&& records, const RunOptions& opts,
                     SaliencyAccumulator* heat, std::vector<AttentionRecord>* retained) {
    for (AttentionRecord& r : records) {
        if (opts.observer)
            opts.observer(r);
        if (heat != nullptr)
            heat->add(r);
        if (retained != nullptr)
            retained->push_back(std::move(r));
    }
}

SubjectMask derive_mask(const std::vector<AttentionRecord>& cross_records,
                        const std::vector<Index>& slots, const DualRunConfig& cfg,
                        int source_step) {
    const Mat saliency =
        aggregate_subject_saliency(cross_records, slots, cfg.grid_h, cfg.grid_w);
    return binarize(saliency, cfg.mask.threshold, source_step);
}

}  // namespace

const std::array<const char*, 4> kVariantLabels = {"baseline", "orchestration", "swap", "ours"};

void validate_run_config(const DualRunConfig& cfg, const DenoiserConfig& model) {
    if (cfg.grid_h < 1 || cfg.grid_w < 1)
        throw config_error("latent grid must be >= 1x1");
    if (cfg.scheduler.alpha_bar.size() != static_cast<std::size_t>(cfg.scheduler.steps) + 1)
        throw config_error("scheduler table not built for " + std::to_string(cfg.scheduler.steps) +
                           " steps");
    if (cfg.swap_window.start_step < 1 || cfg.swap_window.start_step > cfg.scheduler.steps + 1)
        throw config_error("swap window start " + std::to_string(cfg.swap_window.start_step) +
                           " outside [1, T+1]");
    for (int layer : cfg.swap_window.decoder_layers)
        if (layer < 0 || layer >= model.decoder_blocks)
            throw config_error("swap layer " + std::to_string(layer) +
                               " outside decoder block range [0, " +
                               std::to_string(model.decoder_blocks) + ")");
    if (!(cfg.mask.threshold >= 0.0 && cfg.mask.threshold <= 1.0))
        throw config_error("mask threshold outside [0, 1]");
    if (!(cfg.orchestration.eps_drop > 0.0))
        throw config_error("orchestration eps_drop must be > 0");
}

Mat initial_noise(std::uint64_t seed, Index pixels, Index h) {
    SeededRng rng(mix_seed(seed, kSharedNoiseStream));
    return gaussian_mat(rng, pixels, h);
}

RunResult run_single(const ToyDenoiser& model, const ContextualEmbedding& c,
                     const DualRunConfig& cfg, const RunOptions& opts) {
    validate_run_config(cfg, model.config);
    const std::vector<Index> slots = required_mask_slots(c, cfg.mask);
    const int steps = cfg.scheduler.steps;

    RunResult out;
    out.initial_noise = initial_noise(cfg.seed, cfg.grid_h * cfg.grid_w, model.config.h);
    LatentState z = make_latent(cfg.grid_h, cfg.grid_w, out.initial_noise);

    SaliencyAccumulator heat(slots, cfg.grid_h, cfg.grid_w);
    std::vector<AttentionRecord> last_cross;
    for (int e = 1; e <= steps; ++e) {
        const int tau = steps - e + 1;
        ForwardResult fr = model.forward(z, tau, c);
        if (e == steps)
            last_cross = cross_only(fr.records);
        consume_records(std::move(fr.records), opts, &heat,
                        opts.retain_records ? &out.records : nullptr);
        z = ddim_step(z, fr.eps, tau, cfg.scheduler);
    }

    out.final_mask = derive_mask(last_cross, slots, cfg, steps);
    if (out.final_mask.coverage == 0.0)
        out.warnings.push_back("final subject mask is empty");
    out.heatmap = heat.normalized();
    out.z0 = std::move(z);
    return out;
}

RunResult run_dual(const ToyDenoiser& model, const ContextualEmbedding& c_main,
                   const ContextualEmbedding& c_visual, const DualRunConfig& cfg,
                   const RunOptions& opts) {
    validate_run_config(cfg, model.config);
    if (c_main.feature_dim() != c_visual.feature_dim())
        throw dual_shape_error("run_dual: context dims " + std::to_string(c_main.feature_dim()) +
                               " vs " + std::to_string(c_visual.feature_dim()));
    const std::vector<Index> slots = required_mask_slots(c_main, cfg.mask);
    const int steps = cfg.scheduler.steps;

    std::vector<int> swap_layers;
    for (int rel : cfg.swap_window.decoder_layers)
        swap_layers.push_back(model.config.decoder_block_id(rel));
    std::sort(swap_layers.begin(), swap_layers.end());

    RunResult out;
    out.initial_noise = initial_noise(cfg.seed, cfg.grid_h * cfg.grid_w, model.config.h);
    LatentState z_main = make_latent(cfg.grid_h, cfg.grid_w, out.initial_noise);
    LatentState z_donor =
        cfg.shared_initial_noise
            ? z_main
            : make_latent(cfg.grid_h, cfg.grid_w,
                          [&] {
                              SeededRng rng(mix_seed(cfg.seed, kDonorNoiseStream));
                              return gaussian_mat(rng, cfg.grid_h * cfg.grid_w, model.config.h);
                          }());

    SaliencyAccumulator heat(slots, cfg.grid_h, cfg.grid_w);
    std::vector<AttentionRecord> prev_cross;  // main pass, previous executed step
    for (int e = 1; e <= steps; ++e) {
        const int tau = steps - e + 1;
        const bool active =
            cfg.swap_enabled && e >= cfg.swap_window.start_step && !swap_layers.empty();

        // Donor pass first: it feeds the recipient within the same step.
        ForwardOptions donor_opts;
        if (active)
            donor_opts.capture_layers = swap_layers;
        ForwardResult donor_fr = model.forward(z_donor, tau, c_visual, donor_opts);

        ForwardOptions main_opts;
        SwapBuffer buffer;
        if (active) {
            std::optional<SubjectMask> mask;
            if (cfg.mask_override) {
                if (std::optional<Mat> grid = cfg.mask_override(e)) {
                    SubjectMask m;
                    m.values = std::move(*grid);
                    m.source_step = e;
                    m.coverage = m.values.size() > 0
                                     ? m.values.sum() / static_cast<double>(m.values.size())
                                     : 0.0;
                    mask = std::move(m);
                }
            } else if (prev_cross.empty()) {
                // Window opens at the very first step: no earlier records exist.
                out.warnings.push_back("no cross-attention records before swap step " +
                                       std::to_string(e) + "; swap skipped");
            } else {
                mask = derive_mask(prev_cross, slots, cfg, e - 1);
            }
            if (mask.has_value()) {
                mask->applied_step = e;
                if (mask->coverage == 0.0)
                    out.warnings.push_back("subject mask empty at step " + std::to_string(e) +
                                           "; swap degenerates to self-attention");
                buffer.step = tau;
                for (int layer : swap_layers) {
                    const AttentionRecord* donor_rec = nullptr;
                    for (const AttentionRecord& r : donor_fr.records)
                        if (r.kind == AttentionKind::Self && r.layer == layer && r.has_qkv)
                            donor_rec = &r;
                    if (donor_rec == nullptr)
                        throw missing_record_error("run_dual: donor pass captured no K/V at layer " +
                                                   std::to_string(layer));
                    SwapBuffer::LayerDonation donation;
                    donation.k = donor_rec->k;
                    donation.v = donor_rec->v;
                    // All blocks share the latent grid; resampling keeps the
                    // contract explicit should that ever change.
                    Mat layer_mask = resample_nearest(mask->values, z_main.grid_h, z_main.grid_w);
                    donation.mask = Eigen::Map<Vec>(layer_mask.data(), layer_mask.size());
                    buffer.layers.emplace(layer, std::move(donation));
                }
                main_opts.swap = &buffer;
                out.step_masks.push_back(std::move(*mask));
            }
        }

        ForwardResult main_fr = model.forward(z_main, tau, c_main, main_opts);
        prev_cross = cross_only(main_fr.records);

        consume_records(std::move(donor_fr.records), opts, nullptr,
                        opts.retain_records ? &out.donor_records : nullptr);
        consume_records(std::move(main_fr.records), opts, &heat,
                        opts.retain_records ? &out.records : nullptr);

        z_main = ddim_step(z_main, main_fr.eps, tau, cfg.scheduler);
        z_donor = ddim_step(z_donor, donor_fr.eps, tau, cfg.scheduler);
    }

    if (!out.step_masks.empty())
        out.final_mask = out.step_masks.back();
    else
        out.final_mask = derive_mask(prev_cross, slots, cfg, steps);
    if (out.final_mask.coverage == 0.0)
        out.warnings.push_back("final subject mask is empty");
    out.heatmap = heat.normalized();
    out.z0 = std::move(z_main);
    return out;
}

VariantResult run_variant(const ToyDenoiser& model, const VisualEmbedding& v,
                          const TextEmbedding& t, const DualRunConfig& cfg,
                          const std::string& label, const RunOptions& opts) {
    OrthogonalBasis basis;
    basis.dim = t.feature_dim();
    if (cfg.orchestration.enabled)
        basis = build_basis(t, cfg.orchestration.excluded_roles, cfg.orchestration.eps_drop);

    const ContextualEmbedding c_full = compose_context(&v, &t, ContextMode::Full);
    OrchestratedContext orchestrated = orchestrate(c_full, basis);
    const ContextualEmbedding c_visual = compose_context(&v, nullptr, ContextMode::VisualOnly);

    std::vector<std::string> warnings;
    for (Index row : orchestrated.collapsed_rows)
        warnings.push_back("visual token " + std::to_string(row) +
                           " collapsed to near-zero under orthogonalization");

    VariantResult out;
    out.label = label;
    if (label == "baseline") {
        out.result = run_single(model, c_full, cfg, opts);
    } else if (label == "orchestration") {
        out.result = run_single(model, orchestrated.context, cfg, opts);
        out.result.warnings.insert(out.result.warnings.begin(), warnings.begin(), warnings.end());
    } else if (label == "swap") {
        out.result = run_dual(model, c_full, c_visual, cfg, opts);
    } else if (label == "ours") {
        out.result = run_dual(model, orchestrated.context, c_visual, cfg, opts);
        out.result.warnings.insert(out.result.warnings.begin(), warnings.begin(), warnings.end());
    } else {
        throw config_error("unknown ablation variant '" + label + "'");
    }
    return out;
}

std::vector<VariantResult> run_ablation(const ToyDenoiser& model, const VisualEmbedding& v,
                                        const TextEmbedding& t, const DualRunConfig& cfg,
                                        const RunOptions& opts) {
    std::vector<VariantResult> rows;
    rows.reserve(kVariantLabels.size());
    for (const char* label : kVariantLabels)
        rows.push_back(run_variant(model, v, t, cfg, label, opts));
    return rows;
}

}  // namespace harmonize
