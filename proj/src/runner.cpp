#include "harmonize/runner.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>

#include <json.hpp>

#include "harmonize/config.hpp"
#include "harmonize/io.hpp"
#include "harmonize/latent.hpp"
#include "harmonize/metrics.hpp"
#include "harmonize/sampler.hpp"

namespace harmonize {

namespace {

using nlohmann::json;

// Tracks written files so a failed run leaves no partial outputs behind.
class OutputWriter {
public:
    explicit OutputWriter(std::filesystem::path dir) : dir_(std::move(dir)) {}

    const std::filesystem::path& dir() const { return dir_; }

    void write_bytes(const std::string& name, const std::string& data, json extra = {}) {
        write_file(dir_ / name, data);
        json entry = std::move(extra);
        entry["name"] = name;
        entry["sha256"] = sha256_hex(data);
        entries_.push_back(std::move(entry));
    }

    void write_image(const std::string& name, const QuantizedImage& img, bool record_range) {
        std::string data = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) +
                           "\n255\n";
        data.append(reinterpret_cast<const char*>(img.bytes.data()), img.bytes.size());
        json extra;
        if (record_range) {
            extra["min"] = img.min;
            extra["max"] = img.max;
        }
        write_bytes(name, data, std::move(extra));
    }

    json sorted_entries() const {
        json files = json::array();
        std::vector<json> sorted = entries_;
        std::sort(sorted.begin(), sorted.end(), [](const json& a, const json& b) {
            return a.at("name").get<std::string>() < b.at("name").get<std::string>();
        });
        for (json& e : sorted)
            files.push_back(std::move(e));
        return files;
    }

    void remove_all() {
        for (const json& e : entries_) {
            std::error_code ec;
            std::filesystem::remove(dir_ / e.at("name").get<std::string>(), ec);
        }
        entries_.clear();
    }

private:
    std::filesystem::path dir_;
    std::vector<json> entries_;
};

std::string step_mask_name(const std::string& label, int applied_step) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "mask_%s_step%03d.pgm", label.c_str(), applied_step);
    return buf;
}

bool known_variant(const std::string& v) {
    return v == "all" || std::find_if(kVariantLabels.begin(), kVariantLabels.end(),
                                      [&](const char* l) { return v == l; }) != kVariantLabels.end();
}

}  // namespace

int run_experiment(const std::filesystem::path& config_path, const RunFlags& flags,
                   std::ostream& log) {
    // ---- load + validate -------------------------------------------------
    json config_json;
    try {
        config_json = json::parse(read_file(config_path));
    } catch (const std::exception& e) {
        log << "error: cannot read config " << config_path.string() << ": " << e.what() << "\n";
        return 2;
    }

    if (!known_variant(flags.variant)) {
        log << "error: unknown variant '" << flags.variant
            << "' (expected baseline|orchestration|swap|ours|all)\n";
        return 2;
    }

    // Overrides land in the JSON so validation and the echo see them.
    if (flags.seed.has_value())
        config_json["seed"] = *flags.seed;
    if (flags.steps.has_value())
        config_json["scheduler"]["steps"] = *flags.steps;

    const std::filesystem::path base_dir = config_path.parent_path();
    const std::vector<Violation> violations = validate_config(config_json, base_dir);
    if (!violations.empty()) {
        for (const Violation& v : violations)
            log << v.path << ": " << v.message << "\n";
        return 2;
    }
    if (flags.validate_only) {
        log << "config ok: " << config_path.string() << "\n";
        return 0;
    }

    RunConfig cfg;
    try {
        cfg = parse_config(config_json, base_dir);
    } catch (const config_error& e) {
        log << e.what() << "\n";
        return 2;
    }

    std::filesystem::path out_dir = "out";
    if (cfg.output_dir.has_value())
        out_dir = base_dir / *cfg.output_dir;
    if (flags.out_dir.has_value())
        out_dir = *flags.out_dir;
    if (const char* env = std::getenv("HARMONIZE_OUT"); env != nullptr && env[0] != '\0')
        out_dir = env;

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        log << "error: cannot create output directory " << out_dir.string() << "\n";
        return 2;
    }

    // ---- run + write ------------------------------------------------------
    OutputWriter writer(out_dir);
    try {
        const ToyDenoiser model(cfg.model, cfg.seed);
        const TextEmbedding text =
            encode_text(cfg.prompt_tokens(), cfg.model.h_c, cfg.seed, cfg.vocab_bound);
        const VisualEmbedding visual =
            encode_visual(cfg.image_grid, cfg.visual_tokens, cfg.model.h_c, cfg.seed);
        const DualRunConfig run_cfg = cfg.dual_run_config();

        RunOptions run_opts;
        run_opts.retain_records = false;

        std::vector<VariantResult> results;
        if (flags.variant == "all") {
            results = run_ablation(model, visual, text, run_cfg, run_opts);
        } else {
            results.push_back(run_variant(model, visual, text, run_cfg, flags.variant, run_opts));
        }

        const Autoencoder autoencoder;
        std::vector<std::string> warnings;
        json variants_json = json::array();
        std::vector<VariantOutput> metric_inputs;

        for (const VariantResult& variant : results) {
            const Image decoded = autoencoder.decode(variant.result.z0);
            const Mat image_grid = grid_from_image(decoded);

            const QuantizedImage img = quantize_minmax(image_grid);
            writer.write_image("image_" + variant.label + ".pgm", img, true);
            writer.write_image("heatmap_" + variant.label + ".pgm",
                               quantize_minmax(variant.result.heatmap), false);
            writer.write_image("mask_" + variant.label + "_final.pgm",
                               quantize_binary(variant.result.final_mask.values), false);
            for (const SubjectMask& mask : variant.result.step_masks)
                writer.write_image(step_mask_name(variant.label, mask.applied_step),
                                   quantize_binary(mask.values), false);

            json vj;
            vj["label"] = variant.label;
            vj["initial_noise_sha256"] = sha256_hex(variant.result.initial_noise);
            vj["image_min"] = img.min;
            vj["image_max"] = img.max;
            vj["mask_coverage"] = variant.result.final_mask.coverage;
            vj["mask_source_step"] = variant.result.final_mask.source_step;
            vj["warnings"] = variant.result.warnings;
            variants_json.push_back(std::move(vj));

            for (const std::string& w : variant.result.warnings)
                warnings.push_back(variant.label + ": " + w);

            metric_inputs.push_back(
                VariantOutput{variant.label, image_grid, variant.result.final_mask.values});
        }

        if (flags.variant == "all") {
            Mat reference_mask;
            if (cfg.reference_mask_grid.has_value()) {
                reference_mask = *cfg.reference_mask_grid;
            } else {
                reference_mask = Mat::Ones(cfg.image_grid.rows(), cfg.image_grid.cols());
                warnings.push_back("reference mask not given; whole image used");
            }
            const HistogramExtractor extractor;
            const AblationReport report =
                ablation_report(metric_inputs, cfg.image_grid, reference_mask, extractor);
            writer.write_bytes("metrics.csv", report.to_csv());
        }

        json manifest;
        manifest["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
        manifest["config"] = cfg.echo();
        manifest["variants"] = std::move(variants_json);
        manifest["files"] = writer.sorted_entries();
        manifest["warnings"] = warnings;
        write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");

        log << "wrote " << (writer.sorted_entries().size() + 1) << " files to "
            << out_dir.string() << "\n";
        return 0;
    } catch (const std::exception& e) {
        writer.remove_all();
        std::error_code rec;
        std::filesystem::remove(out_dir / "manifest.json", rec);
        log << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace harmonize
