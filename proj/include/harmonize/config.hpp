#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "harmonize/denoiser.hpp"
#include "harmonize/sampler.hpp"

namespace harmonize {

struct Violation {
    std::string path;     // dotted field path, e.g. "mask.threshold"
    std::string message;
};

// Image or mask source exactly as written in the config: a PGM path or an
// inline grid of reals. Echoed verbatim into the manifest.
struct GridSource {
    std::optional<std::string> path;
    std::optional<Mat> inline_grid;
};

struct PromptEntry {
    std::string text;
    TokenRole role = TokenRole::Regular;
};

// Fully resolved experiment configuration. Unknown fields are rejected and
// every violation is reported with its field path before any compute.
struct RunConfig {
    std::uint64_t seed = 0;
    DenoiserConfig model;
    Index latent_h = 16, latent_w = 16;

    GridSource image;
    Mat image_grid;  // resolved pixels
    int visual_tokens = 4;
    std::uint64_t vocab_bound = 65536;
    std::vector<PromptEntry> prompt;

    int steps = 100;
    double beta_start = 1e-4, beta_end = 0.02;

    bool swap_enabled = true;
    int swap_start = 21;
    std::vector<int> swap_layers = {3, 4, 5};

    bool orchestration_enabled = true;
    std::set<TokenRole> excluded_roles = default_excluded_roles();
    double epsilon_drop = 1e-10;

    double mask_threshold = 0.5;
    std::vector<TokenRole> mask_roles = {TokenRole::Subject};

    std::optional<GridSource> reference_mask;
    std::optional<Mat> reference_mask_grid;

    std::optional<std::string> output_dir;

    // Canonical echo with every default materialized.
    nlohmann::json echo() const;

    DualRunConfig dual_run_config() const;
    std::vector<PromptToken> prompt_tokens() const;
};

// Schema + invariant check without compute; `base_dir` anchors relative paths.
std::vector<Violation> validate_config(const nlohmann::json& j,
                                       const std::filesystem::path& base_dir);

// Parses after validation; throws config_error listing every violation.
RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir);

std::uint64_t fnv1a64(const std::string& text);

}  // namespace harmonize
