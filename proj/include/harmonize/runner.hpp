#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

namespace harmonize {

inline constexpr const char* kToolName = "harmonize";
inline constexpr const char* kToolVersion = "0.1.0";

// Command-line overrides applied onto the JSON config before validation, so
// the manifest echo always reflects the effective values.
struct RunFlags {
    std::optional<std::uint64_t> seed;
    std::optional<int> steps;
    std::optional<std::string> out_dir;     // HARMONIZE_OUT env var wins over this
    std::string variant = "all";            // baseline | orchestration | swap | ours | all
    bool validate_only = false;
};

// Loads, validates and runs an experiment; writes images, masks, heatmaps,
// metrics.csv and manifest.json into the output directory. Returns the
// process exit code: 0 success, 2 invalid config, 1 compute/write failure
// (partial outputs are removed).
int run_experiment(const std::filesystem::path& config_path, const RunFlags& flags,
                   std::ostream& log);

}  // namespace harmonize
