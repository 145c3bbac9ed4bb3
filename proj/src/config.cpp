#include "harmonize/config.hpp"

#include <algorithm>

#include "harmonize/io.hpp"

namespace harmonize {

namespace {

using nlohmann::json;

struct Reader {
    std::vector<Violation>& violations;
    std::filesystem::path base_dir;

    void fail(const std::string& path, const std::string& message) {
        violations.push_back(Violation{path, message});
    }

    void check_keys(const json& j, const std::string& path,
                    std::initializer_list<const char*> allowed) {
        for (const auto& [key, value] : j.items()) {
            (void)value;
            if (std::find_if(allowed.begin(), allowed.end(),
                             [&](const char* a) { return key == a; }) == allowed.end())
                fail(path.empty() ? key : path + "." + key, "unknown field");
        }
    }

    template <typename T>
    void read_int(const json& j, const std::string& path, const char* key, T& out) {
        if (!j.contains(key))
            return;
        const json& v = j.at(key);
        if (!v.is_number_integer() && !v.is_number_unsigned()) {
            fail(path + key, "expected an integer");
            return;
        }
        if constexpr (std::is_unsigned_v<T>) {
            if (v.is_number_integer() && v.get<std::int64_t>() < 0) {
                fail(path + key, "must be >= 0");
                return;
            }
        }
        out = v.get<T>();
    }

    void read_real(const json& j, const std::string& path, const char* key, double& out) {
        if (!j.contains(key))
            return;
        if (!j.at(key).is_number()) {
            fail(path + key, "expected a number");
            return;
        }
        out = j.at(key).get<double>();
    }

    void read_bool(const json& j, const std::string& path, const char* key, bool& out) {
        if (!j.contains(key))
            return;
        if (!j.at(key).is_boolean()) {
            fail(path + key, "expected a boolean");
            return;
        }
        out = j.at(key).get<bool>();
    }

    bool read_roles(const json& v, const std::string& path, std::vector<TokenRole>& out) {
        if (!v.is_array()) {
            fail(path, "expected an array of role names");
            return false;
        }
        out.clear();
        bool ok = true;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_string()) {
                fail(path + "[" + std::to_string(i) + "]", "expected a role name");
                ok = false;
                continue;
            }
            const auto role = role_from_string(v[i].get<std::string>());
            if (!role.has_value()) {
                fail(path + "[" + std::to_string(i) + "]",
                     "unknown role '" + v[i].get<std::string>() + "'");
                ok = false;
                continue;
            }
            out.push_back(*role);
        }
        return ok;
    }

    // Reads {path: ...} | {inline: [[...]]} and resolves the pixels.
    std::optional<Mat> read_grid_source(const json& v, const std::string& path, GridSource& src) {
        if (!v.is_object()) {
            fail(path, "expected an object with 'path' or 'inline'");
            return std::nullopt;
        }
        check_keys(v, path, {"path", "inline"});
        const bool has_path = v.contains("path");
        const bool has_inline = v.contains("inline");
        if (has_path == has_inline) {
            fail(path, "exactly one of 'path' or 'inline' required");
            return std::nullopt;
        }
        if (has_path) {
            if (!v.at("path").is_string()) {
                fail(path + ".path", "expected a file path string");
                return std::nullopt;
            }
            src.path = v.at("path").get<std::string>();
            try {
                return read_pgm(base_dir / *src.path);
            } catch (const error& e) {
                fail(path + ".path", e.what());
                return std::nullopt;
            }
        }
        const json& rows = v.at("inline");
        if (!rows.is_array() || rows.empty()) {
            fail(path + ".inline", "expected a non-empty array of rows");
            return std::nullopt;
        }
        const std::size_t width = rows[0].is_array() ? rows[0].size() : 0;
        if (width == 0) {
            fail(path + ".inline", "rows must be non-empty arrays");
            return std::nullopt;
        }
        Mat grid(static_cast<Index>(rows.size()), static_cast<Index>(width));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (!rows[i].is_array() || rows[i].size() != width) {
                fail(path + ".inline", "row " + std::to_string(i) + " is not rectangular");
                return std::nullopt;
            }
            for (std::size_t j = 0; j < width; ++j) {
                if (!rows[i][j].is_number()) {
                    fail(path + ".inline", "entry [" + std::to_string(i) + "][" +
                                               std::to_string(j) + "] is not a number");
                    return std::nullopt;
                }
                grid(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j].get<double>();
            }
        }
        if (!grid.allFinite()) {
            fail(path + ".inline", "non-finite entries");
            return std::nullopt;
        }
        src.inline_grid = grid;
        return grid;
    }
};

json grid_source_echo(const GridSource& src) {
    json out = json::object();
    if (src.path.has_value()) {
        out["path"] = *src.path;
    } else if (src.inline_grid.has_value()) {
        json rows = json::array();
        for (Index i = 0; i < src.inline_grid->rows(); ++i) {
            json row = json::array();
            for (Index j = 0; j < src.inline_grid->cols(); ++j)
                row.push_back((*src.inline_grid)(i, j));
            rows.push_back(std::move(row));
        }
        out["inline"] = std::move(rows);
    }
    return out;
}

json roles_echo(const std::vector<TokenRole>& roles) {
    json out = json::array();
    for (TokenRole r : roles)
        out.push_back(to_string(r));
    return out;
}

struct ParseResult {
    RunConfig config;
    std::vector<Violation> violations;
};

ParseResult parse_impl(const json& j, const std::filesystem::path& base_dir) {
    ParseResult result;
    RunConfig& cfg = result.config;
    Reader r{result.violations, base_dir};

    if (!j.is_object()) {
        r.fail("", "config root must be an object");
        return result;
    }
    r.check_keys(j, "", {"seed", "model", "latent", "image", "visual_tokens", "vocab_bound",
                         "prompt", "scheduler", "swap", "orchestration", "mask",
                         "reference_mask", "output_dir"});

    r.read_int(j, "", "seed", cfg.seed);

    if (j.contains("model")) {
        const json& m = j.at("model");
        if (!m.is_object()) {
            r.fail("model", "expected an object");
        } else {
            r.check_keys(m, "model", {"h", "h_c", "d", "encoder_blocks", "middle_blocks",
                                      "decoder_blocks"});
            r.read_int(m, "model.", "h", cfg.model.h);
            r.read_int(m, "model.", "h_c", cfg.model.h_c);
            r.read_int(m, "model.", "d", cfg.model.d);
            r.read_int(m, "model.", "encoder_blocks", cfg.model.encoder_blocks);
            r.read_int(m, "model.", "middle_blocks", cfg.model.middle_blocks);
            r.read_int(m, "model.", "decoder_blocks", cfg.model.decoder_blocks);
        }
    }
    if (cfg.model.h < 2 || cfg.model.h % 2 != 0)
        r.fail("model.h", "must be even and >= 2");
    if (cfg.model.h_c < 1)
        r.fail("model.h_c", "must be >= 1");
    if (cfg.model.d < 1)
        r.fail("model.d", "must be >= 1");
    if (cfg.model.encoder_blocks < 0 || cfg.model.middle_blocks < 0 ||
        cfg.model.decoder_blocks < 0)
        r.fail("model", "block counts must be >= 0");
    else if (cfg.model.block_count() < 1)
        r.fail("model", "at least one block required");

    if (j.contains("latent")) {
        const json& l = j.at("latent");
        if (!l.is_object()) {
            r.fail("latent", "expected an object");
        } else {
            r.check_keys(l, "latent", {"height", "width"});
            r.read_int(l, "latent.", "height", cfg.latent_h);
            r.read_int(l, "latent.", "width", cfg.latent_w);
        }
    }
    if (cfg.latent_h < 1 || cfg.latent_w < 1)
        r.fail("latent", "grid must be >= 1x1");

    r.read_int(j, "", "visual_tokens", cfg.visual_tokens);
    if (cfg.visual_tokens < 1)
        r.fail("visual_tokens", "must be >= 1");
    r.read_int(j, "", "vocab_bound", cfg.vocab_bound);
    if (cfg.vocab_bound < 1)
        r.fail("vocab_bound", "must be >= 1");

    if (!j.contains("image")) {
        r.fail("image", "required");
    } else if (auto grid = r.read_grid_source(j.at("image"), "image", cfg.image)) {
        cfg.image_grid = std::move(*grid);
        if (cfg.visual_tokens >= 1 && cfg.image_grid.rows() % cfg.visual_tokens != 0)
            r.fail("image", "height " + std::to_string(cfg.image_grid.rows()) +
                                " not divisible into " + std::to_string(cfg.visual_tokens) +
                                " strips");
    }

    if (!j.contains("prompt")) {
        r.fail("prompt", "required");
    } else if (!j.at("prompt").is_array() || j.at("prompt").empty()) {
        r.fail("prompt", "expected a non-empty array of {text, role}");
    } else {
        int subjects = 0;
        const json& prompt = j.at("prompt");
        for (std::size_t i = 0; i < prompt.size(); ++i) {
            const std::string path = "prompt[" + std::to_string(i) + "]";
            if (!prompt[i].is_object()) {
                r.fail(path, "expected an object");
                continue;
            }
            r.check_keys(prompt[i], path, {"text", "role"});
            PromptEntry entry;
            if (!prompt[i].contains("text") || !prompt[i].at("text").is_string() ||
                prompt[i].at("text").get<std::string>().empty()) {
                r.fail(path + ".text", "expected a non-empty string");
                continue;
            }
            entry.text = prompt[i].at("text").get<std::string>();
            if (prompt[i].contains("role")) {
                if (!prompt[i].at("role").is_string()) {
                    r.fail(path + ".role", "expected a role name");
                    continue;
                }
                const auto role = role_from_string(prompt[i].at("role").get<std::string>());
                if (!role.has_value()) {
                    r.fail(path + ".role",
                           "unknown role '" + prompt[i].at("role").get<std::string>() + "'");
                    continue;
                }
                entry.role = *role;
            }
            if (entry.role == TokenRole::Subject)
                ++subjects;
            cfg.prompt.push_back(std::move(entry));
        }
        if (subjects > 1)
            r.fail("prompt", "at most one token may carry the subject role");
    }

    if (j.contains("scheduler")) {
        const json& s = j.at("scheduler");
        if (!s.is_object()) {
            r.fail("scheduler", "expected an object");
        } else {
            r.check_keys(s, "scheduler", {"steps", "beta_start", "beta_end"});
            r.read_int(s, "scheduler.", "steps", cfg.steps);
            r.read_real(s, "scheduler.", "beta_start", cfg.beta_start);
            r.read_real(s, "scheduler.", "beta_end", cfg.beta_end);
        }
    }
    if (cfg.steps < 1)
        r.fail("scheduler.steps", "must be >= 1");
    if (!(cfg.beta_start > 0.0) || !(cfg.beta_end < 1.0) || cfg.beta_start > cfg.beta_end)
        r.fail("scheduler", "betas must satisfy 0 < beta_start <= beta_end < 1");

    if (j.contains("swap")) {
        const json& s = j.at("swap");
        if (!s.is_object()) {
            r.fail("swap", "expected an object");
        } else {
            r.check_keys(s, "swap", {"enabled", "start_step", "layers"});
            r.read_bool(s, "swap.", "enabled", cfg.swap_enabled);
            r.read_int(s, "swap.", "start_step", cfg.swap_start);
            if (s.contains("layers")) {
                if (!s.at("layers").is_array()) {
                    r.fail("swap.layers", "expected an array of decoder block indices");
                } else {
                    cfg.swap_layers.clear();
                    for (std::size_t i = 0; i < s.at("layers").size(); ++i) {
                        if (!s.at("layers")[i].is_number_integer() &&
                            !s.at("layers")[i].is_number_unsigned()) {
                            r.fail("swap.layers[" + std::to_string(i) + "]",
                                   "expected an integer");
                            continue;
                        }
                        cfg.swap_layers.push_back(s.at("layers")[i].get<int>());
                    }
                }
            }
        }
    }
    if (cfg.steps >= 1 && (cfg.swap_start < 1 || cfg.swap_start > cfg.steps + 1))
        r.fail("swap.start_step", "must be in [1, steps + 1]");
    for (int layer : cfg.swap_layers)
        if (layer < 0 || layer >= cfg.model.decoder_blocks)
            r.fail("swap.layers", "decoder block index " + std::to_string(layer) +
                                      " outside [0, " +
                                      std::to_string(cfg.model.decoder_blocks) + ")");

    if (j.contains("orchestration")) {
        const json& o = j.at("orchestration");
        if (!o.is_object()) {
            r.fail("orchestration", "expected an object");
        } else {
            r.check_keys(o, "orchestration", {"enabled", "excluded_roles", "epsilon_drop"});
            r.read_bool(o, "orchestration.", "enabled", cfg.orchestration_enabled);
            r.read_real(o, "orchestration.", "epsilon_drop", cfg.epsilon_drop);
            if (o.contains("excluded_roles")) {
                std::vector<TokenRole> roles;
                if (r.read_roles(o.at("excluded_roles"), "orchestration.excluded_roles", roles))
                    cfg.excluded_roles = std::set<TokenRole>(roles.begin(), roles.end());
            }
        }
    }
    if (!(cfg.epsilon_drop > 0.0))
        r.fail("orchestration.epsilon_drop", "must be > 0");

    if (j.contains("mask")) {
        const json& m = j.at("mask");
        if (!m.is_object()) {
            r.fail("mask", "expected an object");
        } else {
            r.check_keys(m, "mask", {"threshold", "roles"});
            r.read_real(m, "mask.", "threshold", cfg.mask_threshold);
            if (m.contains("roles")) {
                std::vector<TokenRole> roles;
                if (r.read_roles(m.at("roles"), "mask.roles", roles)) {
                    if (roles.empty())
                        r.fail("mask.roles", "must not be empty");
                    else
                        cfg.mask_roles = std::move(roles);
                }
            }
        }
    }
    if (!(cfg.mask_threshold >= 0.0 && cfg.mask_threshold <= 1.0))
        r.fail("mask.threshold", "must be in [0, 1]");
    if (!cfg.prompt.empty()) {
        const bool any_mask_token =
            std::any_of(cfg.prompt.begin(), cfg.prompt.end(), [&](const PromptEntry& e) {
                return std::find(cfg.mask_roles.begin(), cfg.mask_roles.end(), e.role) !=
                       cfg.mask_roles.end();
            });
        if (!any_mask_token)
            r.fail("mask.roles", "no prompt token carries any of the mask roles");
    }

    if (j.contains("reference_mask")) {
        GridSource src;
        if (auto grid = r.read_grid_source(j.at("reference_mask"), "reference_mask", src)) {
            bool binary = true;
            for (Index i = 0; i < grid->rows() && binary; ++i)
                for (Index jj = 0; jj < grid->cols() && binary; ++jj)
                    if ((*grid)(i, jj) != 0.0 && (*grid)(i, jj) != 1.0)
                        binary = false;
            if (!binary)
                r.fail("reference_mask", "entries must be 0 or 1");
            else if (cfg.image_grid.size() > 0 && (grid->rows() != cfg.image_grid.rows() ||
                                                   grid->cols() != cfg.image_grid.cols()))
                r.fail("reference_mask", "shape " + shape_str(*grid) + " does not match image " +
                                             shape_str(cfg.image_grid));
            else {
                cfg.reference_mask = std::move(src);
                cfg.reference_mask_grid = std::move(*grid);
            }
        }
    }

    if (j.contains("output_dir")) {
        if (!j.at("output_dir").is_string())
            r.fail("output_dir", "expected a string");
        else
            cfg.output_dir = j.at("output_dir").get<std::string>();
    }

    return result;
}

}  // namespace

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t hash = 14695981039346656037ull;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

std::vector<Violation> validate_config(const nlohmann::json& j,
                                       const std::filesystem::path& base_dir) {
    return parse_impl(j, base_dir).violations;
}

RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    ParseResult result = parse_impl(j, base_dir);
    if (!result.violations.empty()) {
        std::string message = "invalid config:";
        for (const Violation& v : result.violations)
            message += "\n  " + v.path + ": " + v.message;
        throw config_error(message);
    }
    return std::move(result.config);
}

nlohmann::json RunConfig::echo() const {
    json out;
    out["seed"] = seed;
    out["model"] = {{"h", model.h},
                    {"h_c", model.h_c},
                    {"d", model.d},
                    {"encoder_blocks", model.encoder_blocks},
                    {"middle_blocks", model.middle_blocks},
                    {"decoder_blocks", model.decoder_blocks}};
    out["latent"] = {{"height", latent_h}, {"width", latent_w}};
    out["image"] = grid_source_echo(image);
    out["visual_tokens"] = visual_tokens;
    out["vocab_bound"] = vocab_bound;
    json prompt_json = json::array();
    for (const PromptEntry& e : prompt)
        prompt_json.push_back({{"text", e.text}, {"role", to_string(e.role)}});
    out["prompt"] = std::move(prompt_json);
    out["scheduler"] = {{"steps", steps}, {"beta_start", beta_start}, {"beta_end", beta_end}};
    json layers = json::array();
    for (int layer : swap_layers)
        layers.push_back(layer);
    out["swap"] = {{"enabled", swap_enabled}, {"start_step", swap_start}, {"layers", layers}};
    out["orchestration"] = {
        {"enabled", orchestration_enabled},
        {"excluded_roles",
         roles_echo(std::vector<TokenRole>(excluded_roles.begin(), excluded_roles.end()))},
        {"epsilon_drop", epsilon_drop}};
    out["mask"] = {{"threshold", mask_threshold}, {"roles", roles_echo(mask_roles)}};
    if (reference_mask.has_value())
        out["reference_mask"] = grid_source_echo(*reference_mask);
    if (output_dir.has_value())
        out["output_dir"] = *output_dir;
    return out;
}

DualRunConfig RunConfig::dual_run_config() const {
    DualRunConfig cfg;
    cfg.seed = seed;
    cfg.grid_h = latent_h;
    cfg.grid_w = latent_w;
    cfg.scheduler = SchedulerConfig::linear(steps, beta_start, beta_end);
    cfg.swap_window.start_step = swap_start;
    cfg.swap_window.decoder_layers = swap_layers;
    cfg.orchestration.enabled = orchestration_enabled;
    cfg.orchestration.excluded_roles = excluded_roles;
    cfg.orchestration.eps_drop = epsilon_drop;
    cfg.swap_enabled = swap_enabled;
    cfg.mask.threshold = mask_threshold;
    cfg.mask.roles = mask_roles;
    return cfg;
}

std::vector<PromptToken> RunConfig::prompt_tokens() const {
    std::vector<PromptToken> tokens;
    tokens.reserve(prompt.size());
    for (const PromptEntry& e : prompt)
        tokens.push_back(PromptToken{fnv1a64(e.text) % vocab_bound, e.role});
    return tokens;
}

}  // namespace harmonize
