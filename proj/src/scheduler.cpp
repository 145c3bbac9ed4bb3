#include "harmonize/scheduler.hpp"

#include <cmath>

namespace harmonize {

SchedulerConfig SchedulerConfig::linear(int steps, double beta_start, double beta_end) {
    if (steps < 1)
        throw parameter_error("scheduler: steps must be >= 1");
    if (!(beta_start > 0.0) || !(beta_end < 1.0) || beta_start > beta_end)
        throw parameter_error("scheduler: betas must satisfy 0 < beta_start <= beta_end < 1");

    SchedulerConfig cfg;
    cfg.steps = steps;
    cfg.beta_start = beta_start;
    cfg.beta_end = beta_end;
    cfg.alpha_bar.resize(static_cast<std::size_t>(steps) + 1);
    cfg.alpha_bar[0] = 1.0;
    for (int tau = 1; tau <= steps; ++tau) {
        const double frac = steps > 1 ? static_cast<double>(tau - 1) / (steps - 1) : 0.0;
        const double beta = beta_start + (beta_end - beta_start) * frac;
        cfg.alpha_bar[static_cast<std::size_t>(tau)] =
            cfg.alpha_bar[static_cast<std::size_t>(tau) - 1] * (1.0 - beta);
    }
    return cfg;
}

double SchedulerConfig::alpha_bar_at(int tau) const {
    if (tau < 0 || tau > steps || alpha_bar.size() != static_cast<std::size_t>(steps) + 1)
        throw step_error("scheduler: alpha_bar index " + std::to_string(tau) +
                         " outside [0, " + std::to_string(steps) + "]");
    return alpha_bar[static_cast<std::size_t>(tau)];
}

LatentState ddim_step(const LatentState& z_tau, const LatentState& eps_hat, int tau,
                      const SchedulerConfig& sched) {
    if (tau < 1 || tau > sched.steps)
        throw step_error("ddim_step: tau " + std::to_string(tau) + " outside [1, " +
                         std::to_string(sched.steps) + "]");
    if (z_tau.grid_h != eps_hat.grid_h || z_tau.grid_w != eps_hat.grid_w ||
        z_tau.dim() != eps_hat.dim())
        throw dimension_error("ddim_step: prediction shape " + shape_str(eps_hat.features) +
                              " vs latent " + shape_str(z_tau.features));

    const double abar = sched.alpha_bar_at(tau);
    const double abar_prev = sched.alpha_bar_at(tau - 1);
    const Mat x0_hat = (z_tau.features - std::sqrt(1.0 - abar) * eps_hat.features) / std::sqrt(abar);
    LatentState out;
    out.grid_h = z_tau.grid_h;
    out.grid_w = z_tau.grid_w;
    out.features = std::sqrt(abar_prev) * x0_hat + std::sqrt(1.0 - abar_prev) * eps_hat.features;
    return out;
}

}  // namespace harmonize
