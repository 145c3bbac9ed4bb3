#pragma once

#include <vector>

#include "harmonize/latent.hpp"
#include "harmonize/numerics.hpp"

namespace harmonize {

// Linear-beta diffusion schedule with precomputed cumulative products.
// alpha_bar[0] = 1 by convention; alpha_bar is strictly decreasing and stays
// in (0, 1].
struct SchedulerConfig {
    int steps = 100;
    double beta_start = 1e-4;
    double beta_end = 0.02;
    std::vector<double> alpha_bar;  // [0 .. steps]

    static SchedulerConfig linear(int steps = 100, double beta_start = 1e-4,
                                  double beta_end = 0.02);

    double alpha_bar_at(int tau) const;
};

// Deterministic DDIM update (eta = 0):
//   x0_hat  = (z_tau - sqrt(1 - abar_tau) * eps_hat) / sqrt(abar_tau)
//   z_prev  = sqrt(abar_{tau-1}) * x0_hat + sqrt(1 - abar_{tau-1}) * eps_hat
LatentState ddim_step(const LatentState& z_tau, const LatentState& eps_hat, int tau,
                      const SchedulerConfig& sched);

}  // namespace harmonize
