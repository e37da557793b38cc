#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "shrinkage/gibbs.hpp"

namespace shrinkage {

using ScaleUpdate = std::function<void(ScaleState&, const Eigen::VectorXd&, double, const PriorSpec&, RngStream&)>;

struct GewekeOptions {
    int n = 4;
    int p = 3;
    long sweeps = 200000;
    std::uint64_t seed = 7;
    double sigma_a0 = 3.0;
    double sigma_b0 = 2.0;
    MvnKernel kernel = MvnKernel::rue;
    BlockMode block_mode = BlockMode::three_block;
    int batches = 50;
    // Replaces the family's scale update in the Gibbs arm (fault injection).
    ScaleUpdate scale_update_override;
};

struct GewekeStat {
    std::string name;
    double forward_mean;
    double gibbs_mean;
    double z;
};

struct GewekeReport {
    std::vector<GewekeStat> stats;
    double max_abs_z = 0.0;
};

/// Hyperparameters with moderate tails, used by the joint-distribution tests.
PriorSpec geweke_spec(Family family);

/// Draws (beta, sigma^2, scales) from the prior.
LatentState simulate_prior(const PriorSpec& spec, int p, RngStream& rng);

/// Compares forward prior-data simulation with Gibbs sweeps that resimulate data each step.
/// Throws config_error for improper priors.
GewekeReport geweke_joint_test(const PriorSpec& spec, const GewekeOptions& options);

} // namespace shrinkage
