#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "shrinkage/dataset.hpp"
#include "shrinkage/priors.hpp"
#include "shrinkage/rng.hpp"

namespace shrinkage {

enum class MvnKernel { direct, rue, bhattacharya, automatic };
enum class BlockMode { three_block, scalable, skinny };

struct SamplerPlan {
    PriorSpec prior;
    MvnKernel kernel = MvnKernel::automatic;
    BlockMode block_mode = BlockMode::three_block;
    int iterations = 5000;
    int burn_in = 1000;
    int thin = 1;
    int chains = 2;
    std::uint64_t seed = 20240101;
    int threads = 1;
    bool store_scales = true;

    void validate(int n, int p) const;
    int retained_per_chain() const { return (iterations - burn_in + thin - 1) / thin; }
};

/// Resolves the automatic kernel: Bhattacharya iff p > n, else Rue.
MvnKernel resolve_kernel(MvnKernel k, int n, int p);

struct LatentState {
    Eigen::VectorXd beta;
    double sigma2 = 1.0;
    ScaleState scales;
};

/// Sufficient statistics of (X, y) reused across sweeps.
struct ModelCache {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    Eigen::MatrixXd XtX;
    Eigen::VectorXd Xty;
    double yty = 0.0;
    Eigen::VectorXd col_sq;

    ModelCache(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);
    void set_response(const Eigen::VectorXd& y);
    int n() const { return static_cast<int>(X.rows()); }
    int p() const { return static_cast<int>(X.cols()); }
};

/// Conditional InvGamma parameters of sigma^2 given beta in the three-block sampler.
InvGammaParams sigma2_conditional(const PriorSpec& spec, const ModelCache& cache, const Eigen::VectorXd& beta,
                                  const PriorPrecision& prec);

/// Draw of beta from its Gaussian full conditional.
Eigen::VectorXd draw_beta(const PriorSpec& spec, const ModelCache& cache, double sigma2, const PriorPrecision& prec,
                          MvnKernel kernel, RngStream& rng);

LatentState initial_state(const PriorSpec& spec, const ModelCache& cache);

/// beta | scales, sigma^2 then sigma^2 | beta, scales.
void step_beta_sigma(LatentState& state, const ModelCache& cache, const PriorSpec& spec, MvnKernel kernel, RngStream& rng);
/// sigma^2 | scales with beta integrated out, then beta | sigma^2, scales. Conjugate scaling only.
void step_scalable(LatentState& state, const ModelCache& cache, const PriorSpec& spec, RngStream& rng);
/// Skinny Gibbs for SSVS families: (beta_A, beta_I), gamma, sigma^2, then hyperparameters.
void step_skinny(LatentState& state, const ModelCache& cache, const PriorSpec& spec, RngStream& rng);
/// Kuo-Mallick sweep: beta | gamma, gamma | beta, sigma^2.
void step_kuo_mallick(LatentState& state, const ModelCache& cache, const PriorSpec& spec, MvnKernel kernel, RngStream& rng);

/// One complete Gibbs iteration for the plan's family and block mode.
void gibbs_sweep(LatentState& state, const ModelCache& cache, const PriorSpec& spec, MvnKernel kernel, BlockMode mode,
                 RngStream& rng);

/// Retained draws; rows are (chain, iteration) pairs in chain-major order.
struct DrawStore {
    Eigen::MatrixXd beta;
    Eigen::VectorXd sigma2;
    Eigen::MatrixXi gamma; // empty for non-selection families
    Eigen::MatrixXd scales; // effective diag(D) per draw, may be empty
    Eigen::VectorXi chain;
    Eigen::VectorXi iteration;
    std::uint64_t seed = 0;
    bool gamma_masks_beta = false; // kuo_mallick: the coefficient is beta * gamma

    Eigen::Index rows() const { return beta.rows(); }
    Eigen::Index p() const { return beta.cols(); }
    bool has_gamma() const { return gamma.size() > 0; }
    /// Regression coefficient draws.
    Eigen::MatrixXd coefficients() const;

    static DrawStore merge(const std::vector<DrawStore>& parts);
};

DrawStore run_chain(const SamplerPlan& plan, const Dataset& data, int chain_id);
DrawStore run_chains(const SamplerPlan& plan, const Dataset& data);

/// Posterior summaries over a DrawStore.
Eigen::VectorXd posterior_mean(const DrawStore& store);
Eigen::VectorXd inclusion_probabilities(const DrawStore& store);

} // namespace shrinkage
