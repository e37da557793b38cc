#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shrinkage/dataset.hpp"
#include "shrinkage/gibbs.hpp"
#include "shrinkage/kernels.hpp"
#include "shrinkage/rng.hpp"

namespace shrinkage {

struct QuantileSpec {
    std::vector<double> levels{0.05, 0.10, 0.25, 0.5, 0.75, 0.90, 0.95};
    double prior_tau = 100.0; // D = tau I
    double n0 = 0.01;
    double s0 = 0.01;
    bool add_intercept = true; // prepend a column of ones to X

    void validate() const;
};

struct QuantileLatents {
    Eigen::VectorXd beta;
    double sigma2 = 1.0;
    Eigen::VectorXd z;
    double theta = 0.0;
    double kappa2 = 8.0;
};

struct AlConstants {
    double theta;
    double kappa2;
};

/// theta = (1 - 2r) / (r (1 - r)), kappa^2 = 2 / (r (1 - r)).
AlConstants al_constants(double r);

/// Asymmetric Laplace density r(1-r)/s exp(-rho_r(eps)/s).
double al_density(double eps, double r, double s);
/// The same density obtained by integrating N(theta z, s kappa^2 z) against Exp(mean s) over z.
double al_mixture_density(double eps, double r, double s);

/// beta = 0, sigma^2 = 1, z = 1.
QuantileLatents quantile_initial_state(Eigen::Index n, Eigen::Index p, double r);

/// Precision system of the beta conditional: gram X'U^-1 X, rhs X'U^-1 (y - theta z), prior precision 1/tau.
PrecisionSystem quantile_beta_system(const QuantileLatents& state, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                     const QuantileSpec& spec);

/// One sweep: beta, then sigma_r^2, then every z_i through its inverse-Gaussian reciprocal.
void quantile_gibbs_step(QuantileLatents& state, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const QuantileSpec& spec, RngStream& rng);

struct QuantileGridResult {
    std::map<double, DrawStore> draws;
    std::map<double, std::string> failures;
    Eigen::MatrixXd design; // the design used, including the intercept column when added
    std::vector<std::string> column_names;
    double crossing_rate = 0.0; // share of draws in which adjacent fitted quantiles cross at some design point
};

/// One chain per level on its own RNG stream (seed, level index); levels run on plan.threads threads.
QuantileGridResult run_quantile_grid(const Dataset& data, const QuantileSpec& spec, const SamplerPlan& plan);

} // namespace shrinkage
