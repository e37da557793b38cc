#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shrinkage/kernels.hpp"
#include "shrinkage/rng.hpp"

namespace shrinkage {

enum class Family {
    jeffreys,
    student_t,
    lasso_pc,
    fused_lasso,
    group_lasso,
    elastic_net_kyung,
    gdp,
    normal_gamma,
    dirichlet_laplace,
    horseshoe_ms,
    horseshoe_slice,
    tpb,
    ssvs_fixed,
    ssvs_nh,
    ssvs_lasso1,
    ssvs_lasso2,
    ssvs_lasso3,
    kuo_mallick
};

enum class Scaling { conjugate, independent };

const std::vector<std::string>& family_names();
std::string family_name(Family f);
std::optional<Family> parse_family(const std::string& name);
bool is_ssvs(Family f);
bool is_selection(Family f);
/// Scaling used when the configuration does not override it.
Scaling default_scaling(Family f);

/// Prior family with its fixed hyperparameters.
struct PriorSpec {
    Family family = Family::horseshoe_ms;
    Scaling scaling = Scaling::conjugate;

    // Error variance prior sigma^2 ~ InvGamma(a0, b0); zeros give the improper 1/sigma^2 limit.
    double sigma_a0 = 0.0;
    double sigma_b0 = 0.0;
    // Reproduce the printed degrees of freedom of the improper-prior conditionals.
    bool legacy_dof = false;

    double rho = 0.01;  // student_t shape
    double xi = 0.01;   // student_t rate

    double r = 1.0;      // lasso_pc, fused, group, gdp rate-prior shape
    double delta = 1.78; // matching rate
    bool learn_lambda = true;
    double lambda_sq = 1.0;  // lasso_pc and group starting or fixed value
    double lambda1_sq = 1.0; // fused first penalty
    double lambda2_sq = 1.0; // fused difference penalty
    bool fused_differences = true;

    std::vector<int> groups; // zero-based group index per coefficient

    double r1 = 1.0;
    double delta1 = 1.0;
    double r2 = 1.0;
    double delta2 = 1.0;

    double ng_lambda = 1.0;
    double ng_gamma2 = 1.0;

    double dl_alpha = 0.5;

    double tpb_a = 0.5;
    double tpb_b = 0.5;

    double tau0_sq = 0.01;
    double tau1_sq = 4.0;
    double theta = 0.5;
    bool learn_theta = true;
    double beta_c = 1.0;
    double beta_d = 1.0;
    double c1 = 1e-4;
    double c2 = 1e-4;
    double lambda0 = 20.0;
    double lambda1 = 1.0;

    double km_tau2 = 10.0;
    double km_inclusion = 0.5;

    /// Throws config_error when hyperparameters violate their constraints.
    void validate(int p) const;
};

/// Fills data-dependent defaults (Narisetty-He constants). var_y is the sample variance of y.
PriorSpec resolve_for_data(const PriorSpec& spec, int n, int p, double var_y);

struct NhDefaults {
    double tau0_sq;
    double tau1_sq;
    double theta;
};
NhDefaults narisetty_he_defaults(int n, int p, double sigma_hat2);

/// Prior-specific auxiliary variables of one chain.
struct ScaleState {
    Eigen::Index dim = 0;         // number of coefficients
    Eigen::VectorXd local_tau2;   // tau_j^2 (slab variance for SSVS, per-group for group lasso)
    Eigen::VectorXd spike_tau2;   // SSVS spike variances tau_0j^2
    Eigen::VectorXd fused_omega2; // length p-1
    Eigen::VectorXd dl_psi;
    Eigen::VectorXd dl_T;
    Eigen::VectorXd local_lambda; // GDP lambda_j, TPB lambda_j, horseshoe lambda_j^2
    Eigen::VectorXd aux;          // horseshoe v_j
    std::map<std::string, double> global;
    Eigen::VectorXi gamma;

    double get(const std::string& key) const { return global.at(key); }
};

ScaleState initial_scales(const PriorSpec& spec, int p);

/// Prior precision D^{-1}: diagonal plus optional tridiagonal off-diagonal (fused lasso).
struct PriorPrecision {
    Eigen::VectorXd diag;
    Eigen::VectorXd offdiag;
};

/// Effective prior variance diag(D); for the fused lasso the inverse of the precision diagonal.
Eigen::VectorXd prior_variance(const PriorSpec& spec, const ScaleState& state);
PriorPrecision prior_precision(const PriorSpec& spec, const ScaleState& state);

inline constexpr double kBetaFloor = 1e-10;
inline constexpr double kTauFloor = 1e-12;

/// (mean, shape) of the inverse Gaussian conditional of 1/tau^2 under a Laplace-type mixture.
struct IgParams {
    double mu;
    double lambda;
};
IgParams laplace_ig_params(double beta_sq, double lambda_sq, double s);

struct GammaParams {
    double shape;
    double rate;
};

struct InvGammaParams {
    double shape;
    double scale;
};

// Conditional distributions of individual blocks; s is sigma^2 under conjugate scaling, 1 otherwise.
/// 1/tau_j^2 under the Student-t prior.
GammaParams student_t_conditional(double beta, double s, const PriorSpec& spec);
/// Squared Laplace rate given its p exponential mixing variances (lasso, fused blocks).
GammaParams lambda_sq_conditional(const Eigen::VectorXd& tau2, double r, double delta);
/// Group lasso lambda^2 given the K group variances of p coefficients.
GammaParams group_lambda_sq_conditional(const Eigen::VectorXd& group_tau2, Eigen::Index p, const PriorSpec& spec);
/// Ridge weight lambda_2 of the elastic net.
GammaParams elastic_net_ridge_conditional(const Eigen::VectorXd& beta, double s, const PriorSpec& spec);
/// GDP rate lambda_j with tau_j integrated out.
GammaParams gdp_rate_conditional(double beta, double s, const PriorSpec& spec);
/// tau_j^2 under the normal-gamma prior.
GigParams normal_gamma_conditional(double beta, double s, const PriorSpec& spec);
InvGammaParams horseshoe_local_conditional(double beta, double v, double tau2, double s);
InvGammaParams horseshoe_aux_conditional(double lambda_sq);
GammaParams tpb_phi_conditional(const Eigen::VectorXd& lambda, double omega, const PriorSpec& spec);
GammaParams tpb_omega_conditional(double phi);

/// Inclusion probability of the slab component, computed in log space.
double ssvs_inclusion_probability(double beta, double s, double tau0_sq, double tau1_sq, double theta);

/// Positive crossing point of the spike and slab densities.
double chipman_threshold(double tau0_sq, double tau1_sq);

void update_jeffreys(ScaleState& state, const Eigen::VectorXd& beta, double sigma2, const PriorSpec& spec, RngStream& rng);
void update_student_t(ScaleState& state, const Eigen::VectorXd& beta, double sigma2, const PriorSpec& spec, RngStream& rng);
void update_lasso_pc(ScaleState& state, const Eigen::VectorXd& beta, double sigma2, const PriorSpec& spec, RngStream& rng);
void update_fused_lasso(ScaleState& state, const Eigen::VectorXd& beta, double sigma2, const PriorSpec& spec, RngStream& rng);
void update_group_lasso(ScaleState& state, const Eigen::VectorXd& beta, double sigma2, const PriorSpec& spec, RngStream& rng);
void update_elastic_net(ScaleState& state, const Eigen::VectorXd& beta, double sigma2, const PriorSpec& spec, RngStream& rng);
void update_gdp(ScaleState& state, const Eigen::VectorXd& beta, double sigma2, const PriorSpec& spec, RngStream& rng);
void update_normal_gamma(ScaleState& state, const Eigen::VectorXd& beta, double sigma2, const PriorSpec& spec, RngStream& rng);
void update_dirichlet_laplace(ScaleState& state, const Eigen::VectorXd& beta, double sigma2, const PriorSpec& spec, RngStream& rng);
void update_horseshoe(ScaleState& state, const Eigen::VectorXd& beta, double sigma2, const PriorSpec& spec, RngStream& rng);
void update_tpb(ScaleState& state, const Eigen::VectorXd& beta, double sigma2, const PriorSpec& spec, RngStream& rng);
void update_ssvs(ScaleState& state, const Eigen::VectorXd& beta, double sigma2, const PriorSpec& spec, RngStream& rng);
/// The part of update_ssvs after the indicator sweep: theta and the variant's slab/spike variances.
void update_ssvs_hyper(ScaleState& state, const Eigen::VectorXd& beta, double sigma2, const PriorSpec& spec, RngStream& rng);

/// Kuo-Mallick indicator sweep; theta = beta * gamma enters the likelihood.
void update_kuo_mallick(ScaleState& state, const Eigen::VectorXd& beta, double sigma2, const PriorSpec& spec,
                        const Eigen::MatrixXd& X, const Eigen::VectorXd& y, RngStream& rng);

/// Dispatches to the family's update. Kuo-Mallick is handled by the Gibbs engine.
void update_scales(ScaleState& state, const Eigen::VectorXd& beta, double sigma2, const PriorSpec& spec, RngStream& rng);

} // namespace shrinkage
