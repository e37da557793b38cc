#pragma once

#include <vector>

#include <Eigen/Dense>

#include "shrinkage/dataset.hpp"

namespace shrinkage {

/// Prior of the spike-and-slab regression y = X Gamma beta + e.
struct VbHyper {
    Eigen::VectorXd prior_variance; // diag(D)
    double pi0 = 0.5;
    double a0 = 0.01;
    double b0 = 0.01;

    static VbHyper defaults(int p, double slab_variance = 10.0);
    void validate(int p) const;
};

/// Sufficient statistics of the data.
struct VbData {
    Eigen::MatrixXd XtX;
    Eigen::VectorXd Xty;
    double yty = 0.0;
    int n = 0;

    explicit VbData(const Dataset& d);
    int p() const { return static_cast<int>(XtX.rows()); }
};

/// q(beta) = N(mu, V), q(sigma^2) = InvGamma(a, b), q(gamma_j) = Bernoulli(pi_j).
struct VBState {
    Eigen::VectorXd mu;
    Eigen::MatrixXd V;
    double kappa = 1.0;
    double a = 1.0;
    double b = 1.0;
    Eigen::VectorXd pi;
    std::vector<double> elbo_trace;
    bool converged = false;
    int iterations = 0;
};

/// pi = pi0, kappa = 1 / var(y), mu = 0, V = D.
VBState cavi_init(const VbData& data, const VbHyper& hyper, double var_y);

void update_q_beta(VBState& s, const VbData& data, const VbHyper& hyper);
void update_q_sigma2(VBState& s, const VbData& data, const VbHyper& hyper);
/// Indicators in index order, each using the already updated ones.
void update_q_gamma(VBState& s, const VbData& data, const VbHyper& hyper);

/// One pass of the three updates; appends the ELBO.
void cavi_sweep(VBState& s, const VbData& data, const VbHyper& hyper);

double compute_elbo(const VBState& s, const VbData& data, const VbHyper& hyper);

/// Sweeps until the relative ELBO change falls below tol or max_iters sweeps have run.
VBState run_cavi(const Dataset& d, const VbHyper& hyper, double tol = 1e-8, int max_iters = 1000);

/// Exact log p(y) of the same model by enumerating gamma (p <= 20) and integrating sigma^2 numerically.
double log_evidence_spike_slab(const VbData& data, const VbHyper& hyper);

} // namespace shrinkage
