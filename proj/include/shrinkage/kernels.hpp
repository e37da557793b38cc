#pragma once

#include <Eigen/Dense>

#include "shrinkage/rng.hpp"

namespace shrinkage {

/// Linear system Q = gram + D^{-1} (+ optional symmetric tridiagonal part) with right-hand side.
struct PrecisionSystem {
    Eigen::MatrixXd gram;
    Eigen::VectorXd prior_precision_diag;
    Eigen::VectorXd rhs;
    // Off-diagonal of a tridiagonal prior precision, length p-1, or empty.
    Eigen::VectorXd prior_precision_offdiag;

    Eigen::Index dim() const { return rhs.size(); }
    void validate() const;
    Eigen::MatrixXd precision() const;
};

/// Density proportional to x^{nu-1} exp(-(a x + b / x) / 2) on x > 0.
struct GigParams {
    double nu;
    double a;
    double b;
};

struct InvGaussParams {
    double mu;
    double lambda;
};

/// Lower Cholesky factor of a symmetric matrix. Adds jitter 1e-10 * trace / p once
/// on failure; a second failure throws numeric_error naming the failing pivot.
Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& Q);

Eigen::VectorXd sample_mvn_direct(const PrecisionSystem& sys, RngStream& rng);
Eigen::VectorXd sample_mvn_rue(const PrecisionSystem& sys, RngStream& rng);

/// Draw from N(V X'y, V), V = (X'X + diag(D)^{-1})^{-1}, via an n x n solve.
Eigen::VectorXd sample_mvn_bhattacharya(const Eigen::MatrixXd& X, const Eigen::VectorXd& D_diag,
                                        const Eigen::VectorXd& y_scaled, RngStream& rng);

/// Counts proposals made by sample_gig, for rejection-rate diagnostics.
struct GigCounter {
    long long draws = 0;
    long long proposals = 0;
};

double sample_gig(const GigParams& params, RngStream& rng, GigCounter* counter = nullptr);
double gig_log_density_unnormalized(const GigParams& params, double x);

double sample_inverse_gaussian(const InvGaussParams& params, RngStream& rng);

/// One slice transition for density proportional to eta^{shape-1} exp(-mu eta) / (1 + eta).
double slice_halfcauchy(double current, double mu, double shape, RngStream& rng);

} // namespace shrinkage
