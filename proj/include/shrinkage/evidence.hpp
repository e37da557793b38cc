#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shrinkage/dataset.hpp"
#include "shrinkage/gibbs.hpp"

namespace shrinkage {

/// beta | sigma^2 ~ N(0, sigma^2 D), sigma^2 ~ InvGamma(v0 / 2, s0 / 2).
struct ConjugateModel {
    Eigen::MatrixXd D;
    double v0 = 1.0;
    double s0 = 1.0;
    std::vector<int> columns; // empty selects every column

    static ConjugateModel ridge(int p, double d, double v0 = 1.0, double s0 = 1.0);
    void validate(int p_total) const;
};

struct ConjugatePosterior {
    Eigen::VectorXd mean; // mu* = V X'y
    Eigen::MatrixXd V;    // (X'X + D^-1)^-1
    double v = 0.0;       // v0 + n
    double s = 0.0;       // s0 + y'y - mu*' V^-1 mu*
    double log_marginal = 0.0;
};

struct EvidenceResult {
    double log_marginal = 0.0;
    double posterior_model_prob = 1.0;
    std::map<std::string, double> criteria;
};

ConjugatePosterior conjugate_posterior(const ConjugateModel& model, const Dataset& data);
double log_marginal_conjugate(const ConjugateModel& model, const Dataset& data);

/// Univariate Student-t with squared scale `scale`.
struct StudentT {
    double location = 0.0;
    double scale = 1.0;
    double dof = 1.0;
    double log_density(double x) const;
    double density(double x) const;
};

StudentT predictive_t(const ConjugateModel& model, const Dataset& data, const Eigen::VectorXd& x_new);

/// iid draws from the exact conjugate posterior.
DrawStore sample_conjugate_posterior(const ConjugateModel& model, const Dataset& data, int draws, std::uint64_t seed);

/// Joint posterior mode (mu*, s / (v + p + 2)).
std::pair<Eigen::VectorXd, double> conjugate_posterior_mode(const ConjugateModel& model, const Dataset& data);

double gaussian_loglik(const Dataset& data, const Eigen::VectorXd& beta, double sigma2);

struct DicPlugin {
    Eigen::VectorXd beta;
    double sigma2 = 1.0;
};

/// bic = -2 mode_loglik + p log n. With draws: dic = -4 E[log p(y | beta, sigma^2)] + 2 log p(y | plug-in), where
/// the plug-in defaults to the posterior mean; p_d is the effective number of parameters.
std::map<std::string, double> info_criteria(const DrawStore& draws, const Dataset& data, double mode_loglik,
                                            int p_count, int n_count,
                                            const std::optional<DicPlugin>& plugin = std::nullopt);

/// Savage-Dickey ratio at beta_j = beta_star: marginal posterior over marginal prior density of beta_j,
/// both Student-t under conjugacy. This is the Bayes factor of the restricted model against the
/// unrestricted one, returned on the log scale.
double log_sddr(const ConjugateModel& model, const Dataset& data, int coordinate, double beta_star);
double sddr(const ConjugateModel& model, const Dataset& data, int coordinate, double beta_star);

enum class GRule { fixed, ratio };

struct BmaOptions {
    GRule rule = GRule::ratio; // ratio: g = p_r / n
    double g = 1.0;
    double pi0 = 0.5;
    std::size_t keep_models = 4096;
};

struct BmaModel {
    std::vector<int> columns;
    double g = 0.0;
    double log_marginal = 0.0;
    double log_prior = 0.0;
    double probability = 0.0;
    Eigen::VectorXd coef; // (1 / (1 + g)) * OLS on the model's columns
};

struct BmaResult {
    std::vector<BmaModel> models; // highest probability first
    Eigen::VectorXd inclusion;
    std::vector<int> median_model;
    Eigen::VectorXd coef;
    std::size_t evaluated = 0;
    std::size_t singular = 0; // rank-deficient submodels, given probability zero
};

/// Enumerates all 2^p submodels under beta_r | sigma^2 ~ N(0, (sigma^2 / g)(X_r'X_r)^-1) and
/// p(sigma^2) proportional to 1 / sigma^2, after demeaning y and X. p <= 25.
BmaResult bma_enumerate_gprior(const Dataset& data, const BmaOptions& options = {});

} // namespace shrinkage
