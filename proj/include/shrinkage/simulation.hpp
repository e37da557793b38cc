#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shrinkage/dataset.hpp"
#include "shrinkage/gibbs.hpp"
#include "shrinkage/rng.hpp"

namespace shrinkage {

struct SimConfig {
    int n = 100;
    int p = 50;
    double r2_pop = 0.8;
    double sigma2_true = 3.0;
    std::vector<double> beta_template{1.5, -1.5, 2.0, -2.0, 2.5, -2.5};
    int replications = 20;
    std::uint64_t seed = 20240101;

    void validate() const;
};

struct SimData {
    Dataset data;        // standardized X, demeaned y
    Eigen::VectorXd beta; // true coefficients c * template on the original scale
    double c = 0.0;
};

/// Scale factor c with c^2 |template|^2 / sigma^2 = R^2 / (1 - R^2).
double signal_scale(const SimConfig& config);

/// X ~ N(0, I), y = X beta + N(0, sigma^2 I); covariates standardized and y demeaned.
SimData generate_dgp(const SimConfig& config, RngStream& rng);

/// 2-means on |means|: the cluster with the larger centroid is the signal set, unless the
/// ratio of the two centroids is below 1.5, in which case everything is noise.
Eigen::VectorXi classify_signals(const Eigen::VectorXd& posterior_means);
/// Alternative rule: the central credible interval at `level` excludes zero.
Eigen::VectorXi classify_credible(const Eigen::MatrixXd& coefficient_draws, double level = 0.95);

struct Metrics {
    double sigma2_hat = 0.0;
    double bias = 0.0;
    double mse = 0.0;
    double fn = 0.0;
    double fp = 0.0;
    double tp = 0.0;
};

/// The signal set is the support of true_beta.
Metrics compute_metrics(const Eigen::VectorXd& true_beta, const Eigen::VectorXd& estimates,
                        const Eigen::VectorXi& selections, double sigma2_hat);

enum class StudyId { ssvs_lasso_table, conj_vs_ind_table };
enum class ClassifyRule { two_means, credible_interval };

std::optional<StudyId> parse_study(const std::string& name);
std::string study_name(StudyId id);

struct StudyMethod {
    std::string label;
    PriorSpec prior;
};

/// Rows of the two tables with their pinned hyperparameters.
std::vector<StudyMethod> study_methods(StudyId id);

struct StudyCell {
    int p = 50;
    double r2_pop = 0.8;
};

struct StudyOptions {
    std::vector<StudyCell> cells; // empty: the paper's p x R^2 grid
    std::vector<std::string> methods; // empty: every row
    SimConfig base;
    ClassifyRule classify = ClassifyRule::two_means;
    int threads = 1;
    /// Called after each finished (cell, method, replication) task.
    std::function<void(const std::string&)> progress;
};

struct StudyRow {
    StudyCell cell;
    std::string method;
    Metrics mean;
    int replications_ok = 0;
    std::vector<std::string> failures;
};

struct StudyTable {
    StudyId id;
    std::vector<StudyRow> rows;
};

/// Desk-scale defaults: 20 replications, 4000 iterations, 1000 burn-in, one chain.
SamplerPlan desk_plan();
/// The paper's 100 replications with longer chains.
SamplerPlan full_plan();
inline constexpr int kFullReplications = 100;

/// Fresh data per replication; dataset k of a cell is drawn from stream (seed, k) and shared by every
/// method, and each chain seed is derived from (seed, cell, method, replication).
StudyTable run_study(StudyId id, const StudyOptions& options, const SamplerPlan& plan);

std::string format_table_text(const StudyTable& table);
std::string format_table_csv(const StudyTable& table);

} // namespace shrinkage
