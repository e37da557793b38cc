#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shrinkage/dataset.hpp"
#include "shrinkage/rng.hpp"

namespace shrinkage::testing {

struct Moments {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

inline Moments moments(const Eigen::MatrixXd& draws) {
    Moments m;
    m.mean = draws.colwise().mean().transpose();
    Eigen::MatrixXd centered = draws.rowwise() - m.mean.transpose();
    m.cov = centered.transpose() * centered / static_cast<double>(draws.rows() - 1);
    return m;
}

// Largest |mean difference| in units of the Monte Carlo standard error of the
// difference between two independent samples of size n each.
inline double max_mean_z(const Moments& a, const Moments& b, double n) {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < a.mean.size(); ++j) {
        double se = std::sqrt((a.cov(j, j) + b.cov(j, j)) / n);
        worst = std::max(worst, std::abs(a.mean(j) - b.mean(j)) / se);
    }
    return worst;
}

// Same for covariance entries, using the Gaussian variance of a sample covariance.
inline double max_cov_z(const Moments& a, const Moments& b, double n) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.cov.rows(); ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            double va = (a.cov(i, i) * a.cov(j, j) + a.cov(i, j) * a.cov(i, j)) / n;
            double vb = (b.cov(i, i) * b.cov(j, j) + b.cov(i, j) * b.cov(i, j)) / n;
            worst = std::max(worst, std::abs(a.cov(i, j) - b.cov(i, j)) / std::sqrt(va + vb));
        }
    }
    return worst;
}

// Max mean z-score of a sample against exact moments.
inline double max_mean_z_exact(const Eigen::MatrixXd& draws, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
    Eigen::VectorXd m = draws.colwise().mean().transpose();
    double worst = 0.0;
    for (Eigen::Index j = 0; j < m.size(); ++j) {
        worst = std::max(worst, std::abs(m(j) - mean(j)) / std::sqrt(cov(j, j) / static_cast<double>(draws.rows())));
    }
    return worst;
}

inline double max_cov_z_exact(const Eigen::MatrixXd& draws, const Eigen::MatrixXd& cov) {
    Moments s = moments(draws);
    const double n = static_cast<double>(draws.rows());
    double worst = 0.0;
    for (Eigen::Index i = 0; i < cov.rows(); ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            double v = (cov(i, i) * cov(j, j) + cov(i, j) * cov(i, j)) / n;
            worst = std::max(worst, std::abs(s.cov(i, j) - cov(i, j)) / std::sqrt(v));
        }
    }
    return worst;
}

// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    while (i < a.size() && j < b.size()) {
        double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

// Critical value of the two-sample KS statistic at level 0.01 (asymptotic).
inline double ks_critical_01(std::size_t na, std::size_t nb) {
    const double a = static_cast<double>(na);
    const double b = static_cast<double>(nb);
    return 1.6276 * std::sqrt((a + b) / (a * b));
}

// Batch-means standard error of the mean of a correlated series.
inline double batch_means_se(const std::vector<double>& x, int batches = 50) {
    const std::size_t size = x.size() / static_cast<std::size_t>(batches);
    std::vector<double> means;
    for (int b = 0; b < batches; ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < size; ++i) s += x[static_cast<std::size_t>(b) * size + i];
        means.push_back(s / static_cast<double>(size));
    }
    double m = 0.0;
    for (double v : means) m += v;
    m /= batches;
    double var = 0.0;
    for (double v : means) var += (v - m) * (v - m);
    var /= (batches - 1);
    return std::sqrt(var / batches);
}

// y = X beta + sigma e with iid standard normal X and e.
inline Dataset simulate_linear(int n, const Eigen::VectorXd& beta, double sigma, std::uint64_t seed) {
    RngStream rng(seed, 0);
    Eigen::MatrixXd X(n, beta.size());
    for (Eigen::Index i = 0; i < X.size(); ++i) X(i) = rng.normal();
    Eigen::VectorXd y = X * beta;
    for (int i = 0; i < n; ++i) y(i) += sigma * rng.normal();
    return make_dataset(X, y);
}

// Centered design with X'X = n I exactly; the first six coefficients are the study signals and
// sigma^2 gives a population R^2 of 0.8.
inline Dataset orthogonal_fixture(int n, int p, std::uint64_t seed) {
    RngStream rng(seed, 0);
    Eigen::MatrixXd Z(n, p);
    for (Eigen::Index i = 0; i < Z.size(); ++i) Z(i) = rng.normal();
    Z.rowwise() -= Z.colwise().mean();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Z);
    Eigen::MatrixXd X = qr.householderQ() * Eigen::MatrixXd::Identity(n, p) * std::sqrt(static_cast<double>(n));
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    const double signals[] = {1.5, -1.5, 2.0, -2.0, 2.5, -2.5};
    for (int j = 0; j < 6 && j < p; ++j) beta(j) = signals[j];
    const double sigma = std::sqrt(beta.squaredNorm() / 4.0);
    Eigen::VectorXd y = X * beta;
    for (int i = 0; i < n; ++i) y(i) += sigma * rng.normal();
    y.array() -= y.mean();
    return make_dataset(X, y);
}

inline std::string data_path(const std::string& name) { return std::string(SHRINKAGE_TEST_DATA) + "/" + name; }

} // namespace shrinkage::testing
