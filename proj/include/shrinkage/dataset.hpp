#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace shrinkage {

/// Response, design and the affine maps applied during preprocessing.
struct Dataset {
    Eigen::VectorXd y;
    Eigen::MatrixXd X;
    std::vector<std::string> column_names;
    std::string response_name = "y";
    Eigen::VectorXd x_mean;
    Eigen::VectorXd x_sd;
    double y_mean = 0.0;
    bool standardized = false;
    bool demeaned = false;
    std::vector<std::string> dropped_columns;

    int n() const { return static_cast<int>(X.rows()); }
    int p() const { return static_cast<int>(X.cols()); }
};

Dataset make_dataset(Eigen::MatrixXd X, Eigen::VectorXd y, std::vector<std::string> names = {});

/// Drops zero-variance columns, then optionally centers and scales columns to unit sample
/// sd and demeans y. Returns one warning per dropped column.
std::vector<std::string> preprocess(Dataset& data, bool standardize, bool demean_y);

/// Coefficients on the original covariate scale.
Eigen::VectorXd destandardize(const Dataset& data, const Eigen::VectorXd& beta_std);
/// Intercept on the original scale for original-scale coefficients.
double recover_intercept(const Dataset& data, const Eigen::VectorXd& beta_orig);

double sample_variance(const Eigen::VectorXd& v);

/// Reads a header-first CSV file and applies preprocess(). Throws config_error naming the
/// offending row and column.
Dataset load_csv(const std::string& path, const std::string& response_column, bool standardize = true,
                 bool demean_y = true, std::vector<std::string>* warnings = nullptr);

} // namespace shrinkage
