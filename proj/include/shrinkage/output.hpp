#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shrinkage/config.hpp"
#include "shrinkage/dataset.hpp"
#include "shrinkage/gibbs.hpp"

namespace shrinkage {

struct CoefSummary {
    std::string name;
    double mean = 0.0;
    double sd = 0.0;
    double q025 = 0.0;
    double q50 = 0.0;
    double q975 = 0.0;
    double pip = -1.0; // negative when the family has no indicators
    bool median_model = false;
};

/// Linear-interpolation sample quantile of sorted values.
double sorted_quantile(const std::vector<double>& sorted, double q);

/// Per-coefficient summaries of the coefficient draws (beta * gamma for Kuo-Mallick).
std::vector<CoefSummary> summarize(const DrawStore& store, const std::vector<std::string>& names);

/// Columns chain, iter, beta_1..beta_p, sigma2 and gamma_1..gamma_p when the family has indicators.
std::string draws_csv(const DrawStore& store);
/// The same matrix as raw little-endian float64 behind a 16-byte header: "SHRK", u32 rows, u32 cols, u32 zero.
std::vector<char> draws_binary(const DrawStore& store);
Eigen::MatrixXd read_draws_binary(const std::string& path);

/// 64-bit FNV-1a hash, printed as 16 hex digits.
std::string config_hash(const std::string& text);

/// Writes draws.csv, summary.json, run_manifest.json and config.resolved into config.output.directory,
/// plus draws.bin when requested. Throws config_error when the directory cannot be written.
void write_outputs(const DrawStore& store, const RunConfig& config, const Dataset& data,
                   const std::vector<std::string>& warnings = {});

/// Writes `contents` to `dir/name`, creating `dir` if needed.
void write_text_file(const std::string& dir, const std::string& name, const std::string& contents);

/// Loads the resolved configuration stored in a run manifest.
RunConfig config_from_manifest(const std::string& path);

} // namespace shrinkage
