#pragma once

#include <string>
#include <utility>
#include <vector>

#include "shrinkage/gibbs.hpp"

namespace shrinkage {

struct DataBlock {
    std::string path;
    std::string response = "y";
    bool standardize = true;
    bool demean = true;
};

struct OutputBlock {
    std::string directory = "shrinkage_out";
    bool binary = false; // also write draws.bin
};

struct EvidenceBlock {
    double prior_variance = 10.0; // D = d I
    double v0 = 1.0;
    double s0 = 1.0;
    int draws = 10000;
    bool bma = false;
    std::string g_rule = "ratio";
    double g = 1.0;
};

struct QuantileBlock {
    std::vector<double> levels{0.05, 0.10, 0.25, 0.5, 0.75, 0.90, 0.95};
    double prior_tau = 100.0;
};

struct RunConfig {
    SamplerPlan sampler; // sampler.prior holds the prior block
    bool scaling_explicit = false;
    DataBlock data;
    OutputBlock output;
    EvidenceBlock evidence;
    QuantileBlock quantile;

    const PriorSpec& prior() const { return sampler.prior; }
    /// Checks every constraint that does not depend on the data.
    void validate() const;
};

using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

/// Parses `section.key = value` lines; `#` starts a comment. Throws config_error with the line number.
ConfigEntries parse_config_text(const std::string& text);
ConfigEntries read_config_file(const std::string& path);

/// Applies entries in order onto defaults, then fills the family's default scaling and validates.
/// Unknown keys and family names are errors carrying a did-you-mean list.
RunConfig build_config(const ConfigEntries& entries);

/// File entries followed by overrides, so later overrides win.
RunConfig parse_config(const std::string& path, const ConfigEntries& overrides = {});

/// Every recognised key.
const std::vector<std::string>& config_keys();

/// Canonical flat text of a resolved configuration; build_config(parse_config_text(x)) restores it.
std::string format_config(const RunConfig& config);

/// Candidates within a small edit distance of `word`, closest first.
std::vector<std::string> did_you_mean(const std::string& word, const std::vector<std::string>& candidates);

} // namespace shrinkage
