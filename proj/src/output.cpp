#include "shrinkage/output.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <json.hpp>

#include "shrinkage/errors.hpp"

namespace shrinkage {

namespace {

constexpr const char* kVersion = "0.1.0";

std::string fmt(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void put_u32(std::vector<char>& out, std::uint32_t v) {
    for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xffu));
}

std::uint32_t get_u32(const char* p) {
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[k])) << (8 * k);
    return v;
}

Eigen::MatrixXd draws_matrix(const DrawStore& store) {
    const Eigen::Index p = store.p();
    const Eigen::Index cols = 2 + p + 1 + (store.has_gamma() ? p : 0);
    Eigen::MatrixXd m(store.rows(), cols);
    m.col(0) = store.chain.cast<double>();
    m.col(1) = store.iteration.cast<double>();
    m.middleCols(2, p) = store.beta;
    m.col(2 + p) = store.sigma2;
    if (store.has_gamma()) m.rightCols(p) = store.gamma.cast<double>();
    return m;
}

nlohmann::ordered_json coef_json(const CoefSummary& c) {
    nlohmann::ordered_json j;
    j["name"] = c.name;
    j["mean"] = c.mean;
    j["sd"] = c.sd;
    j["q025"] = c.q025;
    j["q50"] = c.q50;
    j["q975"] = c.q975;
    if (c.pip >= 0.0) {
        j["pip"] = c.pip;
        j["median_model"] = c.median_model;
    }
    return j;
}

} // namespace

double sorted_quantile(const std::vector<double>& v, double q) {
    if (v.empty()) throw config_error("quantile of an empty sample");
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    const double f = pos - static_cast<double>(i);
    return i + 1 < v.size() ? v[i] + f * (v[i + 1] - v[i]) : v[i];
}

std::vector<CoefSummary> summarize(const DrawStore& store, const std::vector<std::string>& names) {
    if (store.rows() == 0) throw config_error("cannot summarize an empty draw store");
    const Eigen::MatrixXd coef = store.coefficients();
    const Eigen::VectorXd pip = store.has_gamma() ? inclusion_probabilities(store) : Eigen::VectorXd();
    const double m = static_cast<double>(coef.rows());
    std::vector<CoefSummary> out;
    for (Eigen::Index j = 0; j < coef.cols(); ++j) {
        CoefSummary s;
        s.name = j < static_cast<Eigen::Index>(names.size()) ? names[static_cast<std::size_t>(j)]
                                                            : "x" + std::to_string(j + 1);
        std::vector<double> v(coef.col(j).data(), coef.col(j).data() + coef.rows());
        s.mean = coef.col(j).mean();
        s.sd = coef.rows() > 1 ? std::sqrt((coef.col(j).array() - s.mean).square().sum() / (m - 1.0)) : 0.0;
        std::sort(v.begin(), v.end());
        s.q025 = sorted_quantile(v, 0.025);
        s.q50 = sorted_quantile(v, 0.5);
        s.q975 = sorted_quantile(v, 0.975);
        if (pip.size() > 0) {
            s.pip = pip(j);
            s.median_model = pip(j) > 0.5;
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::string draws_csv(const DrawStore& store) {
    const Eigen::Index p = store.p();
    std::string out = "chain,iter";
    for (Eigen::Index j = 0; j < p; ++j) out += ",beta_" + std::to_string(j + 1);
    out += ",sigma2";
    if (store.has_gamma()) {
        for (Eigen::Index j = 0; j < p; ++j) out += ",gamma_" + std::to_string(j + 1);
    }
    out += "\n";
    for (Eigen::Index i = 0; i < store.rows(); ++i) {
        out += std::to_string(store.chain(i)) + "," + std::to_string(store.iteration(i));
        for (Eigen::Index j = 0; j < p; ++j) out += "," + fmt(store.beta(i, j));
        out += "," + fmt(store.sigma2(i));
        if (store.has_gamma()) {
            for (Eigen::Index j = 0; j < p; ++j) out += "," + std::to_string(store.gamma(i, j));
        }
        out += "\n";
    }
    return out;
}

std::vector<char> draws_binary(const DrawStore& store) {
    const Eigen::MatrixXd m = draws_matrix(store);
    std::vector<char> out{'S', 'H', 'R', 'K'};
    put_u32(out, static_cast<std::uint32_t>(m.rows()));
    put_u32(out, static_cast<std::uint32_t>(m.cols()));
    put_u32(out, 0);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            std::uint64_t bits = std::bit_cast<std::uint64_t>(m(i, j));
            for (int k = 0; k < 8; ++k) out.push_back(static_cast<char>((bits >> (8 * k)) & 0xffu));
        }
    }
    return out;
}

Eigen::MatrixXd read_draws_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open '" + path + "'");
    std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (buf.size() < 16 || std::memcmp(buf.data(), "SHRK", 4) != 0) {
        throw config_error("'" + path + "' is not a draws matrix file");
    }
    const std::uint32_t rows = get_u32(buf.data() + 4), cols = get_u32(buf.data() + 8);
    if (buf.size() != 16 + 8ull * rows * cols) throw config_error("'" + path + "' is truncated");
    Eigen::MatrixXd m(rows, cols);
    const char* p = buf.data() + 16;
    for (std::uint32_t i = 0; i < rows; ++i) {
        for (std::uint32_t j = 0; j < cols; ++j, p += 8) {
            std::uint64_t bits = 0;
            for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[k])) << (8 * k);
            m(i, j) = std::bit_cast<double>(bits);
        }
    }
    return m;
}

std::string config_hash(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_text_file(const std::string& dir, const std::string& name, const std::string& contents) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    const std::filesystem::path path = std::filesystem::path(dir) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot write '" + path.string() + "'");
    out << contents;
    if (!out) throw config_error("failed writing '" + path.string() + "'");
}

void write_outputs(const DrawStore& store, const RunConfig& config, const Dataset& data,
                   const std::vector<std::string>& warnings) {
    if (store.rows() == 0) throw config_error("no draws to write");
    const std::string& dir = config.output.directory;
    std::vector<std::string> files{"draws.csv", "summary.json", "config.resolved", "run_manifest.json"};

    write_text_file(dir, "draws.csv", draws_csv(store));
    if (config.output.binary) {
        const auto bin = draws_binary(store);
        write_text_file(dir, "draws.bin", std::string(bin.begin(), bin.end()));
        files.push_back("draws.bin");
    }

    const auto coefs = summarize(store, data.column_names);
    nlohmann::ordered_json summary;
    summary["family"] = family_name(config.prior().family);
    summary["scaling"] = config.prior().scaling == Scaling::conjugate ? "conjugate" : "independent";
    summary["draws"] = store.rows();
    summary["scale"] = data.standardized ? "standardized" : "original";
    summary["coefficients"] = nlohmann::ordered_json::array();
    for (const auto& c : coefs) summary["coefficients"].push_back(coef_json(c));
    {
        std::vector<double> s(store.sigma2.data(), store.sigma2.data() + store.rows());
        CoefSummary sig;
        sig.name = "sigma2";
        sig.mean = store.sigma2.mean();
        sig.sd = store.rows() > 1
                     ? std::sqrt((store.sigma2.array() - sig.mean).square().sum() / static_cast<double>(store.rows() - 1))
                     : 0.0;
        std::sort(s.begin(), s.end());
        sig.q025 = sorted_quantile(s, 0.025);
        sig.q50 = sorted_quantile(s, 0.5);
        sig.q975 = sorted_quantile(s, 0.975);
        summary["sigma2"] = coef_json(sig);
    }
    if (data.standardized) {
        const Eigen::VectorXd orig = destandardize(data, posterior_mean(store));
        summary["original_scale_mean"] = std::vector<double>(orig.data(), orig.data() + orig.size());
        summary["intercept"] = recover_intercept(data, orig);
    }
    write_text_file(dir, "summary.json", summary.dump(2) + "\n");

    const std::string resolved = format_config(config);
    write_text_file(dir, "config.resolved", resolved);

    nlohmann::ordered_json manifest;
    manifest["seed"] = config.sampler.seed;
    manifest["config_hash"] = config_hash(resolved);
    manifest["config"] = resolved;
    manifest["versions"] = {{"shrinkage", kVersion},
                            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                          "." + std::to_string(EIGEN_MINOR_VERSION)},
                            {"boost", BOOST_LIB_VERSION},
                            {"compiler", __VERSION__}};
    manifest["data"] = {{"path", config.data.path},
                        {"n", data.n()},
                        {"p", data.p()},
                        {"dropped_columns", data.dropped_columns}};
    manifest["warnings"] = warnings;
    manifest["outputs"] = files;
    write_text_file(dir, "run_manifest.json", manifest.dump(2) + "\n");
}

RunConfig config_from_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open manifest '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw config_error("manifest '" + path + "' is not valid JSON: " + e.what());
    }
    if (!j.contains("config") || !j["config"].is_string()) {
        throw config_error("manifest '" + path + "' has no config entry");
    }
    return build_config(parse_config_text(j["config"].get<std::string>()));
}

} // namespace shrinkage
