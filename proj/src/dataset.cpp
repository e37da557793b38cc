#include "shrinkage/dataset.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "shrinkage/errors.hpp"

namespace shrinkage {

namespace {

// Splits one logical CSV record; quoted fields may contain commas, doubled quotes and newlines.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
    fields.clear();
    std::string field;
    bool quoted = false;
    bool any = false;
    char c;
    while (in.get(c)) {
        any = true;
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field.push_back('"');
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(field);
            field.clear();
        } else if (c == '\n') {
            fields.push_back(field);
            return true;
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    if (!any) return false;
    fields.push_back(field);
    return true;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

} // namespace

Dataset make_dataset(Eigen::MatrixXd X, Eigen::VectorXd y, std::vector<std::string> names) {
    Dataset d;
    if (X.rows() != y.size()) throw config_error("design rows and response length differ");
    d.X = std::move(X);
    d.y = std::move(y);
    if (names.empty()) {
        for (int j = 0; j < d.p(); ++j) names.push_back("x" + std::to_string(j + 1));
    }
    d.column_names = std::move(names);
    d.x_mean = Eigen::VectorXd::Zero(d.p());
    d.x_sd = Eigen::VectorXd::Ones(d.p());
    return d;
}

double sample_variance(const Eigen::VectorXd& v) {
    const double m = v.mean();
    return (v.array() - m).square().sum() / static_cast<double>(v.size() - 1);
}

std::vector<std::string> preprocess(Dataset& d, bool standardize, bool demean_y) {
    std::vector<std::string> warnings;
    if (d.n() < 2) throw config_error("at least two observations are required");
    std::vector<int> keep;
    for (int j = 0; j < d.p(); ++j) {
        if (sample_variance(d.X.col(j)) > 0.0) {
            keep.push_back(j);
        } else {
            warnings.push_back("dropping zero-variance column '" + d.column_names[static_cast<std::size_t>(j)] + "'");
            d.dropped_columns.push_back(d.column_names[static_cast<std::size_t>(j)]);
        }
    }
    if (static_cast<int>(keep.size()) != d.p()) {
        Eigen::MatrixXd X(d.n(), static_cast<Eigen::Index>(keep.size()));
        std::vector<std::string> names;
        for (std::size_t k = 0; k < keep.size(); ++k) {
            X.col(static_cast<Eigen::Index>(k)) = d.X.col(keep[k]);
            names.push_back(d.column_names[static_cast<std::size_t>(keep[k])]);
        }
        d.X = std::move(X);
        d.column_names = std::move(names);
    }
    d.x_mean = Eigen::VectorXd::Zero(d.p());
    d.x_sd = Eigen::VectorXd::Ones(d.p());
    if (standardize) {
        for (int j = 0; j < d.p(); ++j) {
            d.x_mean(j) = d.X.col(j).mean();
            d.x_sd(j) = std::sqrt(sample_variance(d.X.col(j)));
            d.X.col(j) = (d.X.col(j).array() - d.x_mean(j)) / d.x_sd(j);
        }
        d.standardized = true;
    }
    if (demean_y) {
        d.y_mean = d.y.mean();
        d.y.array() -= d.y_mean;
        d.demeaned = true;
    }
    return warnings;
}

Eigen::VectorXd destandardize(const Dataset& d, const Eigen::VectorXd& beta_std) {
    return beta_std.cwiseQuotient(d.x_sd);
}

double recover_intercept(const Dataset& d, const Eigen::VectorXd& beta_orig) {
    return d.y_mean - beta_orig.dot(d.x_mean);
}

Dataset load_csv(const std::string& path, const std::string& response_column, bool standardize, bool demean_y,
                 std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open data file '" + path + "'");
    std::vector<std::string> header;
    if (!read_record(in, header)) throw config_error("data file '" + path + "' is empty");
    for (auto& h : header) h = trim(h);
    int response = -1;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == response_column) response = static_cast<int>(j);
    }
    if (response < 0) throw config_error("response column '" + response_column + "' not found in header");

    std::vector<std::vector<double>> rows;
    std::vector<std::string> fields;
    int line = 1;
    while (read_record(in, fields)) {
        ++line;
        if (fields.size() == 1 && trim(fields[0]).empty()) continue;
        if (fields.size() != header.size()) {
            throw config_error("row " + std::to_string(line) + " has " + std::to_string(fields.size()) +
                               " fields, expected " + std::to_string(header.size()));
        }
        std::vector<double> row;
        for (std::size_t j = 0; j < fields.size(); ++j) {
            std::string cell = trim(fields[j]);
            std::size_t used = 0;
            double v = 0.0;
            bool ok = !cell.empty();
            if (ok) {
                try {
                    v = std::stod(cell, &used);
                } catch (const std::exception&) {
                    ok = false;
                }
            }
            if (!ok || used != cell.size() || !std::isfinite(v)) {
                throw config_error("non-numeric cell '" + cell + "' at row " + std::to_string(line) + ", column '" +
                                   header[j] + "'");
            }
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index p = static_cast<Eigen::Index>(header.size()) - 1;
    Eigen::MatrixXd X(n, p);
    Eigen::VectorXd y(n);
    std::vector<std::string> names;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (static_cast<int>(j) != response) names.push_back(header[j]);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index c = 0;
        for (std::size_t j = 0; j < header.size(); ++j) {
            if (static_cast<int>(j) == response) {
                y(i) = rows[static_cast<std::size_t>(i)][j];
            } else {
                X(i, c++) = rows[static_cast<std::size_t>(i)][j];
            }
        }
    }
    Dataset d = make_dataset(std::move(X), std::move(y), std::move(names));
    d.response_name = response_column;
    auto w = preprocess(d, standardize, demean_y);
    if (warnings != nullptr) warnings->insert(warnings->end(), w.begin(), w.end());
    return d;
}

} // namespace shrinkage
