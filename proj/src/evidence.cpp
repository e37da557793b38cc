#include "shrinkage/evidence.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>

#include "shrinkage/errors.hpp"
#include "shrinkage/kernels.hpp"
#include "shrinkage/rng.hpp"

namespace shrinkage {

namespace {

const double kLogPi = std::log(std::numbers::pi);

std::vector<int> model_columns(const ConjugateModel& m, int p_total) {
    if (!m.columns.empty()) return m.columns;
    std::vector<int> all(static_cast<std::size_t>(p_total));
    for (int j = 0; j < p_total; ++j) all[static_cast<std::size_t>(j)] = j;
    return all;
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& X, const std::vector<int>& cols) {
    Eigen::MatrixXd out(X.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = X.col(cols[k]);
    return out;
}

double log_det_llt(const Eigen::LLT<Eigen::MatrixXd>& llt) {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

} // namespace

ConjugateModel ConjugateModel::ridge(int p, double d, double v0, double s0) {
    ConjugateModel m;
    m.D = Eigen::MatrixXd::Identity(p, p) * d;
    m.v0 = v0;
    m.s0 = s0;
    return m;
}

void ConjugateModel::validate(int p_total) const {
    if (!(v0 > 0.0) || !(s0 > 0.0)) {
        throw config_error("marginal likelihood does not exist under an improper prior: v0 and s0 must be positive");
    }
    for (int c : columns) {
        if (c < 0 || c >= p_total) throw config_error("model column " + std::to_string(c) + " is out of range");
    }
    const Eigen::Index k = columns.empty() ? p_total : static_cast<Eigen::Index>(columns.size());
    if (D.rows() != k || D.cols() != k) {
        throw config_error("prior covariance D is " + std::to_string(D.rows()) + "x" + std::to_string(D.cols()) +
                           ", expected " + std::to_string(k) + "x" + std::to_string(k));
    }
    if (k > 0 && Eigen::LLT<Eigen::MatrixXd>(D).info() != Eigen::Success) {
        throw config_error("prior covariance D must be positive definite");
    }
}

ConjugatePosterior conjugate_posterior(const ConjugateModel& model, const Dataset& data) {
    model.validate(data.p());
    const auto cols = model_columns(model, data.p());
    const Eigen::MatrixXd X = select_columns(data.X, cols);
    const int n = data.n();
    const Eigen::Index k = X.cols();

    ConjugatePosterior post;
    post.v = model.v0 + n;
    double log_det_v = 0.0, log_det_d = 0.0;
    double fit = 0.0;
    if (k > 0) {
        Eigen::LLT<Eigen::MatrixXd> dllt(model.D);
        log_det_d = log_det_llt(dllt);
        Eigen::MatrixXd prec = X.transpose() * X + dllt.solve(Eigen::MatrixXd::Identity(k, k));
        Eigen::LLT<Eigen::MatrixXd> llt(prec);
        if (llt.info() != Eigen::Success) throw numeric_error("posterior precision is not positive definite");
        log_det_v = -log_det_llt(llt);
        const Eigen::VectorXd xty = X.transpose() * data.y;
        post.mean = llt.solve(xty);
        post.V = llt.solve(Eigen::MatrixXd::Identity(k, k));
        fit = xty.dot(post.mean);
    } else {
        post.mean.resize(0);
        post.V.resize(0, 0);
    }
    post.s = model.s0 + data.y.squaredNorm() - fit;
    post.log_marginal = std::lgamma(post.v / 2.0) - std::lgamma(model.v0 / 2.0) + 0.5 * model.v0 * std::log(model.s0) -
                        0.5 * post.v * std::log(post.s) - 0.5 * n * kLogPi + 0.5 * log_det_v - 0.5 * log_det_d;
    return post;
}

double log_marginal_conjugate(const ConjugateModel& model, const Dataset& data) {
    return conjugate_posterior(model, data).log_marginal;
}

double StudentT::log_density(double x) const {
    const double z = (x - location) * (x - location) / scale;
    return std::lgamma((dof + 1.0) / 2.0) - std::lgamma(dof / 2.0) - 0.5 * std::log(dof * std::numbers::pi * scale) -
           0.5 * (dof + 1.0) * std::log1p(z / dof);
}

double StudentT::density(double x) const { return std::exp(log_density(x)); }

StudentT predictive_t(const ConjugateModel& model, const Dataset& data, const Eigen::VectorXd& x_new) {
    const ConjugatePosterior post = conjugate_posterior(model, data);
    const auto cols = model_columns(model, data.p());
    if (x_new.size() != data.p()) throw config_error("x_new has length " + std::to_string(x_new.size()) +
                                                     ", expected " + std::to_string(data.p()));
    Eigen::VectorXd x(static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) x(static_cast<Eigen::Index>(k)) = x_new(cols[k]);
    StudentT t;
    t.dof = post.v;
    t.location = cols.empty() ? 0.0 : x.dot(post.mean);
    t.scale = post.s / post.v * (1.0 + (cols.empty() ? 0.0 : x.dot(post.V * x)));
    return t;
}

DrawStore sample_conjugate_posterior(const ConjugateModel& model, const Dataset& data, int draws, std::uint64_t seed) {
    if (draws < 1) throw config_error("draws must be positive");
    const ConjugatePosterior post = conjugate_posterior(model, data);
    const auto cols = model_columns(model, data.p());
    const Eigen::Index k = static_cast<Eigen::Index>(cols.size());
    Eigen::MatrixXd L;
    if (k > 0) L = Eigen::LLT<Eigen::MatrixXd>(post.V).matrixL();
    RngStream rng(seed, 0);
    DrawStore store;
    store.seed = seed;
    store.beta = Eigen::MatrixXd::Zero(draws, data.p());
    store.sigma2.resize(draws);
    store.chain = Eigen::VectorXi::Zero(draws);
    store.iteration.resize(draws);
    Eigen::VectorXd z(k);
    for (int i = 0; i < draws; ++i) {
        const double s2 = rng.inv_gamma(post.v / 2.0, post.s / 2.0);
        for (Eigen::Index j = 0; j < k; ++j) z(j) = rng.normal();
        const Eigen::VectorXd b = k > 0 ? Eigen::VectorXd(post.mean + std::sqrt(s2) * (L * z)) : Eigen::VectorXd();
        for (Eigen::Index j = 0; j < k; ++j) store.beta(i, cols[static_cast<std::size_t>(j)]) = b(j);
        store.sigma2(i) = s2;
        store.iteration(i) = i;
    }
    return store;
}

std::pair<Eigen::VectorXd, double> conjugate_posterior_mode(const ConjugateModel& model, const Dataset& data) {
    const ConjugatePosterior post = conjugate_posterior(model, data);
    const auto cols = model_columns(model, data.p());
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(data.p());
    for (std::size_t k = 0; k < cols.size(); ++k) beta(cols[k]) = post.mean(static_cast<Eigen::Index>(k));
    const double k = static_cast<double>(cols.size());
    return {beta, post.s / (post.v + k + 2.0)};
}

double gaussian_loglik(const Dataset& data, const Eigen::VectorXd& beta, double sigma2) {
    const double rss = (data.y - data.X * beta).squaredNorm();
    return -0.5 * data.n() * (std::log(2.0 * std::numbers::pi * sigma2)) - 0.5 * rss / sigma2;
}

std::map<std::string, double> info_criteria(const DrawStore& draws, const Dataset& data, double mode_loglik,
                                            int p_count, int n_count, const std::optional<DicPlugin>& plugin) {
    std::map<std::string, double> out;
    out["bic"] = -2.0 * mode_loglik + p_count * std::log(static_cast<double>(n_count));
    if (draws.rows() == 0) return out;
    const Eigen::MatrixXd coef = draws.coefficients();
    double mean_ll = 0.0;
    for (Eigen::Index i = 0; i < coef.rows(); ++i) {
        mean_ll += gaussian_loglik(data, coef.row(i).transpose(), draws.sigma2(i));
    }
    mean_ll /= static_cast<double>(coef.rows());
    DicPlugin at;
    if (plugin) {
        at = *plugin;
    } else {
        at.beta = coef.colwise().mean().transpose();
        at.sigma2 = draws.sigma2.mean();
    }
    const double plug_ll = gaussian_loglik(data, at.beta, at.sigma2);
    out["dic"] = -4.0 * mean_ll + 2.0 * plug_ll;
    out["p_d"] = 2.0 * (plug_ll - mean_ll);
    return out;
}

double log_sddr(const ConjugateModel& model, const Dataset& data, int coordinate, double beta_star) {
    const ConjugatePosterior post = conjugate_posterior(model, data);
    if (coordinate < 0 || coordinate >= post.mean.size()) {
        throw config_error("restricted coordinate " + std::to_string(coordinate) + " is out of range");
    }
    const StudentT posterior{post.mean(coordinate), post.s / post.v * post.V(coordinate, coordinate), post.v};
    const StudentT prior{0.0, model.s0 / model.v0 * model.D(coordinate, coordinate), model.v0};
    return posterior.log_density(beta_star) - prior.log_density(beta_star);
}

double sddr(const ConjugateModel& model, const Dataset& data, int coordinate, double beta_star) {
    return std::exp(log_sddr(model, data, coordinate, beta_star));
}

BmaResult bma_enumerate_gprior(const Dataset& data, const BmaOptions& options) {
    const int p = data.p();
    const int n = data.n();
    if (p > 25) {
        throw config_error("g-prior enumeration needs 2^p models and is limited to p <= 25 (got " + std::to_string(p) +
                           "); use an SSVS or kuo_mallick fit for selection instead");
    }
    if (options.rule == GRule::fixed && !(options.g > 0.0)) throw config_error("fixed g must be positive");
    if (!(options.pi0 > 0.0 && options.pi0 < 1.0)) throw config_error("model prior pi0 must lie in (0, 1)");
    if (n < 3) throw config_error("g-prior enumeration needs at least 3 observations");

    // The intercept carries a flat prior and is integrated out after demeaning.
    const Eigen::MatrixXd X = data.X.rowwise() - data.X.colwise().mean();
    const Eigen::VectorXd y = data.y.array() - data.y.mean();
    const Eigen::MatrixXd XtX = X.transpose() * X;
    const Eigen::VectorXd Xty = X.transpose() * y;
    const double yty = y.squaredNorm();
    const double dof = 0.5 * (n - 1);
    const double base = std::lgamma(dof) - dof * kLogPi;

    struct Entry {
        double lp;
        BmaModel model;
        bool operator<(const Entry& o) const { return lp > o.lp; } // min-heap on lp
    };
    std::priority_queue<Entry> top;

    BmaResult res;
    res.inclusion = Eigen::VectorXd::Zero(p);
    res.coef = Eigen::VectorXd::Zero(p);
    double m = -INFINITY, total = 0.0;
    const double l1 = std::log(options.pi0), l0 = std::log1p(-options.pi0);

    const unsigned long long count = 1ull << p;
    for (unsigned long long mask = 0; mask < count; ++mask) {
        std::vector<int> cols;
        for (int j = 0; j < p; ++j)
            if (mask & (1ull << j)) cols.push_back(j);
        const int k = static_cast<int>(cols.size());
        const double g = options.rule == GRule::fixed ? options.g : static_cast<double>(k) / n;
        BmaModel mod;
        mod.columns = cols;
        mod.g = g;
        mod.log_prior = k * l1 + (p - k) * l0;
        double fit = 0.0;
        if (k > 0) {
            Eigen::MatrixXd A(k, k);
            Eigen::VectorXd b(k);
            for (int r = 0; r < k; ++r) {
                b(r) = Xty(cols[r]);
                for (int c = 0; c < k; ++c) A(r, c) = XtX(cols[r], cols[c]);
            }
            Eigen::LLT<Eigen::MatrixXd> llt(A);
            const Eigen::VectorXd diag = llt.matrixLLT().diagonal();
            if (llt.info() != Eigen::Success || k >= n - 1 || diag.minCoeff() <= 1e-7 * diag.maxCoeff()) {
                ++res.singular;
                continue;
            }
            const Eigen::VectorXd ols = llt.solve(b);
            fit = b.dot(ols);
            mod.coef = ols / (1.0 + g);
        } else {
            mod.coef.resize(0);
        }
        const double resid = yty - fit / (1.0 + g);
        if (!(resid > 0.0)) {
            ++res.singular;
            continue;
        }
        mod.log_marginal = base + (k > 0 ? 0.5 * k * std::log(g / (1.0 + g)) : 0.0) - dof * std::log(resid);
        const double lp = mod.log_marginal + mod.log_prior;
        ++res.evaluated;

        if (lp > m) {
            const double scale = std::exp(m - lp);
            total *= scale;
            res.inclusion *= scale;
            res.coef *= scale;
            m = lp;
        }
        const double w = std::exp(lp - m);
        total += w;
        for (int r = 0; r < k; ++r) {
            res.inclusion(cols[r]) += w;
            res.coef(cols[r]) += w * mod.coef(r);
        }
        top.push({lp, std::move(mod)});
        if (top.size() > options.keep_models) top.pop();
    }
    if (res.evaluated == 0) throw numeric_error("no submodel has a full-rank design");

    const double log_z = m + std::log(total);
    res.inclusion /= total;
    res.coef /= total;
    while (!top.empty()) {
        Entry e = top.top();
        top.pop();
        e.model.probability = std::exp(e.lp - log_z);
        res.models.push_back(std::move(e.model));
    }
    std::reverse(res.models.begin(), res.models.end());
    for (int j = 0; j < p; ++j)
        if (res.inclusion(j) > 0.5) res.median_model.push_back(j);
    return res;
}

} // namespace shrinkage
