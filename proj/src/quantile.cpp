#include "shrinkage/quantile.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <thread>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "shrinkage/errors.hpp"

namespace shrinkage {

void QuantileSpec::validate() const {
    if (levels.empty()) throw config_error("quantile levels must not be empty");
    for (std::size_t k = 0; k < levels.size(); ++k) {
        if (!(levels[k] > 0.0 && levels[k] < 1.0)) {
            throw config_error("quantile level " + std::to_string(levels[k]) + " must lie strictly inside (0, 1)");
        }
        if (k > 0 && !(levels[k] > levels[k - 1])) throw config_error("quantile levels must be strictly increasing");
    }
    if (!(prior_tau > 0.0)) throw config_error("quantile prior_tau must be positive");
    if (!(n0 > 0.0) || !(s0 > 0.0)) throw config_error("quantile n0 and s0 must be positive");
}

AlConstants al_constants(double r) {
    if (!(r > 0.0 && r < 1.0)) throw std::domain_error("quantile level must lie in (0, 1)");
    const double v = r * (1.0 - r);
    return {(1.0 - 2.0 * r) / v, 2.0 / v};
}

double al_density(double eps, double r, double s) {
    const double rho = eps > 0.0 ? r * eps : (r - 1.0) * eps;
    return r * (1.0 - r) / s * std::exp(-rho / s);
}

double al_mixture_density(double eps, double r, double s) {
    const AlConstants c = al_constants(r);
    auto f = [&](double z) {
        if (z <= 0.0) return 0.0;
        const double var = s * c.kappa2 * z;
        const double d = eps - c.theta * z;
        return std::exp(-0.5 * d * d / var - z / s) / (std::sqrt(2.0 * std::numbers::pi * var) * s);
    };
    boost::math::quadrature::exp_sinh<double> integrator;
    return integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity(), 1e-14);
}

QuantileLatents quantile_initial_state(Eigen::Index n, Eigen::Index p, double r) {
    const AlConstants c = al_constants(r);
    QuantileLatents s;
    s.theta = c.theta;
    s.kappa2 = c.kappa2;
    s.beta = Eigen::VectorXd::Zero(p);
    s.sigma2 = 1.0;
    s.z = Eigen::VectorXd::Ones(n);
    return s;
}

PrecisionSystem quantile_beta_system(const QuantileLatents& state, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                     const QuantileSpec& spec) {
    // U = sigma^2 kappa^2 diag(z)
    const Eigen::VectorXd w = (state.sigma2 * state.kappa2 * state.z.array()).inverse().matrix();
    PrecisionSystem sys;
    sys.gram = X.transpose() * w.asDiagonal() * X;
    sys.prior_precision_diag = Eigen::VectorXd::Constant(X.cols(), 1.0 / spec.prior_tau);
    sys.rhs = X.transpose() * (w.cwiseProduct(y - state.theta * state.z));
    return sys;
}

void quantile_gibbs_step(QuantileLatents& state, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const QuantileSpec& spec, RngStream& rng) {
    const Eigen::Index n = X.rows();
    const double th = state.theta, k2 = state.kappa2;

    state.beta = sample_mvn_rue(quantile_beta_system(state, X, y, spec), rng);

    // sigma^2 | . ~ InvGamma(n0 + 3n/2, s0 + sum y*^2 / (2 z kappa^2) + sum z)
    const Eigen::VectorXd resid = y - X * state.beta;
    const Eigen::VectorXd ystar = resid - th * state.z;
    const double scale =
        spec.s0 + (ystar.array().square() / (2.0 * k2 * state.z.array())).sum() + state.z.sum();
    state.sigma2 = rng.inv_gamma(spec.n0 + 1.5 * static_cast<double>(n), scale);

    // 1/z_i | . ~ IG(sqrt(theta^2 + 2 kappa^2) / |e_i|, (theta^2 + 2 kappa^2) / (sigma^2 kappa^2))
    const double q = th * th + 2.0 * k2;
    const double lambda = q / (state.sigma2 * k2);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double e = std::max(std::abs(resid(i)), 1e-10);
        const double inv = sample_inverse_gaussian({std::sqrt(q) / e, lambda}, rng);
        state.z(i) = 1.0 / inv;
    }
}

namespace {

DrawStore run_level(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double r, const QuantileSpec& spec,
                    const SamplerPlan& plan, std::uint64_t stream) {
    RngStream rng(plan.seed, stream);
    QuantileLatents state = quantile_initial_state(X.rows(), X.cols(), r);
    const int keep = plan.retained_per_chain();
    DrawStore store;
    store.seed = plan.seed;
    store.beta.resize(keep, X.cols());
    store.sigma2.resize(keep);
    store.chain = Eigen::VectorXi::Constant(keep, static_cast<int>(stream));
    store.iteration.resize(keep);
    int row = 0;
    for (int it = 0; it < plan.iterations; ++it) {
        try {
            quantile_gibbs_step(state, X, y, spec, rng);
        } catch (const std::domain_error& e) {
            throw numeric_error("non-finite draw at iteration " + std::to_string(it) + " (" + e.what() + ")");
        }
        if (!state.beta.allFinite() || !std::isfinite(state.sigma2) || !state.z.allFinite()) {
            throw numeric_error("non-finite draw at iteration " + std::to_string(it));
        }
        if (it >= plan.burn_in && (it - plan.burn_in) % plan.thin == 0) {
            store.beta.row(row) = state.beta.transpose();
            store.sigma2(row) = state.sigma2;
            store.iteration(row) = it;
            ++row;
        }
    }
    return store;
}

} // namespace

QuantileGridResult run_quantile_grid(const Dataset& data, const QuantileSpec& spec, const SamplerPlan& plan) {
    spec.validate();
    if (plan.iterations < 1 || plan.burn_in < 0 || plan.burn_in >= plan.iterations || plan.thin < 1) {
        throw config_error("quantile plan needs iterations > burn_in >= 0 and thin >= 1");
    }
    QuantileGridResult res;
    if (spec.add_intercept) {
        res.design.resize(data.n(), data.p() + 1);
        res.design.col(0).setOnes();
        res.design.rightCols(data.p()) = data.X;
        res.column_names.push_back("(intercept)");
    } else {
        res.design = data.X;
    }
    for (int j = 0; j < data.p(); ++j) {
        res.column_names.push_back(j < static_cast<int>(data.column_names.size()) ? data.column_names[j]
                                                                                  : "x" + std::to_string(j + 1));
    }
    // The intercept is a level-specific quantile, so the response is used on its original location.
    const Eigen::VectorXd y = data.y.array() + data.y_mean;

    const std::size_t L = spec.levels.size();
    std::vector<DrawStore> stores(L);
    std::vector<std::string> errors(L);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < L; k = next++) {
            try {
                stores[k] = run_level(res.design, y, spec.levels[k], spec, plan, k);
            } catch (const std::exception& e) {
                errors[k] = e.what();
            }
        }
    };
    const int nthreads = std::max(1, std::min<int>(plan.threads, static_cast<int>(L)));
    std::vector<std::thread> pool;
    for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    for (std::size_t k = 0; k < L; ++k) {
        if (errors[k].empty()) {
            res.draws[spec.levels[k]] = std::move(stores[k]);
        } else {
            res.failures[spec.levels[k]] = "level " + std::to_string(spec.levels[k]) + ": " + errors[k];
        }
    }

    // Crossing between adjacent successful levels, draw by draw.
    std::vector<const DrawStore*> ok;
    for (const auto& [r, d] : res.draws) ok.push_back(&d);
    if (ok.size() >= 2) {
        const Eigen::Index draws = ok.front()->rows();
        Eigen::Index crossed = 0;
        for (Eigen::Index t = 0; t < draws; ++t) {
            bool any = false;
            for (std::size_t k = 0; k + 1 < ok.size() && !any; ++k) {
                const Eigen::VectorXd lo = res.design * ok[k]->beta.row(t).transpose();
                const Eigen::VectorXd hi = res.design * ok[k + 1]->beta.row(t).transpose();
                any = (lo.array() > hi.array()).any();
            }
            if (any) ++crossed;
        }
        res.crossing_rate = draws > 0 ? static_cast<double>(crossed) / static_cast<double>(draws) : 0.0;
    }
    return res;
}

} // namespace shrinkage
