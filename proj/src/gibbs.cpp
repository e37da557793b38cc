#include "shrinkage/gibbs.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include "shrinkage/errors.hpp"
#include "shrinkage/kernels.hpp"

namespace shrinkage {

namespace {

double scale_of(const PriorSpec& spec, double sigma2) {
    return spec.scaling == Scaling::conjugate ? sigma2 : 1.0;
}

double quad_form(const PriorPrecision& prec, const Eigen::VectorXd& b) {
    double q = (prec.diag.array() * b.array().square()).sum();
    for (Eigen::Index j = 0; j < prec.offdiag.size(); ++j) q += 2.0 * prec.offdiag(j) * b(j) * b(j + 1);
    return q;
}

// Shape added to a0 from the likelihood and coefficient prior.
double sigma2_shape_increment(const PriorSpec& spec, int n, int p) {
    const double nn = static_cast<double>(n);
    const double pp = static_cast<double>(p);
    if (spec.scaling == Scaling::independent) return nn / 2.0;
    if (spec.legacy_dof) {
        switch (spec.family) {
        case Family::jeffreys:
            return (nn + 2.0) / 2.0;
        case Family::gdp:
        case Family::fused_lasso:
        case Family::group_lasso:
        case Family::elastic_net_kyung:
            return (nn - 1.0 + pp) / 2.0;
        default:
            break;
        }
    }
    return (nn + pp) / 2.0;
}

void check_finite(const LatentState& s) {
    if (!s.beta.allFinite() || !std::isfinite(s.sigma2) || !(s.sigma2 > 0.0)) {
        throw numeric_error("non-finite draw");
    }
}

} // namespace

void SamplerPlan::validate(int n, int p) const {
    if (iterations <= 0) throw config_error("iterations must be positive");
    if (burn_in < 0) throw config_error("burn_in must be nonnegative");
    if (burn_in >= iterations) throw config_error("burn_in >= iterations");
    if (thin <= 0) throw config_error("thin must be positive");
    if (chains <= 0) throw config_error("chains must be positive");
    if (threads <= 0) throw config_error("threads must be positive");
    if (block_mode == BlockMode::scalable && prior.scaling != Scaling::conjugate) {
        throw config_error("scalable block requires conjugate scaling");
    }
    if (block_mode == BlockMode::scalable && prior.family == Family::kuo_mallick) {
        throw config_error("scalable block is not available for kuo_mallick");
    }
    if (block_mode == BlockMode::skinny && !is_ssvs(prior.family)) {
        throw config_error("skinny Gibbs requires an ssvs family");
    }
    if (prior.family == Family::kuo_mallick && prior.scaling != Scaling::independent) {
        throw config_error("kuo_mallick uses an independent coefficient prior");
    }
    (void)n;
    prior.validate(p);
}

MvnKernel resolve_kernel(MvnKernel k, int n, int p) {
    if (k != MvnKernel::automatic) return k;
    return p > n ? MvnKernel::bhattacharya : MvnKernel::rue;
}

ModelCache::ModelCache(const Eigen::MatrixXd& Xin, const Eigen::VectorXd& yin) : X(Xin) {
    XtX = X.transpose() * X;
    col_sq = XtX.diagonal();
    set_response(yin);
}

void ModelCache::set_response(const Eigen::VectorXd& yin) {
    y = yin;
    Xty = X.transpose() * y;
    yty = y.squaredNorm();
}

InvGammaParams sigma2_conditional(const PriorSpec& spec, const ModelCache& cache, const Eigen::VectorXd& beta,
                                  const PriorPrecision& prec) {
    const double psi = (cache.y - cache.X * beta).squaredNorm();
    InvGammaParams ig{spec.sigma_a0 + sigma2_shape_increment(spec, cache.n(), cache.p()), spec.sigma_b0 + psi / 2.0};
    if (spec.scaling == Scaling::conjugate) ig.scale += quad_form(prec, beta) / 2.0;
    return ig;
}

Eigen::VectorXd draw_beta(const PriorSpec& spec, const ModelCache& cache, double sigma2, const PriorPrecision& prec,
                          MvnKernel kernel, RngStream& rng) {
    const double sd = std::sqrt(sigma2);
    kernel = resolve_kernel(kernel, cache.n(), cache.p());
    if (kernel == MvnKernel::bhattacharya && prec.offdiag.size() > 0) kernel = MvnKernel::rue;
    const bool conj = spec.scaling == Scaling::conjugate;
    if (kernel == MvnKernel::bhattacharya) {
        Eigen::VectorXd D = prec.diag.cwiseInverse();
        if (!conj) D /= sigma2;
        return sd * sample_mvn_bhattacharya(cache.X, D, cache.y / sd, rng);
    }
    // Draw b = beta / sigma with precision X'X + sigma^2-adjusted prior precision.
    PrecisionSystem sys;
    sys.gram = cache.XtX;
    sys.prior_precision_diag = conj ? prec.diag : Eigen::VectorXd(prec.diag * sigma2);
    if (prec.offdiag.size() > 0) sys.prior_precision_offdiag = conj ? prec.offdiag : Eigen::VectorXd(prec.offdiag * sigma2);
    sys.rhs = cache.Xty / sd;
    Eigen::VectorXd b = kernel == MvnKernel::direct ? sample_mvn_direct(sys, rng) : sample_mvn_rue(sys, rng);
    return sd * b;
}

LatentState initial_state(const PriorSpec& spec, const ModelCache& cache) {
    LatentState s;
    s.beta = Eigen::VectorXd::Zero(cache.p());
    s.sigma2 = sample_variance(cache.y);
    if (!(s.sigma2 > 0.0)) s.sigma2 = 1.0;
    s.scales = initial_scales(spec, cache.p());
    return s;
}

void step_beta_sigma(LatentState& state, const ModelCache& cache, const PriorSpec& spec, MvnKernel kernel, RngStream& rng) {
    PriorPrecision prec = prior_precision(spec, state.scales);
    state.beta = draw_beta(spec, cache, state.sigma2, prec, kernel, rng);
    InvGammaParams ig = sigma2_conditional(spec, cache, state.beta, prec);
    state.sigma2 = rng.inv_gamma(ig.shape, ig.scale);
}

void step_scalable(LatentState& state, const ModelCache& cache, const PriorSpec& spec, RngStream& rng) {
    if (spec.scaling != Scaling::conjugate) throw config_error("scalable block requires conjugate scaling");
    PriorPrecision prec = prior_precision(spec, state.scales);
    const double nn = static_cast<double>(cache.n());
    const double shape = spec.sigma_a0 + (spec.legacy_dof ? (nn - 1.0) / 2.0 : nn / 2.0);
    const bool wide = cache.p() > cache.n() && prec.offdiag.size() == 0;
    if (wide) {
        // y'(I - X V X')y = y'(I + X D X')^{-1} y.
        Eigen::VectorXd D = prec.diag.cwiseInverse();
        Eigen::MatrixXd M = cache.X * D.asDiagonal() * cache.X.transpose();
        M.diagonal().array() += 1.0;
        Eigen::LLT<Eigen::MatrixXd> llt(M);
        if (llt.info() != Eigen::Success) throw numeric_error("inner system singular");
        const double q = cache.y.dot(llt.solve(cache.y));
        state.sigma2 = rng.inv_gamma(shape, spec.sigma_b0 + q / 2.0);
        const double sd = std::sqrt(state.sigma2);
        state.beta = sd * sample_mvn_bhattacharya(cache.X, D, cache.y / sd, rng);
    } else {
        PrecisionSystem sys;
        sys.gram = cache.XtX;
        sys.prior_precision_diag = prec.diag;
        sys.prior_precision_offdiag = prec.offdiag;
        sys.rhs = cache.Xty;
        sys.validate();
        const Eigen::MatrixXd L = cholesky_lower(sys.precision());
        Eigen::VectorXd v = L.triangularView<Eigen::Lower>().solve(cache.Xty);
        const double q = std::max(cache.yty - v.squaredNorm(), 0.0);
        state.sigma2 = rng.inv_gamma(shape, spec.sigma_b0 + q / 2.0);
        Eigen::VectorXd z(cache.p());
        for (Eigen::Index j = 0; j < z.size(); ++j) z(j) = rng.normal();
        const auto Lt = L.transpose().triangularView<Eigen::Upper>();
        state.beta = Lt.solve(v) + std::sqrt(state.sigma2) * Lt.solve(z);
    }
}

void step_skinny(LatentState& state, const ModelCache& cache, const PriorSpec& spec, RngStream& rng) {
    ScaleState& sc = state.scales;
    const int n = cache.n();
    const int p = cache.p();
    const double nn = static_cast<double>(n);
    const double sigma2 = state.sigma2;
    const double s = scale_of(spec, sigma2);

    // Active block: full Gaussian conditional on the columns with gamma = 1.
    std::vector<int> active;
    for (int j = 0; j < p; ++j) {
        if (sc.gamma(j) == 1) active.push_back(j);
    }
    const Eigen::Index k = static_cast<Eigen::Index>(active.size());
    if (k > 0) {
        PrecisionSystem sys;
        sys.gram.resize(k, k);
        sys.prior_precision_diag.resize(k);
        sys.rhs.resize(k);
        for (Eigen::Index a = 0; a < k; ++a) {
            for (Eigen::Index b = 0; b < k; ++b) sys.gram(a, b) = cache.XtX(active[a], active[b]) / sigma2;
            sys.prior_precision_diag(a) = 1.0 / (s * std::max(sc.local_tau2(active[a]), kTauFloor));
            sys.rhs(a) = cache.Xty(active[a]) / sigma2;
        }
        Eigen::VectorXd bA = sample_mvn_rue(sys, rng);
        for (Eigen::Index a = 0; a < k; ++a) state.beta(active[a]) = bA(a);
    }
    // Inactive block: independent coordinates with precision n / sigma^2 + 1 / (s tau0^2).
    for (int j = 0; j < p; ++j) {
        if (sc.gamma(j) == 0) {
            const double prec = nn / sigma2 + 1.0 / (s * std::max(sc.spike_tau2(j), kTauFloor));
            state.beta(j) = rng.normal() / std::sqrt(prec);
        }
    }

    // Indicators. The inactive pseudo-likelihood exp(-n beta_j^2 / (2 sigma^2)) is swapped for the
    // active-block likelihood, giving the compensation term in the log odds.
    Eigen::VectorXd resid = cache.y;
    for (Eigen::Index a = 0; a < k; ++a) resid -= cache.X.col(active[a]) * state.beta(active[a]);
    const double theta = sc.get("theta");
    const double prior_logit = std::log(theta) - std::log1p(-theta);
    for (int j : rng.permutation(p)) {
        const double bj = state.beta(j);
        if (sc.gamma(j) == 1) resid += cache.X.col(j) * bj;
        const double t1 = sc.local_tau2(j);
        const double t0 = sc.spike_tau2(j);
        const double log_prior_ratio = prior_logit - 0.5 * std::log(t1 / t0) - bj * bj / (2.0 * s) * (1.0 / t1 - 1.0 / t0);
        const double compensation =
            (bj * cache.X.col(j).dot(resid) - 0.5 * bj * bj * cache.col_sq(j) + 0.5 * nn * bj * bj) / sigma2;
        const double logodds = log_prior_ratio + compensation;
        const int g = rng.bernoulli(1.0 / (1.0 + std::exp(-logodds))) ? 1 : 0;
        sc.gamma(j) = g;
        if (g == 1) resid -= cache.X.col(j) * bj;
    }

    // sigma^2 under the skinny pseudo-likelihood.
    double rss = resid.squaredNorm();
    double prior_q = 0.0;
    for (int j = 0; j < p; ++j) {
        const double bj2 = state.beta(j) * state.beta(j);
        if (sc.gamma(j) == 0) rss += nn * bj2;
        prior_q += bj2 / std::max(sc.gamma(j) == 1 ? sc.local_tau2(j) : sc.spike_tau2(j), kTauFloor);
    }
    double shape = spec.sigma_a0 + nn / 2.0;
    double scale = spec.sigma_b0 + rss / 2.0;
    if (spec.scaling == Scaling::conjugate) {
        shape += static_cast<double>(p) / 2.0;
        scale += prior_q / 2.0;
    }
    state.sigma2 = rng.inv_gamma(shape, scale);

    update_ssvs_hyper(sc, state.beta, state.sigma2, spec, rng);
}

void step_kuo_mallick(LatentState& state, const ModelCache& cache, const PriorSpec& spec, MvnKernel kernel, RngStream& rng) {
    ScaleState& sc = state.scales;
    const int p = cache.p();
    Eigen::VectorXd g = sc.gamma.cast<double>();
    // beta | gamma uses the design with excluded columns zeroed.
    ModelCache masked(cache.X * g.asDiagonal(), cache.y);
    PriorPrecision prec;
    prec.diag = Eigen::VectorXd::Constant(p, 1.0 / spec.km_tau2);
    state.beta = draw_beta(spec, masked, state.sigma2, prec, kernel, rng);
    update_kuo_mallick(sc, state.beta, state.sigma2, spec, cache.X, cache.y, rng);
    Eigen::VectorXd theta = state.beta.cwiseProduct(sc.gamma.cast<double>());
    const double psi = (cache.y - cache.X * theta).squaredNorm();
    state.sigma2 = rng.inv_gamma(spec.sigma_a0 + cache.n() / 2.0, spec.sigma_b0 + psi / 2.0);
}

void gibbs_sweep(LatentState& state, const ModelCache& cache, const PriorSpec& spec, MvnKernel kernel, BlockMode mode,
                 RngStream& rng) {
    if (spec.family == Family::kuo_mallick) {
        step_kuo_mallick(state, cache, spec, kernel, rng);
        return;
    }
    switch (mode) {
    case BlockMode::three_block:
        step_beta_sigma(state, cache, spec, kernel, rng);
        update_scales(state.scales, state.beta, state.sigma2, spec, rng);
        break;
    case BlockMode::scalable:
        step_scalable(state, cache, spec, rng);
        update_scales(state.scales, state.beta, state.sigma2, spec, rng);
        break;
    case BlockMode::skinny:
        step_skinny(state, cache, spec, rng);
        break;
    }
}

DrawStore DrawStore::merge(const std::vector<DrawStore>& parts) {
    DrawStore out;
    if (parts.empty()) return out;
    Eigen::Index rows = 0;
    for (const auto& d : parts) rows += d.rows();
    const Eigen::Index p = parts.front().p();
    const bool gam = parts.front().has_gamma();
    const bool scl = parts.front().scales.size() > 0;
    out.beta.resize(rows, p);
    out.sigma2.resize(rows);
    out.chain.resize(rows);
    out.iteration.resize(rows);
    if (gam) out.gamma.resize(rows, p);
    if (scl) out.scales.resize(rows, p);
    out.seed = parts.front().seed;
    out.gamma_masks_beta = parts.front().gamma_masks_beta;
    Eigen::Index r = 0;
    for (const auto& d : parts) {
        const Eigen::Index m = d.rows();
        out.beta.middleRows(r, m) = d.beta;
        out.sigma2.segment(r, m) = d.sigma2;
        out.chain.segment(r, m) = d.chain;
        out.iteration.segment(r, m) = d.iteration;
        if (gam) out.gamma.middleRows(r, m) = d.gamma;
        if (scl) out.scales.middleRows(r, m) = d.scales;
        r += m;
    }
    return out;
}

DrawStore run_chain(const SamplerPlan& plan, const Dataset& data, int chain_id) {
    ModelCache cache(data.X, data.y);
    const PriorSpec spec = resolve_for_data(plan.prior, data.n(), data.p(), sample_variance(data.y));
    RngStream rng(plan.seed, static_cast<std::uint64_t>(chain_id));
    LatentState state = initial_state(spec, cache);

    const int keep = plan.retained_per_chain();
    const int p = data.p();
    DrawStore store;
    store.seed = plan.seed;
    store.gamma_masks_beta = spec.family == Family::kuo_mallick;
    store.beta.resize(keep, p);
    store.sigma2.resize(keep);
    store.chain = Eigen::VectorXi::Constant(keep, chain_id);
    store.iteration.resize(keep);
    if (is_selection(spec.family)) store.gamma.resize(keep, p);
    if (plan.store_scales) store.scales.resize(keep, p);

    int row = 0;
    for (int it = 0; it < plan.iterations; ++it) {
        const std::string where = " at iteration " + std::to_string(it) + " of chain " + std::to_string(chain_id);
        try {
            gibbs_sweep(state, cache, spec, plan.kernel, plan.block_mode, rng);
        } catch (const std::domain_error& e) {
            // Invalid distribution parameters only arise from non-finite upstream values.
            throw numeric_error("non-finite draw" + where + " (" + e.what() + ")");
        } catch (const numeric_error& e) {
            throw numeric_error(e.what() + where);
        }
        try {
            check_finite(state);
        } catch (const numeric_error&) {
            throw numeric_error("non-finite draw" + where);
        }
        if (it >= plan.burn_in && (it - plan.burn_in) % plan.thin == 0) {
            store.beta.row(row) = state.beta.transpose();
            store.sigma2(row) = state.sigma2;
            store.iteration(row) = it;
            if (store.gamma.size() > 0) store.gamma.row(row) = state.scales.gamma.transpose();
            if (plan.store_scales) store.scales.row(row) = prior_variance(spec, state.scales).transpose();
            ++row;
        }
    }
    return store;
}

DrawStore run_chains(const SamplerPlan& plan, const Dataset& data) {
    plan.validate(data.n(), data.p());
    std::vector<DrawStore> parts(static_cast<std::size_t>(plan.chains));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(plan.chains));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int c = next++; c < plan.chains; c = next++) {
            try {
                parts[static_cast<std::size_t>(c)] = run_chain(plan, data, c);
            } catch (...) {
                errors[static_cast<std::size_t>(c)] = std::current_exception();
            }
        }
    };
    const int nthreads = std::min(plan.threads, plan.chains);
    std::vector<std::thread> pool;
    for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return DrawStore::merge(parts);
}

Eigen::MatrixXd DrawStore::coefficients() const {
    if (!gamma_masks_beta) return beta;
    return beta.cwiseProduct(gamma.cast<double>());
}

Eigen::VectorXd posterior_mean(const DrawStore& store) { return store.coefficients().colwise().mean().transpose(); }

Eigen::VectorXd inclusion_probabilities(const DrawStore& store) {
    if (!store.has_gamma()) return Eigen::VectorXd::Ones(store.p());
    return store.gamma.cast<double>().colwise().mean().transpose();
}

} // namespace shrinkage
