#include "shrinkage/geweke.hpp"

#include <cmath>

#include "shrinkage/errors.hpp"
#include "shrinkage/kernels.hpp"

namespace shrinkage {

namespace {

double laplace(double rate, RngStream& rng) {
    double e = rng.exponential(rate);
    return rng.uniform() < 0.5 ? -e : e;
}

double half_cauchy(RngStream& rng) { return std::abs(rng.normal() / rng.normal()); }

double laplace_tau2(double beta, double lambda_sq, double s, RngStream& rng) {
    IgParams ig = laplace_ig_params(beta * beta, lambda_sq, s);
    return 1.0 / sample_inverse_gaussian({ig.mu, ig.lambda}, rng);
}

// Named test functions of the state; first and second moments of each.
class StatSet {
public:
    void clear() {
        names_.clear();
        values_.clear();
    }
    void add(const std::string& name, double v) {
        names_.push_back(name);
        values_.push_back(v);
        names_.push_back(name + "^2");
        values_.push_back(v * v);
    }
    void add_mean_only(const std::string& name, double v) {
        names_.push_back(name);
        values_.push_back(v);
    }
    const std::vector<std::string>& names() const { return names_; }
    const std::vector<double>& values() const { return values_; }

private:
    std::vector<std::string> names_;
    std::vector<double> values_;
};

void collect(const PriorSpec& spec, const LatentState& st, StatSet& out) {
    out.clear();
    const ScaleState& sc = st.scales;
    const Eigen::Index p = st.beta.size();
    for (Eigen::Index j = 0; j < p; ++j) out.add("atan(beta" + std::to_string(j) + ")", std::atan(st.beta(j)));
    out.add("log(sigma2)", std::log(st.sigma2));
    const Family f = spec.family;
    // Scales enter through x / (1 + x); log-scale moments of half-Cauchy type scales are dominated by rare excursions.
    auto logs = [&](const std::string& name, const Eigen::VectorXd& v) {
        for (Eigen::Index j = 0; j < v.size(); ++j) out.add(name + std::to_string(j), v(j) / (1.0 + v(j)));
    };
    switch (f) {
    case Family::ssvs_fixed:
    case Family::ssvs_nh:
    case Family::kuo_mallick:
        break;
    case Family::ssvs_lasso3:
        logs("tau1_", sc.local_tau2);
        logs("tau0_", sc.spike_tau2);
        break;
    case Family::horseshoe_ms:
    case Family::horseshoe_slice:
        break;
    default:
        logs("tau", sc.local_tau2);
        break;
    }
    if (f == Family::fused_lasso) logs("omega", sc.fused_omega2);
    if (f == Family::dirichlet_laplace) logs("psi", sc.dl_psi);
    if (f == Family::gdp || f == Family::tpb || f == Family::horseshoe_ms || f == Family::horseshoe_slice) {
        logs("lambda", sc.local_lambda);
    }
    if (f == Family::horseshoe_ms) logs("v", sc.aux);
    for (const auto& [key, value] : sc.global) {
        if (key == "theta") {
            if (is_ssvs(f) && spec.learn_theta) out.add("theta", value);
            continue;
        }
        if (f == Family::horseshoe_slice && key == "xi") continue;
        if ((f == Family::lasso_pc || f == Family::group_lasso || f == Family::fused_lasso) && !spec.learn_lambda) continue;
        out.add(key, value / (1.0 + value));
    }
    if (sc.gamma.size() > 0) {
        for (Eigen::Index j = 0; j < p; ++j) out.add_mean_only("gamma" + std::to_string(j), sc.gamma(j));
    }
}

// Online accumulator of per-statistic batch means.
struct Accumulator {
    std::vector<double> sum;
    std::vector<double> sumsq;
    std::vector<std::vector<double>> batch_sums;
    long count = 0;
    long batch_size = 1;

    void init(std::size_t k, long total, int batches) {
        sum.assign(k, 0.0);
        sumsq.assign(k, 0.0);
        batch_sums.assign(k, std::vector<double>(static_cast<std::size_t>(batches), 0.0));
        batch_size = total / batches;
        count = 0;
    }
    void push(const std::vector<double>& v) {
        const long b = count / batch_size;
        for (std::size_t i = 0; i < v.size(); ++i) {
            sum[i] += v[i];
            sumsq[i] += v[i] * v[i];
            if (b < static_cast<long>(batch_sums[i].size())) batch_sums[i][static_cast<std::size_t>(b)] += v[i];
        }
        ++count;
    }
    double mean(std::size_t i) const { return sum[i] / static_cast<double>(count); }
    double iid_se(std::size_t i) const {
        const double m = mean(i);
        const double var = std::max(sumsq[i] / static_cast<double>(count) - m * m, 0.0);
        return std::sqrt(var / static_cast<double>(count));
    }
    double batch_se(std::size_t i) const {
        const auto& bs = batch_sums[i];
        const double k = static_cast<double>(bs.size());
        double m = 0.0;
        for (double s : bs) m += s / static_cast<double>(batch_size);
        m /= k;
        double var = 0.0;
        for (double s : bs) {
            const double d = s / static_cast<double>(batch_size) - m;
            var += d * d;
        }
        var /= (k - 1.0);
        return std::sqrt(var / k);
    }
};

Eigen::MatrixXd geweke_design(int n, int p) {
    RngStream rng(424242, 0);
    Eigen::MatrixXd X(n, p);
    for (Eigen::Index i = 0; i < X.size(); ++i) X(i) = rng.normal();
    return X;
}

Eigen::VectorXd simulate_response(const PriorSpec& spec, const Eigen::MatrixXd& X, const LatentState& st, RngStream& rng) {
    Eigen::VectorXd mean = X * st.beta;
    if (spec.family == Family::kuo_mallick) mean = X * st.beta.cwiseProduct(st.scales.gamma.cast<double>());
    const double sd = std::sqrt(st.sigma2);
    Eigen::VectorXd y(X.rows());
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = mean(i) + sd * rng.normal();
    return y;
}

} // namespace

PriorSpec geweke_spec(Family family) {
    PriorSpec s;
    s.family = family;
    s.scaling = default_scaling(family);
    s.rho = 2.0;
    s.xi = 1.0;
    s.r = 2.0;
    s.delta = 1.0;
    s.r1 = 2.0;
    s.delta1 = 1.0;
    s.r2 = 2.0;
    s.delta2 = 1.0;
    s.groups = {0, 0, 1};
    s.ng_lambda = 1.0;
    s.ng_gamma2 = 1.0;
    s.dl_alpha = 1.0;
    s.tpb_a = 0.5;
    s.tpb_b = 0.5;
    s.c1 = 0.01;
    s.c2 = 0.01;
    s.lambda0 = 10.0;
    s.lambda1 = 1.0;
    s.km_tau2 = 1.0;
    return s;
}

LatentState simulate_prior(const PriorSpec& spec, int p, RngStream& rng) {
    LatentState st;
    st.sigma2 = rng.inv_gamma(spec.sigma_a0, spec.sigma_b0);
    st.scales = initial_scales(spec, p);
    st.beta.resize(p);
    ScaleState& sc = st.scales;
    const double s = spec.scaling == Scaling::conjugate ? st.sigma2 : 1.0;
    const double sd = std::sqrt(s);
    const double pp = static_cast<double>(p);
    auto normal_from_variance = [&] {
        Eigen::VectorXd d = prior_variance(spec, sc);
        for (int j = 0; j < p; ++j) st.beta(j) = std::sqrt(s * d(j)) * rng.normal();
    };

    switch (spec.family) {
    case Family::jeffreys:
        throw config_error("improper prior: forward simulation undefined");
    case Family::student_t:
        for (int j = 0; j < p; ++j) sc.local_tau2(j) = 1.0 / rng.gamma(spec.rho, spec.xi);
        normal_from_variance();
        break;
    case Family::lasso_pc: {
        const double l2 = spec.learn_lambda ? rng.gamma(spec.r, spec.delta) : spec.lambda_sq;
        sc.global["lambda_sq"] = l2;
        for (int j = 0; j < p; ++j) sc.local_tau2(j) = rng.exponential(l2 / 2.0);
        normal_from_variance();
        break;
    }
    case Family::fused_lasso: {
        // Rejection from independent Laplace coordinates; the acceptance probability
        // supplies the difference penalty.
        double l1 = 0.0;
        double l2 = 0.0;
        while (true) {
            l1 = rng.gamma(spec.r, spec.delta);
            l2 = rng.gamma(spec.r + (pp - 1.0) / 2.0, spec.delta);
            const double a1 = std::sqrt(l1);
            const double a2 = std::sqrt(l2);
            Eigen::VectorXd u(p);
            for (int j = 0; j < p; ++j) u(j) = laplace(a1, rng);
            double pen = 0.0;
            for (int j = 0; j + 1 < p; ++j) pen += std::abs(u(j + 1) - u(j));
            if (rng.uniform() < std::exp(-a2 * pen)) {
                st.beta = sd * u;
                break;
            }
        }
        sc.global["lambda1_sq"] = l1;
        sc.global["lambda2_sq"] = l2;
        for (int j = 0; j < p; ++j) sc.local_tau2(j) = laplace_tau2(st.beta(j), l1, s, rng);
        for (int j = 0; j + 1 < p; ++j) sc.fused_omega2(j) = laplace_tau2(st.beta(j + 1) - st.beta(j), l2, s, rng);
        break;
    }
    case Family::group_lasso: {
        const double l2 = spec.learn_lambda ? rng.gamma(spec.r, spec.delta) : spec.lambda_sq;
        sc.global["lambda_sq"] = l2;
        std::vector<double> sizes(static_cast<std::size_t>(sc.local_tau2.size()), 0.0);
        for (int g : spec.groups) sizes[static_cast<std::size_t>(g)] += 1.0;
        for (Eigen::Index k = 0; k < sc.local_tau2.size(); ++k) {
            sc.local_tau2(k) = rng.gamma((sizes[static_cast<std::size_t>(k)] + 1.0) / 2.0, l2 / 2.0);
        }
        normal_from_variance();
        break;
    }
    case Family::elastic_net_kyung: {
        double l1 = 0.0;
        double l2 = 0.0;
        while (true) {
            l1 = rng.gamma(spec.r1, spec.delta1);
            l2 = rng.gamma(spec.r2 + pp / 2.0, spec.delta2);
            Eigen::VectorXd u(p);
            for (int j = 0; j < p; ++j) u(j) = laplace(std::sqrt(l1), rng);
            if (rng.uniform() < std::exp(-l2 * u.squaredNorm() / 2.0)) {
                st.beta = sd * u;
                break;
            }
        }
        sc.global["lambda1_sq"] = l1;
        sc.global["lambda2"] = l2;
        for (int j = 0; j < p; ++j) sc.local_tau2(j) = laplace_tau2(st.beta(j), l1, s, rng);
        break;
    }
    case Family::gdp:
        for (int j = 0; j < p; ++j) {
            sc.local_lambda(j) = rng.gamma(spec.r, spec.delta);
            sc.local_tau2(j) = rng.exponential(sc.local_lambda(j) * sc.local_lambda(j) / 2.0);
        }
        normal_from_variance();
        break;
    case Family::normal_gamma:
        for (int j = 0; j < p; ++j) sc.local_tau2(j) = rng.gamma(spec.ng_lambda, 1.0 / (2.0 * spec.ng_gamma2));
        normal_from_variance();
        break;
    case Family::dirichlet_laplace: {
        sc.global["lambda"] = rng.gamma(pp * spec.dl_alpha, 0.5);
        for (int j = 0; j < p; ++j) sc.dl_T(j) = rng.gamma(spec.dl_alpha, 1.0);
        sc.dl_psi = sc.dl_T / sc.dl_T.sum();
        for (int j = 0; j < p; ++j) sc.local_tau2(j) = rng.exponential(0.5);
        normal_from_variance();
        break;
    }
    case Family::horseshoe_ms: {
        const double xi = rng.inv_gamma(0.5, 1.0);
        sc.global["xi"] = xi;
        sc.global["tau2"] = rng.inv_gamma(0.5, 1.0 / xi);
        for (int j = 0; j < p; ++j) {
            sc.aux(j) = rng.inv_gamma(0.5, 1.0);
            sc.local_lambda(j) = rng.inv_gamma(0.5, 1.0 / sc.aux(j));
        }
        normal_from_variance();
        break;
    }
    case Family::horseshoe_slice: {
        const double t = half_cauchy(rng);
        sc.global["tau2"] = t * t;
        for (int j = 0; j < p; ++j) {
            const double l = half_cauchy(rng);
            sc.local_lambda(j) = l * l;
        }
        normal_from_variance();
        break;
    }
    case Family::tpb: {
        const double omega = rng.gamma(0.5, 1.0);
        const double phi = rng.gamma(0.5, omega);
        sc.global["omega"] = omega;
        sc.global["phi"] = phi;
        for (int j = 0; j < p; ++j) {
            sc.local_lambda(j) = rng.gamma(spec.tpb_b, phi);
            sc.local_tau2(j) = rng.gamma(spec.tpb_a, sc.local_lambda(j));
        }
        normal_from_variance();
        break;
    }
    case Family::ssvs_fixed:
    case Family::ssvs_nh:
    case Family::ssvs_lasso1:
    case Family::ssvs_lasso2:
    case Family::ssvs_lasso3: {
        double theta = spec.theta;
        if (spec.learn_theta) theta = rng.beta(spec.beta_c, spec.beta_d);
        sc.global["theta"] = theta;
        for (int j = 0; j < p; ++j) sc.gamma(j) = rng.bernoulli(theta) ? 1 : 0;
        if (spec.family == Family::ssvs_lasso1 || spec.family == Family::ssvs_lasso2) {
            const double l1 = rng.gamma(spec.r1, spec.delta1);
            sc.global["lambda1_sq"] = l1;
            for (int j = 0; j < p; ++j) sc.local_tau2(j) = rng.exponential(l1 / 2.0);
            if (spec.family == Family::ssvs_lasso2) sc.spike_tau2 = spec.c2 * sc.local_tau2;
        }
        if (spec.family == Family::ssvs_lasso3) {
            for (int j = 0; j < p; ++j) {
                sc.local_tau2(j) = rng.exponential(spec.lambda1 * spec.lambda1 / 2.0);
                sc.spike_tau2(j) = rng.exponential(spec.lambda0 * spec.lambda0 / 2.0);
            }
        }
        normal_from_variance();
        break;
    }
    case Family::kuo_mallick:
        for (int j = 0; j < p; ++j) {
            st.beta(j) = std::sqrt(spec.km_tau2) * rng.normal();
            sc.gamma(j) = rng.bernoulli(spec.km_inclusion) ? 1 : 0;
        }
        break;
    }
    return st;
}

GewekeReport geweke_joint_test(const PriorSpec& base, const GewekeOptions& opt) {
    if (base.family == Family::jeffreys) throw config_error("improper prior: forward simulation undefined");
    PriorSpec spec = base;
    spec.sigma_a0 = opt.sigma_a0;
    spec.sigma_b0 = opt.sigma_b0;
    if (!(spec.sigma_a0 > 0.0 && spec.sigma_b0 > 0.0)) {
        throw config_error("improper prior: forward simulation undefined");
    }
    // Data-dependent constants are fixed once so the prior does not move with the simulated data.
    spec = resolve_for_data(spec, opt.n, opt.p, 1.0);
    spec.validate(opt.p);

    const Eigen::MatrixXd X = geweke_design(opt.n, opt.p);
    StatSet stats;

    RngStream fwd(opt.seed, 0);
    Accumulator forward;
    for (long i = 0; i < opt.sweeps; ++i) {
        LatentState st = simulate_prior(spec, opt.p, fwd);
        collect(spec, st, stats);
        if (i == 0) forward.init(stats.values().size(), opt.sweeps, opt.batches);
        forward.push(stats.values());
    }

    RngStream rng(opt.seed, 1);
    LatentState state = simulate_prior(spec, opt.p, rng);
    ModelCache cache(X, simulate_response(spec, X, state, rng));
    Accumulator gibbs;
    for (long i = 0; i < opt.sweeps; ++i) {
        if (opt.scale_update_override) {
            step_beta_sigma(state, cache, spec, opt.kernel, rng);
            opt.scale_update_override(state.scales, state.beta, state.sigma2, spec, rng);
        } else {
            gibbs_sweep(state, cache, spec, opt.kernel, opt.block_mode, rng);
        }
        cache.set_response(simulate_response(spec, X, state, rng));
        collect(spec, state, stats);
        if (i == 0) gibbs.init(stats.values().size(), opt.sweeps, opt.batches);
        gibbs.push(stats.values());
    }

    GewekeReport report;
    for (std::size_t k = 0; k < stats.names().size(); ++k) {
        GewekeStat g;
        g.name = stats.names()[k];
        g.forward_mean = forward.mean(k);
        g.gibbs_mean = gibbs.mean(k);
        const double se = std::sqrt(forward.iid_se(k) * forward.iid_se(k) + gibbs.batch_se(k) * gibbs.batch_se(k));
        const double diff = g.forward_mean - g.gibbs_mean;
        g.z = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : INFINITY);
        report.max_abs_z = std::max(report.max_abs_z, std::abs(g.z));
        report.stats.push_back(g);
    }
    return report;
}

} // namespace shrinkage
