#include "shrinkage/priors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/tools/roots.hpp>

#include "shrinkage/errors.hpp"
#include "shrinkage/kernels.hpp"

namespace shrinkage {

namespace {

const std::vector<std::pair<std::string, Family>>& family_table() {
    static const std::vector<std::pair<std::string, Family>> table{
        {"jeffreys", Family::jeffreys},
        {"student_t", Family::student_t},
        {"lasso_pc", Family::lasso_pc},
        {"fused_lasso", Family::fused_lasso},
        {"group_lasso", Family::group_lasso},
        {"elastic_net_kyung", Family::elastic_net_kyung},
        {"gdp", Family::gdp},
        {"normal_gamma", Family::normal_gamma},
        {"dirichlet_laplace", Family::dirichlet_laplace},
        {"horseshoe_ms", Family::horseshoe_ms},
        {"horseshoe_slice", Family::horseshoe_slice},
        {"tpb", Family::tpb},
        {"ssvs_fixed", Family::ssvs_fixed},
        {"ssvs_nh", Family::ssvs_nh},
        {"ssvs_lasso1", Family::ssvs_lasso1},
        {"ssvs_lasso2", Family::ssvs_lasso2},
        {"ssvs_lasso3", Family::ssvs_lasso3},
        {"kuo_mallick", Family::kuo_mallick},
    };
    return table;
}

double scale_of(const PriorSpec& spec, double sigma2) {
    return spec.scaling == Scaling::conjugate ? sigma2 : 1.0;
}

double floored_sq(double b) {
    double a = std::max(std::abs(b), kBetaFloor);
    return a * a;
}

double inv_floor(double tau2) { return 1.0 / std::max(tau2, kTauFloor); }

// Draws tau^2 whose reciprocal is inverse Gaussian.
double draw_laplace_tau2(double beta_sq, double lambda_sq, double s, RngStream& rng) {
    IgParams ig = laplace_ig_params(beta_sq, lambda_sq, s);
    return 1.0 / sample_inverse_gaussian({ig.mu, ig.lambda}, rng);
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw config_error(msg);
}

} // namespace

const std::vector<std::string>& family_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [name, f] : family_table()) v.push_back(name);
        return v;
    }();
    return names;
}

std::string family_name(Family f) {
    for (const auto& [name, g] : family_table()) {
        if (g == f) return name;
    }
    return "unknown";
}

std::optional<Family> parse_family(const std::string& name) {
    for (const auto& [n, f] : family_table()) {
        if (n == name) return f;
    }
    return std::nullopt;
}

bool is_ssvs(Family f) {
    return f == Family::ssvs_fixed || f == Family::ssvs_nh || f == Family::ssvs_lasso1 || f == Family::ssvs_lasso2 ||
           f == Family::ssvs_lasso3;
}

bool is_selection(Family f) { return is_ssvs(f) || f == Family::kuo_mallick; }

Scaling default_scaling(Family f) {
    switch (f) {
    case Family::normal_gamma:
    case Family::tpb:
    case Family::kuo_mallick:
        return Scaling::independent;
    default:
        return Scaling::conjugate;
    }
}

void PriorSpec::validate(int p) const {
    require(sigma_a0 >= 0.0 && sigma_b0 >= 0.0, "sigma2 prior parameters must be nonnegative");
    switch (family) {
    case Family::student_t:
        require(rho > 0.0 && xi > 0.0, "student_t requires rho > 0 and xi > 0");
        break;
    case Family::lasso_pc:
    case Family::gdp:
        require(r > 0.0 && delta > 0.0, "rate prior requires r > 0 and delta > 0");
        require(lambda_sq > 0.0, "lambda_sq must be positive");
        break;
    case Family::fused_lasso:
        require(r > 0.0 && delta > 0.0, "rate prior requires r > 0 and delta > 0");
        require(lambda1_sq > 0.0 && lambda2_sq > 0.0, "fused penalties must be positive");
        break;
    case Family::group_lasso: {
        require(r > 0.0 && delta > 0.0, "rate prior requires r > 0 and delta > 0");
        require(static_cast<int>(groups.size()) == p, "group map must assign every coefficient");
        int k = 0;
        for (int g : groups) {
            require(g >= 0, "group indices must be nonnegative");
            k = std::max(k, g + 1);
        }
        std::set<int> used(groups.begin(), groups.end());
        require(static_cast<int>(used.size()) == k, "group map has an empty group");
        break;
    }
    case Family::elastic_net_kyung:
        require(r1 > 0.0 && delta1 > 0.0 && r2 > 0.0 && delta2 > 0.0, "elastic net rate priors must be positive");
        break;
    case Family::normal_gamma:
        require(ng_lambda > 0.0 && ng_gamma2 > 0.0, "normal_gamma requires lambda > 0 and gamma2 > 0");
        break;
    case Family::dirichlet_laplace:
        require(dl_alpha > 0.0, "dirichlet_laplace requires alpha > 0");
        break;
    case Family::tpb:
        require(tpb_a > 0.0 && tpb_b > 0.0, "tpb requires a > 0 and b > 0");
        break;
    case Family::ssvs_fixed:
        require(tau0_sq > 0.0 && tau1_sq > tau0_sq, "ssvs requires tau1_sq > tau0_sq > 0");
        break;
    case Family::ssvs_lasso1:
    case Family::ssvs_lasso2:
        require(c1 > 0.0 && c2 > 0.0 && c2 < 1.0, "ssvs_lasso requires c1 > 0 and 0 < c2 < 1");
        require(r1 > 0.0 && delta1 > 0.0, "ssvs_lasso requires r1 > 0 and delta1 > 0");
        break;
    case Family::ssvs_lasso3:
        require(lambda0 > lambda1 && lambda1 > 0.0, "ssvs_lasso3 requires lambda0 > lambda1 > 0");
        break;
    case Family::kuo_mallick:
        require(km_tau2 > 0.0, "kuo_mallick requires tau2 > 0");
        require(km_inclusion > 0.0 && km_inclusion <= 1.0, "kuo_mallick inclusion must lie in (0, 1]");
        break;
    default:
        break;
    }
    if (is_ssvs(family)) {
        require(theta > 0.0 && theta < 1.0, "theta must lie in (0, 1)");
        require(beta_c > 0.0 && beta_d > 0.0, "Beta prior on theta requires c, d > 0");
    }
    if (family == Family::fused_lasso) require(p >= 1, "fused lasso needs p >= 1");
}

NhDefaults narisetty_he_defaults(int n, int p, double sigma_hat2) {
    NhDefaults d{};
    const double nn = static_cast<double>(n);
    const double pp = static_cast<double>(p);
    d.tau0_sq = sigma_hat2 / (10.0 * nn);
    d.tau1_sq = sigma_hat2 * std::max(std::pow(pp, 2.1) / (100.0 * nn), std::log(nn));
    const double K = std::max(10.0, std::log(nn));
    const double k = std::floor(K);
    if (pp <= k) {
        d.theta = 0.5;
        return d;
    }
    auto excess = [&](double th) {
        boost::math::binomial_distribution<double> bin(pp, th);
        return (1.0 - boost::math::cdf(bin, k)) - 0.1;
    };
    boost::math::tools::eps_tolerance<double> tol(50);
    std::uintmax_t iters = 200;
    auto root = boost::math::tools::toms748_solve(excess, 1e-12, 1.0 - 1e-12, tol, iters);
    d.theta = 0.5 * (root.first + root.second);
    return d;
}

PriorSpec resolve_for_data(const PriorSpec& spec, int n, int p, double var_y) {
    PriorSpec out = spec;
    if (spec.family == Family::ssvs_nh) {
        NhDefaults d = narisetty_he_defaults(n, p, var_y);
        out.tau0_sq = d.tau0_sq;
        out.tau1_sq = d.tau1_sq;
        out.theta = d.theta;
        out.learn_theta = false;
    }
    return out;
}

ScaleState initial_scales(const PriorSpec& spec, int p) {
    ScaleState s;
    s.dim = p;
    s.local_tau2 = Eigen::VectorXd::Ones(p);
    switch (spec.family) {
    case Family::lasso_pc:
        s.global["lambda_sq"] = spec.lambda_sq;
        break;
    case Family::fused_lasso:
        s.fused_omega2 = Eigen::VectorXd::Ones(std::max(p - 1, 0));
        s.global["lambda1_sq"] = spec.lambda1_sq;
        s.global["lambda2_sq"] = spec.lambda2_sq;
        break;
    case Family::group_lasso: {
        int k = 0;
        for (int g : spec.groups) k = std::max(k, g + 1);
        s.local_tau2 = Eigen::VectorXd::Ones(k);
        s.global["lambda_sq"] = spec.lambda_sq;
        break;
    }
    case Family::elastic_net_kyung:
        s.global["lambda1_sq"] = 1.0;
        s.global["lambda2"] = 1.0;
        break;
    case Family::gdp:
        s.local_lambda = Eigen::VectorXd::Ones(p);
        break;
    case Family::dirichlet_laplace:
        s.dl_psi = Eigen::VectorXd::Constant(p, 1.0 / p);
        s.dl_T = Eigen::VectorXd::Ones(p);
        s.global["lambda"] = static_cast<double>(p);
        break;
    case Family::horseshoe_ms:
    case Family::horseshoe_slice:
        s.local_lambda = Eigen::VectorXd::Ones(p);
        s.aux = Eigen::VectorXd::Ones(p);
        s.global["tau2"] = 1.0;
        s.global["xi"] = 1.0;
        break;
    case Family::tpb:
        s.local_lambda = Eigen::VectorXd::Ones(p);
        s.global["phi"] = 1.0;
        s.global["omega"] = 1.0;
        break;
    case Family::ssvs_fixed:
    case Family::ssvs_nh:
        s.local_tau2 = Eigen::VectorXd::Constant(p, spec.tau1_sq);
        s.spike_tau2 = Eigen::VectorXd::Constant(p, spec.tau0_sq);
        break;
    case Family::ssvs_lasso1:
        s.spike_tau2 = Eigen::VectorXd::Constant(p, spec.c1);
        s.global["lambda1_sq"] = 1.0;
        break;
    case Family::ssvs_lasso2:
        s.spike_tau2 = Eigen::VectorXd::Constant(p, spec.c2);
        s.global["lambda1_sq"] = 1.0;
        break;
    case Family::ssvs_lasso3:
        // Spike variances start at their prior mean 2 / lambda0^2.
        s.spike_tau2 = Eigen::VectorXd::Constant(p, 2.0 / (spec.lambda0 * spec.lambda0));
        break;
    case Family::kuo_mallick:
        s.local_tau2 = Eigen::VectorXd::Constant(p, spec.km_tau2);
        break;
    default:
        break;
    }
    if (is_selection(spec.family)) {
        s.gamma = Eigen::VectorXi::Ones(p);
        s.global["theta"] = spec.family == Family::kuo_mallick ? spec.km_inclusion : spec.theta;
    }
    return s;
}

PriorPrecision prior_precision(const PriorSpec& spec, const ScaleState& st) {
    const Eigen::Index p = st.dim;
    PriorPrecision out;
    out.diag.resize(p);
    switch (spec.family) {
    case Family::fused_lasso: {
        for (Eigen::Index j = 0; j < p; ++j) out.diag(j) = inv_floor(st.local_tau2(j));
        if (spec.fused_differences && p > 1) {
            out.offdiag.resize(p - 1);
            for (Eigen::Index j = 0; j + 1 < p; ++j) {
                double w = inv_floor(st.fused_omega2(j));
                out.diag(j) += w;
                out.diag(j + 1) += w;
                out.offdiag(j) = -w;
            }
        }
        return out;
    }
    case Family::elastic_net_kyung: {
        const double l2 = st.get("lambda2");
        for (Eigen::Index j = 0; j < p; ++j) out.diag(j) = inv_floor(st.local_tau2(j)) + l2;
        return out;
    }
    default: {
        Eigen::VectorXd d = prior_variance(spec, st);
        for (Eigen::Index j = 0; j < p; ++j) out.diag(j) = inv_floor(d(j));
        return out;
    }
    }
}

Eigen::VectorXd prior_variance(const PriorSpec& spec, const ScaleState& st) {
    const Eigen::Index p = st.dim;
    Eigen::VectorXd d(p);
    switch (spec.family) {
    case Family::group_lasso:
        for (Eigen::Index j = 0; j < p; ++j) d(j) = st.local_tau2(spec.groups[static_cast<std::size_t>(j)]);
        break;
    case Family::fused_lasso:
    case Family::elastic_net_kyung:
        d = prior_precision(spec, st).diag.cwiseInverse();
        break;
    case Family::dirichlet_laplace: {
        const double lam = st.get("lambda");
        d = (lam * lam) * st.local_tau2.array() * st.dl_psi.array().square();
        break;
    }
    case Family::horseshoe_ms:
    case Family::horseshoe_slice:
        d = st.get("tau2") * st.local_lambda;
        break;
    case Family::ssvs_fixed:
    case Family::ssvs_nh:
    case Family::ssvs_lasso1:
    case Family::ssvs_lasso2:
    case Family::ssvs_lasso3:
        for (Eigen::Index j = 0; j < p; ++j) d(j) = st.gamma(j) == 1 ? st.local_tau2(j) : st.spike_tau2(j);
        break;
    default:
        d = st.local_tau2;
        break;
    }
    return d;
}

IgParams laplace_ig_params(double beta_sq, double lambda_sq, double s) {
    const double b2 = std::max(beta_sq, kBetaFloor * kBetaFloor);
    return {std::sqrt(lambda_sq * s / b2), lambda_sq};
}

double ssvs_inclusion_probability(double beta, double s, double tau0_sq, double tau1_sq, double theta) {
    const double b2 = beta * beta;
    const double l1 = std::log(theta) - 0.5 * std::log(s * tau1_sq) - b2 / (2.0 * s * tau1_sq);
    const double l0 = std::log1p(-theta) - 0.5 * std::log(s * tau0_sq) - b2 / (2.0 * s * tau0_sq);
    return 1.0 / (1.0 + std::exp(l0 - l1));
}

double chipman_threshold(double tau0_sq, double tau1_sq) {
    return std::sqrt(std::log(tau1_sq / tau0_sq) / (1.0 / tau0_sq - 1.0 / tau1_sq));
}

GammaParams student_t_conditional(double beta, double s, const PriorSpec& spec) {
    return {spec.rho + 0.5, spec.xi + beta * beta / (2.0 * s)};
}

GammaParams lambda_sq_conditional(const Eigen::VectorXd& tau2, double r, double delta) {
    return {r + static_cast<double>(tau2.size()), tau2.sum() / 2.0 + delta};
}

GammaParams group_lambda_sq_conditional(const Eigen::VectorXd& group_tau2, Eigen::Index p, const PriorSpec& spec) {
    return {(static_cast<double>(p) + static_cast<double>(group_tau2.size())) / 2.0 + spec.r,
            group_tau2.sum() / 2.0 + spec.delta};
}

GammaParams elastic_net_ridge_conditional(const Eigen::VectorXd& beta, double s, const PriorSpec& spec) {
    return {spec.r2 + static_cast<double>(beta.size()) / 2.0, beta.squaredNorm() / (2.0 * s) + spec.delta2};
}

GammaParams gdp_rate_conditional(double beta, double s, const PriorSpec& spec) {
    return {spec.r + 1.0, std::abs(beta) / std::sqrt(s) + spec.delta};
}

GigParams normal_gamma_conditional(double beta, double s, const PriorSpec& spec) {
    return {spec.ng_lambda - 0.5, 1.0 / spec.ng_gamma2, floored_sq(beta) / s};
}

InvGammaParams horseshoe_local_conditional(double beta, double v, double tau2, double s) {
    return {1.0, 1.0 / v + beta * beta / (2.0 * tau2 * s)};
}

InvGammaParams horseshoe_aux_conditional(double lambda_sq) { return {1.0, 1.0 + 1.0 / lambda_sq}; }

GammaParams tpb_phi_conditional(const Eigen::VectorXd& lambda, double omega, const PriorSpec& spec) {
    return {static_cast<double>(lambda.size()) * spec.tpb_b + 0.5, lambda.sum() + omega};
}

GammaParams tpb_omega_conditional(double phi) { return {1.0, phi + 1.0}; }

void update_jeffreys(ScaleState& st, const Eigen::VectorXd& beta, double sigma2, const PriorSpec& spec, RngStream& rng) {
    const double s = scale_of(spec, sigma2);
    for (Eigen::Index j = 0; j < beta.size(); ++j) st.local_tau2(j) = rng.inv_gamma(0.5, floored_sq(beta(j)) / (2.0 * s));
}

void update_student_t(ScaleState& st, const Eigen::VectorXd& beta, double sigma2, const PriorSpec& spec, RngStream& rng) {
    const double s = scale_of(spec, sigma2);
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        const GammaParams g = student_t_conditional(beta(j), s, spec);
        st.local_tau2(j) = 1.0 / rng.gamma(g.shape, g.rate);
    }
}

void update_lasso_pc(ScaleState& st, const Eigen::VectorXd& beta, double sigma2, const PriorSpec& spec, RngStream& rng) {
    const double s = scale_of(spec, sigma2);
    const double lam2 = st.get("lambda_sq");
    for (Eigen::Index j = 0; j < beta.size(); ++j) st.local_tau2(j) = draw_laplace_tau2(beta(j) * beta(j), lam2, s, rng);
    if (spec.learn_lambda) {
        const GammaParams g = lambda_sq_conditional(st.local_tau2, spec.r, spec.delta);
        st.global["lambda_sq"] = rng.gamma(g.shape, g.rate);
    }
}

void update_fused_lasso(ScaleState& st, const Eigen::VectorXd& beta, double sigma2, const PriorSpec& spec, RngStream& rng) {
    const double s = scale_of(spec, sigma2);
    const Eigen::Index p = beta.size();
    const double l1 = st.get("lambda1_sq");
    const double l2 = st.get("lambda2_sq");
    for (Eigen::Index j = 0; j < p; ++j) st.local_tau2(j) = draw_laplace_tau2(beta(j) * beta(j), l1, s, rng);
    if (spec.fused_differences) {
        for (Eigen::Index j = 0; j + 1 < p; ++j) {
            double d = beta(j + 1) - beta(j);
            st.fused_omega2(j) = draw_laplace_tau2(d * d, l2, s, rng);
        }
    }
    if (spec.learn_lambda) {
        const GammaParams g1 = lambda_sq_conditional(st.local_tau2, spec.r, spec.delta);
        st.global["lambda1_sq"] = rng.gamma(g1.shape, g1.rate);
        if (spec.fused_differences && p > 1) {
            const GammaParams g2 = lambda_sq_conditional(st.fused_omega2, spec.r, spec.delta);
            st.global["lambda2_sq"] = rng.gamma(g2.shape, g2.rate);
        }
    }
}

void update_group_lasso(ScaleState& st, const Eigen::VectorXd& beta, double sigma2, const PriorSpec& spec, RngStream& rng) {
    const double s = scale_of(spec, sigma2);
    const Eigen::Index k = st.local_tau2.size();
    Eigen::VectorXd norms = Eigen::VectorXd::Zero(k);
    for (Eigen::Index j = 0; j < beta.size(); ++j) norms(spec.groups[static_cast<std::size_t>(j)]) += beta(j) * beta(j);
    const double lam2 = st.get("lambda_sq");
    for (Eigen::Index g = 0; g < k; ++g) st.local_tau2(g) = draw_laplace_tau2(norms(g), lam2, s, rng);
    if (spec.learn_lambda) {
        const GammaParams g = group_lambda_sq_conditional(st.local_tau2, beta.size(), spec);
        st.global["lambda_sq"] = rng.gamma(g.shape, g.rate);
    }
}

void update_elastic_net(ScaleState& st, const Eigen::VectorXd& beta, double sigma2, const PriorSpec& spec, RngStream& rng) {
    const double s = scale_of(spec, sigma2);
    const double l1 = st.get("lambda1_sq");
    for (Eigen::Index j = 0; j < beta.size(); ++j) st.local_tau2(j) = draw_laplace_tau2(beta(j) * beta(j), l1, s, rng);
    const GammaParams g1 = lambda_sq_conditional(st.local_tau2, spec.r1, spec.delta1);
    st.global["lambda1_sq"] = rng.gamma(g1.shape, g1.rate);
    const GammaParams g2 = elastic_net_ridge_conditional(beta, s, spec);
    st.global["lambda2"] = rng.gamma(g2.shape, g2.rate);
}

void update_gdp(ScaleState& st, const Eigen::VectorXd& beta, double sigma2, const PriorSpec& spec, RngStream& rng) {
    const double s = scale_of(spec, sigma2);
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        // lambda_j drawn with tau_j integrated out, then tau_j given lambda_j.
        const GammaParams g = gdp_rate_conditional(beta(j), s, spec);
        const double lam = rng.gamma(g.shape, g.rate);
        st.local_lambda(j) = lam;
        st.local_tau2(j) = draw_laplace_tau2(beta(j) * beta(j), lam * lam, s, rng);
    }
}

void update_normal_gamma(ScaleState& st, const Eigen::VectorXd& beta, double sigma2, const PriorSpec& spec, RngStream& rng) {
    const double s = scale_of(spec, sigma2);
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        st.local_tau2(j) = sample_gig(normal_gamma_conditional(beta(j), s, spec), rng);
    }
}

void update_dirichlet_laplace(ScaleState& st, const Eigen::VectorXd& beta, double sigma2, const PriorSpec& spec, RngStream& rng) {
    const double sd = std::sqrt(scale_of(spec, sigma2));
    const Eigen::Index p = beta.size();
    const double alpha = spec.dl_alpha;
    Eigen::VectorXd absb = beta.cwiseAbs().cwiseMax(kBetaFloor);
    // psi | beta with lambda and tau integrated out.
    for (Eigen::Index j = 0; j < p; ++j) st.dl_T(j) = sample_gig({alpha - 1.0, 1.0, 2.0 * absb(j) / sd}, rng);
    st.dl_psi = st.dl_T / st.dl_T.sum();
    for (Eigen::Index j = 0; j < p; ++j) st.dl_psi(j) = std::max(st.dl_psi(j), std::numeric_limits<double>::min());
    // lambda | psi, beta with tau integrated out.
    double b = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) b += absb(j) / st.dl_psi(j);
    const double lam = sample_gig({static_cast<double>(p) * (alpha - 1.0), 1.0, 2.0 * b / sd}, rng);
    st.global["lambda"] = lam;
    for (Eigen::Index j = 0; j < p; ++j) {
        const double mu = lam * st.dl_psi(j) * sd / absb(j);
        st.local_tau2(j) = 1.0 / sample_inverse_gaussian({mu, 1.0}, rng);
    }
}

void update_horseshoe(ScaleState& st, const Eigen::VectorXd& beta, double sigma2, const PriorSpec& spec, RngStream& rng) {
    const double s = scale_of(spec, sigma2);
    const Eigen::Index p = beta.size();
    const double pp = static_cast<double>(p);
    double tau2 = st.get("tau2");
    if (spec.family == Family::horseshoe_slice) {
        for (Eigen::Index j = 0; j < p; ++j) {
            const double mu = beta(j) * beta(j) / (2.0 * s * tau2);
            st.local_lambda(j) = 1.0 / slice_halfcauchy(1.0 / st.local_lambda(j), mu, 1.0, rng);
        }
        double q = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) q += beta(j) * beta(j) / st.local_lambda(j);
        tau2 = 1.0 / slice_halfcauchy(1.0 / tau2, q / (2.0 * s), (pp + 1.0) / 2.0, rng);
        st.global["tau2"] = tau2;
        return;
    }
    for (Eigen::Index j = 0; j < p; ++j) {
        const InvGammaParams l = horseshoe_local_conditional(beta(j), st.aux(j), tau2, s);
        st.local_lambda(j) = rng.inv_gamma(l.shape, l.scale);
        const InvGammaParams v = horseshoe_aux_conditional(st.local_lambda(j));
        st.aux(j) = rng.inv_gamma(v.shape, v.scale);
    }
    double q = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) q += beta(j) * beta(j) / st.local_lambda(j);
    tau2 = rng.inv_gamma((pp + 1.0) / 2.0, 1.0 / st.get("xi") + q / (2.0 * s));
    st.global["tau2"] = tau2;
    st.global["xi"] = rng.inv_gamma(1.0, 1.0 + 1.0 / tau2);
}

void update_tpb(ScaleState& st, const Eigen::VectorXd& beta, double sigma2, const PriorSpec& spec, RngStream& rng) {
    const double s = scale_of(spec, sigma2);
    const Eigen::Index p = beta.size();
    const double a = spec.tpb_a;
    const double b = spec.tpb_b;
    for (Eigen::Index j = 0; j < p; ++j) {
        st.local_tau2(j) = sample_gig({a - 0.5, 2.0 * st.local_lambda(j), floored_sq(beta(j)) / s}, rng);
    }
    const double phi_old = st.get("phi");
    for (Eigen::Index j = 0; j < p; ++j) st.local_lambda(j) = rng.gamma(a + b, st.local_tau2(j) + phi_old);
    const GammaParams gp = tpb_phi_conditional(st.local_lambda, st.get("omega"), spec);
    const double phi = rng.gamma(gp.shape, gp.rate);
    st.global["phi"] = phi;
    const GammaParams go = tpb_omega_conditional(phi);
    st.global["omega"] = rng.gamma(go.shape, go.rate);
}

void update_ssvs(ScaleState& st, const Eigen::VectorXd& beta, double sigma2, const PriorSpec& spec, RngStream& rng) {
    const double s = scale_of(spec, sigma2);
    const Eigen::Index p = beta.size();
    const double theta = st.get("theta");
    for (int j : rng.permutation(static_cast<int>(p))) {
        double w = ssvs_inclusion_probability(beta(j), s, st.spike_tau2(j), st.local_tau2(j), theta);
        st.gamma(j) = rng.bernoulli(w) ? 1 : 0;
    }
    update_ssvs_hyper(st, beta, sigma2, spec, rng);
}

void update_ssvs_hyper(ScaleState& st, const Eigen::VectorXd& beta, double sigma2, const PriorSpec& spec, RngStream& rng) {
    const double s = scale_of(spec, sigma2);
    const Eigen::Index p = beta.size();
    const double pp = static_cast<double>(p);
    double theta = st.get("theta");
    const double active = static_cast<double>(st.gamma.sum());
    if (spec.learn_theta) {
        theta = rng.beta(spec.beta_c + active, spec.beta_d + pp - active);
        theta = std::clamp(theta, 1e-12, 1.0 - 1e-12);
        st.global["theta"] = theta;
    }

    switch (spec.family) {
    case Family::ssvs_lasso1: {
        const double l1 = st.get("lambda1_sq");
        double sum_active = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (st.gamma(j) == 1) {
                st.local_tau2(j) = draw_laplace_tau2(beta(j) * beta(j), l1, s, rng);
                sum_active += st.local_tau2(j);
            }
        }
        // Slab variances of excluded coordinates are collapsed out of this draw.
        const double l1_new = rng.gamma(active + spec.r1, sum_active / 2.0 + spec.delta1);
        st.global["lambda1_sq"] = l1_new;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (st.gamma(j) == 0) st.local_tau2(j) = rng.exponential(l1_new / 2.0);
        }
        break;
    }
    case Family::ssvs_lasso2: {
        const double l1 = st.get("lambda1_sq");
        for (Eigen::Index j = 0; j < p; ++j) {
            if (st.gamma(j) == 1) {
                st.local_tau2(j) = draw_laplace_tau2(beta(j) * beta(j), l1, s, rng);
            } else {
                st.local_tau2(j) = draw_laplace_tau2(beta(j) * beta(j) / spec.c2, l1, s, rng);
            }
        }
        st.global["lambda1_sq"] = rng.gamma(pp + spec.r1, st.local_tau2.sum() / 2.0 + spec.delta1);
        st.spike_tau2 = spec.c2 * st.local_tau2;
        break;
    }
    case Family::ssvs_lasso3: {
        const double l0 = spec.lambda0 * spec.lambda0;
        const double l1 = spec.lambda1 * spec.lambda1;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (st.gamma(j) == 1) {
                st.local_tau2(j) = draw_laplace_tau2(beta(j) * beta(j), l1, s, rng);
                st.spike_tau2(j) = rng.exponential(l0 / 2.0);
            } else {
                st.spike_tau2(j) = draw_laplace_tau2(beta(j) * beta(j), l0, s, rng);
                st.local_tau2(j) = rng.exponential(l1 / 2.0);
            }
        }
        break;
    }
    default:
        break;
    }
}

void update_kuo_mallick(ScaleState& st, const Eigen::VectorXd& beta, double sigma2, const PriorSpec& spec,
                        const Eigen::MatrixXd& X, const Eigen::VectorXd& y, RngStream& rng) {
    const Eigen::Index p = beta.size();
    Eigen::VectorXd theta = beta.cwiseProduct(st.gamma.cast<double>());
    Eigen::VectorXd resid = y - X * theta;
    const double pj = spec.km_inclusion;
    for (int j : rng.permutation(static_cast<int>(p))) {
        // Residual with coordinate j excluded.
        Eigen::VectorXd e0 = resid + X.col(j) * theta(j);
        int g;
        if (pj >= 1.0) {
            g = 1;
        } else {
            const double bj = beta(j);
            const double quad = bj * bj * X.col(j).squaredNorm() - 2.0 * bj * X.col(j).dot(e0);
            const double logodds = std::log(pj) - std::log1p(-pj) - quad / (2.0 * sigma2);
            g = rng.bernoulli(1.0 / (1.0 + std::exp(-logodds))) ? 1 : 0;
        }
        st.gamma(j) = g;
        theta(j) = g ? beta(j) : 0.0;
        resid = e0 - X.col(j) * theta(j);
    }
}

void update_scales(ScaleState& st, const Eigen::VectorXd& beta, double sigma2, const PriorSpec& spec, RngStream& rng) {
    switch (spec.family) {
    case Family::jeffreys:
        update_jeffreys(st, beta, sigma2, spec, rng);
        break;
    case Family::student_t:
        update_student_t(st, beta, sigma2, spec, rng);
        break;
    case Family::lasso_pc:
        update_lasso_pc(st, beta, sigma2, spec, rng);
        break;
    case Family::fused_lasso:
        update_fused_lasso(st, beta, sigma2, spec, rng);
        break;
    case Family::group_lasso:
        update_group_lasso(st, beta, sigma2, spec, rng);
        break;
    case Family::elastic_net_kyung:
        update_elastic_net(st, beta, sigma2, spec, rng);
        break;
    case Family::gdp:
        update_gdp(st, beta, sigma2, spec, rng);
        break;
    case Family::normal_gamma:
        update_normal_gamma(st, beta, sigma2, spec, rng);
        break;
    case Family::dirichlet_laplace:
        update_dirichlet_laplace(st, beta, sigma2, spec, rng);
        break;
    case Family::horseshoe_ms:
    case Family::horseshoe_slice:
        update_horseshoe(st, beta, sigma2, spec, rng);
        break;
    case Family::tpb:
        update_tpb(st, beta, sigma2, spec, rng);
        break;
    case Family::ssvs_fixed:
    case Family::ssvs_nh:
    case Family::ssvs_lasso1:
    case Family::ssvs_lasso2:
    case Family::ssvs_lasso3:
        update_ssvs(st, beta, sigma2, spec, rng);
        break;
    case Family::kuo_mallick:
        break;
    }
}

} // namespace shrinkage
