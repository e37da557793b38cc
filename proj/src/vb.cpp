#include "shrinkage/vb.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/digamma.hpp>

#include "shrinkage/errors.hpp"

namespace shrinkage {

namespace {

double logit(double p) { return std::log(p) - std::log1p(-p); }

double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double bernoulli_entropy(double p) {
    double h = 0.0;
    if (p > 0.0) h -= p * std::log(p);
    if (p < 1.0) h -= (1.0 - p) * std::log1p(-p);
    return h;
}

Eigen::MatrixXd omega(const Eigen::VectorXd& pi) {
    Eigen::MatrixXd om = pi * pi.transpose();
    om.diagonal() = pi;
    return om;
}

// E_q ||y - X Gamma beta||^2
double expected_rss(const VBState& s, const VbData& d) {
    const Eigen::MatrixXd second = s.mu * s.mu.transpose() + s.V;
    const double cross = s.pi.cwiseProduct(s.mu).dot(d.Xty);
    const double quad = (d.XtX.cwiseProduct(omega(s.pi))).cwiseProduct(second).sum();
    return d.yty - 2.0 * cross + quad;
}

} // namespace

VbHyper VbHyper::defaults(int p, double slab_variance) {
    VbHyper h;
    h.prior_variance = Eigen::VectorXd::Constant(p, slab_variance);
    return h;
}

void VbHyper::validate(int p) const {
    if (prior_variance.size() != p) throw config_error("vb: prior variance has length " +
                                                       std::to_string(prior_variance.size()) + ", expected " +
                                                       std::to_string(p));
    if ((prior_variance.array() <= 0.0).any() || !prior_variance.allFinite())
        throw config_error("vb: prior variances must be positive");
    if (!(pi0 > 0.0 && pi0 < 1.0)) throw config_error("vb: pi0 must lie in (0, 1)");
    if (!(a0 > 0.0) || !(b0 > 0.0)) throw config_error("vb: a0 and b0 must be positive");
}

VbData::VbData(const Dataset& d)
    : XtX(d.X.transpose() * d.X), Xty(d.X.transpose() * d.y), yty(d.y.squaredNorm()), n(d.n()) {}

VBState cavi_init(const VbData& data, const VbHyper& hyper, double var_y) {
    const int p = data.p();
    hyper.validate(p);
    if (!(var_y > 0.0) || !std::isfinite(var_y)) throw config_error("vb: response has zero variance");
    VBState s;
    s.pi = Eigen::VectorXd::Constant(p, hyper.pi0);
    s.kappa = 1.0 / var_y;
    s.mu = Eigen::VectorXd::Zero(p);
    s.V = hyper.prior_variance.asDiagonal();
    s.a = hyper.a0 + 0.5 * data.n;
    s.b = s.a / s.kappa;
    return s;
}

void update_q_beta(VBState& s, const VbData& data, const VbHyper& hyper) {
    Eigen::MatrixXd prec = s.kappa * data.XtX.cwiseProduct(omega(s.pi));
    prec.diagonal() += hyper.prior_variance.cwiseInverse();
    Eigen::LLT<Eigen::MatrixXd> llt(prec);
    if (llt.info() != Eigen::Success) throw numeric_error("vb: q(beta) precision is not positive definite");
    const int p = data.p();
    s.V = llt.solve(Eigen::MatrixXd::Identity(p, p));
    s.V = 0.5 * (s.V + s.V.transpose());
    s.mu = s.kappa * (s.V * s.pi.cwiseProduct(data.Xty));
}

void update_q_sigma2(VBState& s, const VbData& data, const VbHyper& hyper) {
    s.a = hyper.a0 + 0.5 * data.n;
    s.b = hyper.b0 + 0.5 * expected_rss(s, data);
    if (!(s.b > 0.0) || !std::isfinite(s.b)) throw numeric_error("vb: q(sigma^2) scale is not positive");
    s.kappa = s.a / s.b;
}

void update_q_gamma(VBState& s, const VbData& data, const VbHyper& hyper) {
    const int p = data.p();
    const double prior_logit = logit(hyper.pi0);
    for (int j = 0; j < p; ++j) {
        double cross = 0.0;
        for (int k = 0; k < p; ++k) {
            if (k == j) continue;
            cross += data.XtX(j, k) * s.pi(k) * (s.mu(k) * s.mu(j) + s.V(k, j));
        }
        const double eta = prior_logit - 0.5 * s.kappa * (s.mu(j) * s.mu(j) + s.V(j, j)) * data.XtX(j, j) +
                           s.kappa * (s.mu(j) * data.Xty(j) - cross);
        s.pi(j) = sigmoid(eta);
    }
}

void cavi_sweep(VBState& s, const VbData& data, const VbHyper& hyper) {
    update_q_beta(s, data, hyper);
    update_q_sigma2(s, data, hyper);
    update_q_gamma(s, data, hyper);
    s.elbo_trace.push_back(compute_elbo(s, data, hyper));
}

double compute_elbo(const VBState& s, const VbData& data, const VbHyper& hyper) {
    const int p = data.p();
    const double log2pi = std::log(2.0 * std::numbers::pi);
    const double e_log_s2 = std::log(s.b) - boost::math::digamma(s.a);
    const double e_inv_s2 = s.a / s.b;

    double elbo = -0.5 * data.n * (log2pi + e_log_s2) - 0.5 * e_inv_s2 * expected_rss(s, data);

    // beta ~ N(0, D)
    const Eigen::VectorXd& D = hyper.prior_variance;
    elbo += -0.5 * p * log2pi - 0.5 * D.array().log().sum() -
            0.5 * ((s.mu.array().square() + s.V.diagonal().array()) / D.array()).sum();
    // sigma^2 ~ InvGamma(a0, b0)
    elbo += hyper.a0 * std::log(hyper.b0) - std::lgamma(hyper.a0) - (hyper.a0 + 1.0) * e_log_s2 - hyper.b0 * e_inv_s2;
    // gamma_j ~ Bernoulli(pi0)
    const double lp1 = std::log(hyper.pi0), lp0 = std::log1p(-hyper.pi0);
    for (int j = 0; j < p; ++j) elbo += s.pi(j) * lp1 + (1.0 - s.pi(j)) * lp0;

    Eigen::LLT<Eigen::MatrixXd> llt(s.V);
    const double logdet_v = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    elbo += 0.5 * p * (1.0 + log2pi) + 0.5 * logdet_v;
    elbo += s.a + std::log(s.b) + std::lgamma(s.a) - (1.0 + s.a) * boost::math::digamma(s.a);
    for (int j = 0; j < p; ++j) elbo += bernoulli_entropy(s.pi(j));
    return elbo;
}

VBState run_cavi(const Dataset& d, const VbHyper& hyper, double tol, int max_iters) {
    if (!(tol > 0.0)) throw config_error("vb: tol must be positive");
    if (max_iters < 0) throw config_error("vb: max_iters must be non-negative");
    const VbData data(d);
    VBState s = cavi_init(data, hyper, sample_variance(d.y));
    double previous = compute_elbo(s, data, hyper);
    for (int it = 0; it < max_iters; ++it) {
        cavi_sweep(s, data, hyper);
        ++s.iterations;
        const double current = s.elbo_trace.back();
        if (!std::isfinite(current)) throw numeric_error("vb: non-finite ELBO at iteration " + std::to_string(it));
        if (std::abs(current - previous) < tol * std::abs(previous)) {
            s.converged = true;
            break;
        }
        previous = current;
    }
    return s;
}

double log_evidence_spike_slab(const VbData& data, const VbHyper& hyper) {
    const int p = data.p();
    hyper.validate(p);
    if (p > 20) throw config_error("vb: model enumeration limited to p <= 20");
    const int n = data.n;
    const double log2pi = std::log(2.0 * std::numbers::pi);

    // log p(y | gamma, sigma^2) with beta_gamma ~ N(0, D_gamma) integrated out.
    auto log_lik = [&](const std::vector<int>& idx, double s2) {
        const int k = static_cast<int>(idx.size());
        double quad = data.yty, logdet = n * std::log(s2);
        if (k > 0) {
            Eigen::MatrixXd A(k, k);
            Eigen::VectorXd b(k);
            for (int r = 0; r < k; ++r) {
                b(r) = data.Xty(idx[r]);
                for (int c = 0; c < k; ++c) A(r, c) = data.XtX(idx[r], idx[c]);
                A(r, r) += s2 / hyper.prior_variance(idx[r]);
            }
            Eigen::LLT<Eigen::MatrixXd> llt(A);
            quad -= b.dot(llt.solve(b));
            // |s2 I + X D X'| = s2^(n-k) |D| |X'X + s2 D^-1|
            logdet += 2.0 * llt.matrixLLT().diagonal().array().log().sum() - k * std::log(s2);
            for (int r = 0; r < k; ++r) logdet += std::log(hyper.prior_variance(idx[r]));
        }
        return -0.5 * (n * log2pi + logdet + quad / s2);
    };
    // InvGamma(a0, b0) on sigma^2, written in t = log sigma^2.
    auto log_prior_t = [&](double t) {
        return hyper.a0 * std::log(hyper.b0) - std::lgamma(hyper.a0) - hyper.a0 * t - hyper.b0 * std::exp(-t);
    };

    std::vector<double> terms;
    for (unsigned mask = 0; mask < (1u << p); ++mask) {
        std::vector<int> idx;
        for (int j = 0; j < p; ++j)
            if (mask & (1u << j)) idx.push_back(j);
        const int k = static_cast<int>(idx.size());
        auto f = [&](double t) { return log_lik(idx, std::exp(t)) + log_prior_t(t); };
        // Locate the mode on a coarse grid, then integrate with the trapezoid rule around it.
        double best_t = 0.0, best = -INFINITY;
        for (double t = -30.0; t <= 30.0; t += 0.05) {
            const double v = f(t);
            if (v > best) best = v, best_t = t;
        }
        const double lo = best_t - 15.0, hi = best_t + 15.0;
        const int m = 12000;
        const double h = (hi - lo) / m;
        double acc = 0.0;
        for (int i = 0; i <= m; ++i) {
            const double w = (i == 0 || i == m) ? 0.5 : 1.0;
            acc += w * std::exp(f(lo + i * h) - best);
        }
        terms.push_back(best + std::log(acc * h) + k * std::log(hyper.pi0) + (p - k) * std::log1p(-hyper.pi0));
    }
    const double top = *std::max_element(terms.begin(), terms.end());
    double sum = 0.0;
    for (double t : terms) sum += std::exp(t - top);
    return top + std::log(sum);
}

} // namespace shrinkage
