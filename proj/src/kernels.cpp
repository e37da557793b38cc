#include "shrinkage/kernels.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "shrinkage/errors.hpp"

namespace shrinkage {

namespace {

int failing_pivot(const Eigen::MatrixXd& Q) {
    const Eigen::Index p = Q.rows();
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        double d = Q(j, j) - L.row(j).head(j).squaredNorm();
        if (!(d > 0.0) || !std::isfinite(d)) return static_cast<int>(j);
        L(j, j) = std::sqrt(d);
        for (Eigen::Index i = j + 1; i < p; ++i) {
            L(i, j) = (Q(i, j) - L.row(i).head(j).dot(L.row(j).head(j))) / L(j, j);
        }
    }
    return -1;
}

Eigen::VectorXd standard_normals(Eigen::Index k, RngStream& rng) {
    Eigen::VectorXd z(k);
    for (Eigen::Index i = 0; i < k; ++i) z(i) = rng.normal();
    return z;
}

} // namespace

void PrecisionSystem::validate() const {
    const Eigen::Index p = rhs.size();
    if (gram.rows() != p || gram.cols() != p || prior_precision_diag.size() != p) {
        throw std::invalid_argument("precision system dimensions disagree");
    }
    if (prior_precision_offdiag.size() != 0 && prior_precision_offdiag.size() != std::max<Eigen::Index>(p - 1, 0)) {
        throw std::invalid_argument("tridiagonal prior precision must have length p-1");
    }
    for (Eigen::Index j = 0; j < p; ++j) {
        if (!(prior_precision_diag(j) > 0.0) || !std::isfinite(prior_precision_diag(j))) {
            throw numeric_error("prior precision entry " + std::to_string(j) + " is not finite and positive");
        }
    }
}

Eigen::MatrixXd PrecisionSystem::precision() const {
    Eigen::MatrixXd Q = gram;
    Q.diagonal() += prior_precision_diag;
    for (Eigen::Index j = 0; j < prior_precision_offdiag.size(); ++j) {
        Q(j, j + 1) += prior_precision_offdiag(j);
        Q(j + 1, j) += prior_precision_offdiag(j);
    }
    return Q;
}

Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& Q) {
    if (!Q.allFinite()) throw numeric_error("precision matrix has non-finite entries");
    Eigen::LLT<Eigen::MatrixXd> llt(Q);
    if (llt.info() == Eigen::Success) return llt.matrixL();

    const double p = static_cast<double>(Q.rows());
    double jitter = 1e-10 * Q.trace() / p;
    if (!(jitter > 0.0)) jitter = 1e-10;
    Eigen::MatrixXd Qj = Q;
    Qj.diagonal().array() += jitter;
    llt.compute(Qj);
    if (llt.info() == Eigen::Success) return llt.matrixL();

    int pivot = failing_pivot(Qj);
    throw numeric_error("precision matrix not positive definite at pivot " + std::to_string(pivot));
}

Eigen::VectorXd sample_mvn_direct(const PrecisionSystem& sys, RngStream& rng) {
    sys.validate();
    const Eigen::MatrixXd L = cholesky_lower(sys.precision());
    const auto Lt = L.transpose().triangularView<Eigen::Upper>();
    Eigen::VectorXd mean = Lt.solve(L.triangularView<Eigen::Lower>().solve(sys.rhs));
    Eigen::VectorXd z = standard_normals(sys.dim(), rng);
    return mean + Lt.solve(z);
}

Eigen::VectorXd sample_mvn_rue(const PrecisionSystem& sys, RngStream& rng) {
    sys.validate();
    const Eigen::MatrixXd L = cholesky_lower(sys.precision());
    Eigen::VectorXd v = L.triangularView<Eigen::Lower>().solve(sys.rhs);
    Eigen::VectorXd mu = L.transpose().triangularView<Eigen::Upper>().solve(v);
    Eigen::VectorXd z = standard_normals(sys.dim(), rng);
    Eigen::VectorXd u = L.transpose().triangularView<Eigen::Upper>().solve(z);
    return mu + u;
}

Eigen::VectorXd sample_mvn_bhattacharya(const Eigen::MatrixXd& X, const Eigen::VectorXd& D_diag,
                                        const Eigen::VectorXd& y_scaled, RngStream& rng) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (D_diag.size() != p || y_scaled.size() != n) {
        throw std::invalid_argument("Bhattacharya sampler dimensions disagree");
    }
    if (!(D_diag.array() >= 0.0).all() || !D_diag.allFinite()) {
        throw numeric_error("prior variances must be finite and nonnegative");
    }
    Eigen::VectorXd eta = D_diag.array().sqrt() * standard_normals(p, rng).array();
    Eigen::VectorXd delta = standard_normals(n, rng);
    Eigen::VectorXd v = X * eta + delta;

    Eigen::MatrixXd XD = X * D_diag.asDiagonal();
    Eigen::MatrixXd M = XD * X.transpose();
    M.diagonal().array() += 1.0;
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success || !M.allFinite()) throw numeric_error("inner system singular");
    Eigen::VectorXd w = llt.solve(y_scaled - v);
    if (!w.allFinite()) throw numeric_error("inner system singular");
    return eta + XD.transpose() * w;
}

namespace {

double gig_mode(double lambda, double omega) {
    if (lambda >= 1.0) return (std::sqrt((lambda - 1.0) * (lambda - 1.0) + omega * omega) + (lambda - 1.0)) / omega;
    return omega / (std::sqrt((1.0 - lambda) * (1.0 - lambda) + omega * omega) + (1.0 - lambda));
}

// Ratio-of-uniforms without mode shift for x^{lambda-1} exp(-omega (x + 1/x) / 2).
double gig_rou_noshift(double lambda, double omega, RngStream& rng, long long& proposals) {
    const double t = 0.5 * (lambda - 1.0);
    const double s = 0.25 * omega;
    const double xm = gig_mode(lambda, omega);
    const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);
    const double ym = ((lambda + 1.0) + std::sqrt((lambda + 1.0) * (lambda + 1.0) + omega * omega)) / omega;
    const double um = std::exp(0.5 * (lambda + 1.0) * std::log(ym) - s * (ym + 1.0 / ym) - nc);
    double x;
    double v;
    do {
        ++proposals;
        double u = um * rng.uniform();
        v = rng.uniform();
        x = u / v;
    } while (std::log(v) > t * std::log(x) - s * (x + 1.0 / x) - nc);
    return x;
}

// Ratio-of-uniforms with mode shift, bounding rectangle from the cubic's roots.
double gig_rou_shift(double lambda, double omega, RngStream& rng, long long& proposals) {
    const double t = 0.5 * (lambda - 1.0);
    const double s = 0.25 * omega;
    const double xm = gig_mode(lambda, omega);
    const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);

    const double a = -(2.0 * (lambda + 1.0) / omega + xm);
    const double b = (2.0 * (lambda - 1.0) * xm / omega - 1.0);
    const double c = xm;
    const double p = b - a * a / 3.0;
    const double q = (2.0 * a * a * a) / 27.0 - (a * b) / 3.0 + c;
    const double fi = std::acos(-q / (2.0 * std::sqrt(-(p * p * p) / 27.0)));
    const double fak = 2.0 * std::sqrt(-p / 3.0);
    const double y1 = fak * std::cos(fi / 3.0) - a / 3.0;
    const double y2 = fak * std::cos(fi / 3.0 + 4.0 / 3.0 * M_PI) - a / 3.0;

    const double uplus = (y1 - xm) * std::exp(t * std::log(y1) - s * (y1 + 1.0 / y1) - nc);
    const double uminus = (y2 - xm) * std::exp(t * std::log(y2) - s * (y2 + 1.0 / y2) - nc);
    double x;
    double v;
    do {
        ++proposals;
        double u = uminus + rng.uniform() * (uplus - uminus);
        v = rng.uniform();
        x = u / v + xm;
    } while (x <= 0.0 || std::log(v) > t * std::log(x) - s * (x + 1.0 / x) - nc);
    return x;
}

// Rejection from a piecewise dominating hat, for 0 <= lambda < 1 and small omega.
double gig_small_omega(double lambda, double omega, RngStream& rng, long long& proposals) {
    const double xm = gig_mode(lambda, omega);
    const double x0 = omega / (1.0 - lambda);
    const double k0 = std::exp((lambda - 1.0) * std::log(xm) - 0.5 * omega * (xm + 1.0 / xm));
    double area[3];
    area[0] = k0 * x0;
    double k1;
    double k2;
    if (x0 >= 2.0 / omega) {
        k1 = 0.0;
        area[1] = 0.0;
        k2 = std::pow(x0, lambda - 1.0);
        area[2] = k2 * 2.0 * std::exp(-omega * x0 / 2.0) / omega;
    } else {
        k1 = std::exp(-omega);
        area[1] = (lambda == 0.0) ? k1 * std::log(2.0 / (omega * omega))
                                  : k1 / lambda * (std::pow(2.0 / omega, lambda) - std::pow(x0, lambda));
        k2 = std::pow(2.0 / omega, lambda - 1.0);
        area[2] = k2 * 2.0 * std::exp(-1.0) / omega;
    }
    const double total = area[0] + area[1] + area[2];
    while (true) {
        ++proposals;
        double v = total * rng.uniform();
        double x;
        double hx;
        if (v <= area[0]) {
            x = x0 * v / area[0];
            hx = k0;
        } else if ((v -= area[0]) <= area[1]) {
            if (lambda == 0.0) {
                x = omega * std::exp(std::exp(omega) * v);
                hx = k1 / x;
            } else {
                x = std::pow(std::pow(x0, lambda) + (lambda / k1 * v), 1.0 / lambda);
                hx = k1 * std::pow(x, lambda - 1.0);
            }
        } else {
            v -= area[1];
            const double lo = (x0 > 2.0 / omega) ? x0 : 2.0 / omega;
            x = -2.0 / omega * std::log(std::exp(-omega / 2.0 * lo) - omega / (2.0 * k2) * v);
            hx = k2 * std::exp(-omega / 2.0 * x);
        }
        double u = rng.uniform() * hx;
        if (std::log(u) <= (lambda - 1.0) * std::log(x) - omega / 2.0 * (x + 1.0 / x)) return x;
    }
}

} // namespace

double gig_log_density_unnormalized(const GigParams& g, double x) {
    return (g.nu - 1.0) * std::log(x) - 0.5 * (g.a * x + g.b / x);
}

double sample_gig(const GigParams& params, RngStream& rng, GigCounter* counter) {
    const double nu = params.nu;
    const double a = params.a;
    const double b = params.b;
    if (!std::isfinite(nu) || !std::isfinite(a) || !std::isfinite(b) || a < 0.0 || b < 0.0) {
        throw std::domain_error("GIG parameters must be finite with a, b >= 0");
    }
    if (a == 0.0 && b == 0.0) throw std::domain_error("GIG requires a > 0 or b > 0");
    if (a == 0.0 && !(nu < 0.0)) throw std::domain_error("GIG with a = 0 requires nu < 0");
    if (b == 0.0 && !(nu > 0.0)) throw std::domain_error("GIG with b = 0 requires nu > 0");

    long long proposals = 1;
    double result;
    const double omega = std::sqrt(a * b);
    if (b == 0.0 || (omega < 1e-12 && nu > 0.0)) {
        result = rng.gamma(nu, a / 2.0);
    } else if (a == 0.0 || (omega < 1e-12 && nu < 0.0)) {
        result = rng.inv_gamma(-nu, b / 2.0);
    } else {
        proposals = 0;
        const double alpha = std::sqrt(b / a);
        const double lambda = std::abs(nu);
        const double w = std::max(omega, 1e-150);
        double x;
        if (lambda > 2.0 || w > 3.0) {
            x = gig_rou_shift(lambda, w, rng, proposals);
        } else if (lambda >= 1.0 - 2.25 * w * w || w > 0.2) {
            x = gig_rou_noshift(lambda, w, rng, proposals);
        } else {
            x = gig_small_omega(lambda, w, rng, proposals);
        }
        result = (nu < 0.0) ? alpha / x : alpha * x;
    }
    if (counter != nullptr) {
        counter->draws += 1;
        counter->proposals += proposals;
    }
    return result;
}

double sample_inverse_gaussian(const InvGaussParams& params, RngStream& rng) {
    const double mu = params.mu;
    const double lambda = params.lambda;
    if (!(mu > 0.0) || !(lambda > 0.0) || !std::isfinite(mu) || !std::isfinite(lambda)) {
        throw std::domain_error("inverse Gaussian requires finite positive mean and shape");
    }
    const double nu = rng.normal();
    const double y = nu * nu;
    const double my = mu * y;
    const double x = mu - 2.0 * mu * my / (my + std::sqrt(4.0 * mu * lambda * y + my * my));
    if (rng.uniform() <= mu / (mu + x)) return x;
    return mu * mu / x;
}

double slice_halfcauchy(double current, double mu, double shape, RngStream& rng) {
    if (!(current > 0.0)) throw std::domain_error("slice state must be positive");
    const double u = rng.uniform() / (1.0 + current);
    const double bound = (1.0 - u) / u;
    const double mb = mu * bound;
    double eta;
    if (!(mu > 0.0) || mb < 1e-8) {
        eta = bound * std::pow(rng.uniform(), 1.0 / shape);
    } else {
        const double upper = boost::math::gamma_p(shape, mb);
        const double target = rng.uniform() * upper;
        if (target <= 0.0) {
            eta = bound * std::pow(rng.uniform(), 1.0 / shape);
        } else {
            eta = boost::math::gamma_p_inv(shape, target) / mu;
        }
    }
    const double tiny = std::numeric_limits<double>::min();
    return std::min(std::max(eta, tiny), bound);
}

} // namespace shrinkage
