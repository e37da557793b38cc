#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "shrinkage/errors.hpp"
#include "shrinkage/kernels.hpp"
#include "shrinkage/quantile.hpp"
#include "support.hpp"

using namespace shrinkage;
using shrinkage::testing::data_path;
using shrinkage::testing::ks_critical_01;
using shrinkage::testing::ks_statistic;

namespace {

SamplerPlan quantile_plan(int iterations, int burn_in, std::uint64_t seed) {
    SamplerPlan plan;
    plan.iterations = iterations;
    plan.burn_in = burn_in;
    plan.chains = 1;
    plan.seed = seed;
    return plan;
}

// y = 1 + 2x + symmetric noise (Student-t with 5 dof) when hetero is false,
// otherwise y = 1 + 2x + (1 + x) e with e standard normal.
Dataset linear_fixture(int n, bool hetero, std::uint64_t seed) {
    RngStream rng(seed, 0);
    Eigen::MatrixXd X(n, 1);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        const double x = 2.0 * rng.uniform();
        double e;
        if (hetero) {
            e = (1.0 + x) * rng.normal();
        } else {
            e = rng.normal() / std::sqrt(rng.gamma(2.5, 2.5));
        }
        X(i, 0) = x;
        y(i) = 1.0 + 2.0 * x + e;
    }
    return make_dataset(X, y, {"x"});
}

double column_mean(const DrawStore& d, int j) { return d.beta.col(j).mean(); }

double column_sd(const DrawStore& d, int j) {
    const Eigen::VectorXd c = d.beta.col(j).array() - d.beta.col(j).mean();
    return std::sqrt(c.squaredNorm() / static_cast<double>(c.size() - 1));
}

} // namespace

TEST_CASE("asymmetric Laplace constants") {
    AlConstants half = al_constants(0.5);
    CHECK(half.theta == 0.0);
    CHECK(half.kappa2 == 8.0);
    AlConstants quarter = al_constants(0.25);
    CHECK(quarter.theta == 8.0 / 3.0);
    CHECK(quarter.kappa2 == 32.0 / 3.0);
    AlConstants lo = al_constants(0.1), hi = al_constants(0.9);
    CHECK(lo.theta == doctest::Approx(-hi.theta).epsilon(1e-14));
    CHECK(lo.kappa2 == doctest::Approx(hi.kappa2).epsilon(1e-14));
    for (double r : {0.05, 0.10, 0.25, 0.5, 0.75, 0.90, 0.95}) {
        AlConstants c = al_constants(r);
        CHECK(c.theta * r * (1.0 - r) == doctest::Approx(1.0 - 2.0 * r).epsilon(1e-15));
        CHECK(c.kappa2 * r * (1.0 - r) == doctest::Approx(2.0).epsilon(1e-15));
    }
    CHECK_THROWS_AS(al_constants(0.0), std::domain_error);
    CHECK_THROWS_AS(al_constants(1.0), std::domain_error);
}

TEST_CASE("normal-exponential mixture integrates to the asymmetric Laplace density") {
    for (double r : {0.1, 0.25, 0.5, 0.9}) {
        for (int k = 0; k < 20; ++k) {
            const double eps = -4.75 + 0.5 * k;
            CAPTURE(r);
            CAPTURE(eps);
            CHECK(std::abs(al_mixture_density(eps, r, 1.3) - al_density(eps, r, 1.3)) < 1e-6);
        }
    }
}

TEST_CASE("median level gives a weighted least-squares beta conditional") {
    Dataset d = linear_fixture(30, false, 1);
    QuantileSpec spec;
    QuantileLatents s = quantile_initial_state(d.n(), d.p(), 0.5);
    s.sigma2 = 0.7;
    RngStream rng(2, 0);
    for (int i = 0; i < d.n(); ++i) s.z(i) = 0.5 + rng.uniform();
    PrecisionSystem sys = quantile_beta_system(s, d.X, d.y, spec);
    const Eigen::VectorXd w = (8.0 * 0.7 * s.z.array()).inverse().matrix();
    CHECK((sys.gram - d.X.transpose() * w.asDiagonal() * d.X).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((sys.rhs - d.X.transpose() * w.asDiagonal() * d.y).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(sys.prior_precision_diag(0) == 1.0 / spec.prior_tau);
}

TEST_CASE("inverse-Gaussian z update agrees with the GIG form") {
    const AlConstants c = al_constants(0.25);
    const double sigma2 = 0.8, e = 0.6;
    const double q = c.theta * c.theta + 2.0 * c.kappa2;
    RngStream rng(3, 0);
    std::vector<double> via_ig, via_gig;
    for (int i = 0; i < 20000; ++i) {
        via_ig.push_back(1.0 / sample_inverse_gaussian({std::sqrt(q) / e, q / (sigma2 * c.kappa2)}, rng));
        via_gig.push_back(sample_gig({0.5, q / (sigma2 * c.kappa2), e * e / (sigma2 * c.kappa2)}, rng));
    }
    CHECK(ks_statistic(via_ig, via_gig) < ks_critical_01(via_ig.size(), via_gig.size()));
}

TEST_CASE("median regression matches check-loss minimisation") {
    Dataset d = load_csv(data_path("quantile_n200.csv"), "y", false, false);
    QuantileSpec spec;
    spec.levels = {0.5};
    QuantileGridResult res = run_quantile_grid(d, spec, quantile_plan(6000, 1000, 4));
    REQUIRE(res.failures.empty());
    const DrawStore& med = res.draws.at(0.5);
    CHECK(res.column_names.front() == "(intercept)");
    CHECK(std::abs(column_mean(med, 1) - 0.9619423791325464) < 0.1);
    CHECK(res.crossing_rate == 0.0);
}

TEST_CASE("quantile grid on symmetric and location-shift designs") {
    Dataset sym = linear_fixture(300, false, 5);
    QuantileSpec spec;
    spec.levels = {0.1, 0.25, 0.5, 0.75, 0.9};
    SamplerPlan plan = quantile_plan(4000, 1000, 6);
    QuantileGridResult res = run_quantile_grid(sym, spec, plan);
    REQUIRE(res.draws.size() == 5);
    const double median_slope = column_mean(res.draws.at(0.5), 1);
    for (auto [lo, hi] : {std::pair{0.1, 0.9}, std::pair{0.25, 0.75}}) {
        const double mid = 0.5 * (column_mean(res.draws.at(lo), 1) + column_mean(res.draws.at(hi), 1));
        const double sd = column_sd(res.draws.at(lo), 1) + column_sd(res.draws.at(hi), 1);
        CAPTURE(lo);
        CHECK(std::abs(mid - median_slope) < sd);
    }
    double previous = -INFINITY;
    for (double r : spec.levels) {
        const double intercept = column_mean(res.draws.at(r), 0);
        CHECK(intercept > previous);
        previous = intercept;
    }
    CHECK(res.crossing_rate >= 0.0);
    CHECK(res.crossing_rate <= 1.0);

    // Same level and stream alone gives the same chain: no cross-level state.
    QuantileSpec single = spec;
    single.levels = {0.5};
    QuantileGridResult alone = run_quantile_grid(sym, single, plan);
    QuantileSpec first = spec;
    first.levels = {0.5, 0.9};
    QuantileGridResult pair = run_quantile_grid(sym, first, plan);
    CHECK(alone.draws.at(0.5).beta == pair.draws.at(0.5).beta);
}

TEST_CASE("heteroskedastic slopes increase with the level") {
    Dataset d = linear_fixture(400, true, 7);
    QuantileSpec spec;
    spec.levels = {0.1, 0.5, 0.9};
    QuantileGridResult res = run_quantile_grid(d, spec, quantile_plan(4000, 1000, 8));
    CHECK(column_mean(res.draws.at(0.1), 1) < column_mean(res.draws.at(0.5), 1));
    CHECK(column_mean(res.draws.at(0.5), 1) < column_mean(res.draws.at(0.9), 1));
}

TEST_CASE("level failures are isolated") {
    Dataset d = linear_fixture(50, false, 9);
    QuantileSpec spec;
    spec.levels = {1e-200, 0.5};
    QuantileGridResult res = run_quantile_grid(d, spec, quantile_plan(200, 50, 10));
    CHECK(res.failures.count(1e-200) == 1);
    CHECK(res.draws.count(0.5) == 1);
    CHECK(res.failures.at(1e-200).find("non-finite") != std::string::npos);
}

TEST_CASE("quantile spec validation") {
    QuantileSpec spec;
    spec.validate();
    spec.levels = {0.5, 0.25};
    CHECK_THROWS_AS(spec.validate(), config_error);
    spec.levels = {0.0, 0.5};
    CHECK_THROWS_AS(spec.validate(), config_error);
    spec.levels = {0.5};
    spec.prior_tau = 0.0;
    CHECK_THROWS_AS(spec.validate(), config_error);
}
