// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/distributions/inverse_gaussian.hpp>

#include "nested.hpp"
#include "shrinkage/errors.hpp"
#include "shrinkage/evidence.hpp"
#include "shrinkage/geweke.hpp"
#include "shrinkage/gibbs.hpp"
#include "shrinkage/kernels.hpp"
#include "shrinkage/quantile.hpp"
#include "shrinkage/simulation.hpp"
#include "shrinkage/vb.hpp"
#include "support.hpp"

using namespace shrinkage;
namespace t = shrinkage::testing;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [miss: " << what << "]";
        }
    }
};

std::string fixed(double v, int digits = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

int worker_threads() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

const StudyRow& row_for(const StudyTable& table, const std::string& method) {
    for (const auto& r : table.rows) {
        if (r.method == method) return r;
    }
    throw config_error("no study row for " + method);
}

StudyTable study(StudyId id, int p, int reps) {
    StudyOptions opt;
    opt.cells = {{p, 0.8}};
    opt.base.p = p;
    opt.base.replications = reps;
    opt.threads = worker_threads();
    return run_study(id, opt, desk_plan());
}

// SSVS study, R^2 = 0.8, p = 50, 20 replications, 4000 iterations.
void criterion_ssvs_table(Outcome& out) {
    const StudyTable table = study(StudyId::ssvs_lasso_table, 50, 20);
    const char* methods[] = {"SSVS-Lasso-1", "SSVS-Lasso-2", "SSVS-Lasso-3", "Narisetty-He", "Kuo-Mallick"};
    const double tp_ref[] = {5.4, 5.3, 5.4, 5.6, 5.5};
    const double mse_ref[] = {0.02, 0.03, 0.01, 0.01, 0.02};
    for (int k = 0; k < 5; ++k) {
        const StudyRow& r = row_for(table, methods[k]);
        out.detail << " " << methods[k] << " tp=" << fixed(r.mean.tp, 2) << " fp=" << fixed(r.mean.fp, 2)
                   << " mse=" << fixed(r.mean.mse, 4) << ";";
        out.require(r.replications_ok == 20, std::string(methods[k]) + " replications");
        out.require(std::abs(r.mean.tp - tp_ref[k]) <= 0.5, std::string(methods[k]) + " tp");
        out.require(r.mean.fp <= 0.3, std::string(methods[k]) + " fp");
        out.require(std::abs(r.mean.mse - mse_ref[k]) <= 0.03, std::string(methods[k]) + " mse");
    }
}

// Conjugate versus independent scaling, R^2 = 0.8, p = 50, 20 replications.
void criterion_conj_vs_ind(Outcome& out) {
    const StudyTable table = study(StudyId::conj_vs_ind_table, 50, 20);
    const char* names[] = {"Student-t", "Bayesian Lasso", "Horseshoe"};
    const double tp_conj[] = {5.9, 5.9, 5.9};
    const double tp_ind[] = {5.9, 6.0, 5.9};
    for (int k = 0; k < 3; ++k) {
        const std::string name = names[k];
        const StudyRow& c = row_for(table, name + " (conjugate)");
        const StudyRow& i = row_for(table, name + " (independent)");
        const double gap = i.mean.sigma2_hat - c.mean.sigma2_hat;
        out.detail << " " << name << " s2 " << fixed(c.mean.sigma2_hat, 2) << "/" << fixed(i.mean.sigma2_hat, 2)
                   << " gap=" << fixed(gap, 2) << " tp " << fixed(c.mean.tp, 2) << "/" << fixed(i.mean.tp, 2) << ";";
        out.require(c.replications_ok == 20 && i.replications_ok == 20, name + " replications");
        out.require(gap >= 0.4, name + " sigma2 gap");
        out.require(std::abs(c.mean.tp - tp_conj[k]) <= 0.4, name + " conjugate tp");
        out.require(std::abs(i.mean.tp - tp_ind[k]) <= 0.4, name + " independent tp");
    }
}

// Conjugate versus independent scaling at p = 300, 10 replications.
void criterion_high_dimension(Outcome& out) {
    const StudyTable table = study(StudyId::conj_vs_ind_table, 300, 10);
    for (const std::string name : {"Student-t", "Bayesian Lasso", "Horseshoe"}) {
        const StudyRow& c = row_for(table, name + " (conjugate)");
        const StudyRow& i = row_for(table, name + " (independent)");
        out.detail << " " << name << " fp " << fixed(c.mean.fp, 2) << "/" << fixed(i.mean.fp, 2);
        if (c.replications_ok < 10 || i.replications_ok < 10) {
            out.detail << " (ok " << c.replications_ok << "/" << i.replications_ok << ")";
        }
        out.detail << ";";
        out.require(c.replications_ok > 0 && i.replications_ok > 0, name + " replications");
        out.require(i.mean.fp > c.mean.fp, name + " fp ordering");
    }
}

// Joint-distribution test for every proper family, and a deliberately wrong conditional.
void criterion_geweke(Outcome& out) {
    struct Case {
        Family family;
        Scaling scaling;
        BlockMode mode;
    };
    std::vector<Case> cases;
    for (const auto& name : family_names()) {
        const Family f = *parse_family(name);
        if (f == Family::jeffreys) continue;
        cases.push_back({f, default_scaling(f), BlockMode::three_block});
    }
    cases.push_back({Family::student_t, Scaling::independent, BlockMode::three_block});
    cases.push_back({Family::student_t, Scaling::conjugate, BlockMode::three_block});
    cases.push_back({Family::lasso_pc, Scaling::conjugate, BlockMode::scalable});
    cases.push_back({Family::ssvs_fixed, Scaling::conjugate, BlockMode::skinny});

    double worst = 0.0;
    std::string worst_name;
    for (const Case& c : cases) {
        PriorSpec spec = geweke_spec(c.family);
        spec.scaling = c.scaling;
        GewekeOptions opt;
        opt.block_mode = c.mode;
        const GewekeReport r = geweke_joint_test(spec, opt);
        if (r.max_abs_z > worst) {
            worst = r.max_abs_z;
            worst_name = family_name(c.family);
        }
        out.require(r.max_abs_z < 4.0, family_name(c.family) + " |z| " + fixed(r.max_abs_z, 2));
    }

    PriorSpec spec = geweke_spec(Family::student_t);
    GewekeOptions broken;
    broken.scale_update_override = [](ScaleState& st, const Eigen::VectorXd& beta, double sigma2,
                                      const PriorSpec& sp, RngStream& rng) {
        for (Eigen::Index j = 0; j < beta.size(); ++j) {
            const double rate = sp.xi + beta(j) * beta(j) / (2.0 * sigma2);
            st.local_tau2(j) = 1.0 / rng.gamma(sp.rho + 0.5 + 0.5, rate);
        }
    };
    const GewekeReport bad = geweke_joint_test(spec, broken);
    out.detail << " " << cases.size() << " samplers, max |z| " << fixed(worst, 2) << " (" << worst_name
               << "); fault injection max |z| " << fixed(bad.max_abs_z, 2);
    out.require(bad.max_abs_z >= 4.0, "fault injection not detected");
}

// Direct, Rue and Bhattacharya samplers on random systems, and GIG(-1/2) against the inverse Gaussian law.
void criterion_kernels(Outcome& out) {
    const int shapes[10][2] = {{20, 3}, {50, 5}, {5, 8}, {10, 4}, {3, 6}, {30, 2}, {8, 8}, {15, 10}, {4, 12}, {100, 6}};
    const int draws = 20000;
    double worst = 0.0;
    for (int s = 0; s < 10; ++s) {
        const int n = shapes[s][0], p = shapes[s][1];
        RngStream data(500, static_cast<std::uint64_t>(s));
        Eigen::MatrixXd X(n, p);
        for (Eigen::Index i = 0; i < X.size(); ++i) X(i) = data.normal();
        Eigen::VectorXd y(n), D(p);
        for (int i = 0; i < n; ++i) y(i) = data.normal();
        for (int j = 0; j < p; ++j) D(j) = 0.2 + 2.0 * data.uniform();
        PrecisionSystem sys;
        sys.gram = X.transpose() * X;
        sys.prior_precision_diag = D.cwiseInverse();
        sys.rhs = X.transpose() * y;
        const Eigen::MatrixXd V = sys.precision().inverse();
        const Eigen::VectorXd mean = V * sys.rhs;

        Eigen::MatrixXd a(draws, p), b(draws, p), c(draws, p);
        RngStream r1(501, static_cast<std::uint64_t>(s)), r2(502, static_cast<std::uint64_t>(s)),
            r3(503, static_cast<std::uint64_t>(s));
        for (int i = 0; i < draws; ++i) {
            a.row(i) = sample_mvn_direct(sys, r1).transpose();
            b.row(i) = sample_mvn_rue(sys, r2).transpose();
            c.row(i) = sample_mvn_bhattacharya(X, D, y, r3).transpose();
        }
        const t::Moments ma = t::moments(a), mb = t::moments(b), mc = t::moments(c);
        const double z = std::max({t::max_mean_z(ma, mb, draws), t::max_mean_z(ma, mc, draws),
                                   t::max_cov_z(ma, mb, draws), t::max_cov_z(ma, mc, draws),
                                   t::max_mean_z_exact(a, mean, V), t::max_mean_z_exact(b, mean, V),
                                   t::max_mean_z_exact(c, mean, V), t::max_cov_z_exact(a, V),
                                   t::max_cov_z_exact(b, V), t::max_cov_z_exact(c, V)});
        worst = std::max(worst, z);
        out.require(z < 4.0, "system n=" + std::to_string(n) + " p=" + std::to_string(p) + " z " + fixed(z, 2));
    }
    out.detail << " 10 systems, max moment z " << fixed(worst, 2) << ";";

    // GIG(-1/2, a, b) is inverse Gaussian with mean sqrt(b/a) and shape b.
    const double params[3][2] = {{1.0, 1.0}, {0.5, 2.0}, {4.0, 0.3}};
    const int m = 20000;
    for (const auto& ab : params) {
        RngStream rng(504, static_cast<std::uint64_t>(ab[0] * 100 + ab[1] * 10));
        std::vector<double> x(m);
        for (double& v : x) v = sample_gig({-0.5, ab[0], ab[1]}, rng);
        std::sort(x.begin(), x.end());
        const boost::math::inverse_gaussian_distribution<double> ig(std::sqrt(ab[1] / ab[0]), ab[1]);
        double d = 0.0;
        for (int i = 0; i < m; ++i) {
            const double f = boost::math::cdf(ig, x[static_cast<std::size_t>(i)]);
            d = std::max({d, f - static_cast<double>(i) / m, static_cast<double>(i + 1) / m - f});
        }
        // Asymptotic one-sample critical value at alpha = 0.01.
        const double crit = 1.6276 / std::sqrt(static_cast<double>(m));
        out.detail << " KS(a=" << ab[0] << ",b=" << ab[1] << ")=" << fixed(d, 4) << "/" << fixed(crit, 4);
        out.require(d < crit, "GIG KS");
    }
}

struct EvidenceFixture {
    Dataset data;
    ConjugateModel model;
    double log_evidence;
};

// Log evidence frozen from two-dimensional quadrature (tests/oracles).
std::vector<EvidenceFixture> evidence_fixtures() {
    std::vector<EvidenceFixture> out;
    Eigen::VectorXd y(3);
    y << 1.0, 0.0, -1.0;
    out.push_back({make_dataset(Eigen::MatrixXd::Ones(3, 1), y), ConjugateModel::ridge(1, 1.0, 1.0, 1.0),
                   -5.179841614474345});
    auto load = [](const std::string& name) { return load_csv(t::data_path(name), "y", false, false); };
    out.push_back({load("evidence_f2.csv"), ConjugateModel::ridge(1, 2.0, 3.0, 2.0), -28.721304157432982});
    out.push_back({load("evidence_f3.csv"), ConjugateModel::ridge(1, 10.0, 1.0, 0.5), -97.38506896500984});
    ConjugateModel m4;
    m4.D = Eigen::Vector2d(1.0, 4.0).asDiagonal();
    m4.v0 = 2.0;
    m4.s0 = 1.0;
    out.push_back({load("evidence_f4.csv"), m4, -28.63965237411426});
    ConjugateModel m5;
    m5.D.resize(2, 2);
    m5.D << 2.0, 0.5, 0.5, 1.0;
    m5.v0 = 4.0;
    m5.s0 = 3.0;
    out.push_back({load("evidence_f5.csv"), m5, -50.16286506443653});
    return out;
}

void criterion_evidence(Outcome& out) {
    const auto fixtures = evidence_fixtures();
    const double stars[] = {0.0, 0.3, -0.2, 0.5, 0.0};
    double ml_err = 0.0, sddr_err = 0.0;
    for (std::size_t k = 0; k < fixtures.size(); ++k) {
        const auto& f = fixtures[k];
        ml_err = std::max(ml_err, std::abs(log_marginal_conjugate(f.model, f.data) - f.log_evidence));
        for (int j = 0; j < f.data.p(); ++j) {
            auto [m2, d2] = t::restricted_model(f.model, f.data, j, stars[k]);
            const double ratio = log_marginal_conjugate(m2, d2) - log_marginal_conjugate(f.model, f.data);
            sddr_err = std::max(sddr_err, std::abs(log_sddr(f.model, f.data, j, stars[k]) - ratio));
        }
    }
    out.require(ml_err < 1e-4, "log marginal vs quadrature");
    out.require(sddr_err < 1e-3, "Savage-Dickey vs marginal ratio");

    Eigen::VectorXd beta(6);
    beta << 1.0, 0.0, -0.5, 0.0, 0.3, 0.0;
    const Dataset d = t::simulate_linear(60, beta, 1.0, 71);
    double sum_err = 0.0, shrink_err = 0.0;
    for (GRule rule : {GRule::ratio, GRule::fixed}) {
        BmaOptions opt;
        opt.rule = rule;
        opt.g = 0.3;
        const BmaResult r = bma_enumerate_gprior(d, opt);
        double total = 0.0;
        for (const auto& m : r.models) {
            total += m.probability;
            if (m.columns.empty()) continue;
            const auto k = static_cast<Eigen::Index>(m.columns.size());
            Eigen::MatrixXd Xr(d.n(), k);
            for (Eigen::Index c = 0; c < k; ++c) Xr.col(c) = d.X.col(m.columns[static_cast<std::size_t>(c)]);
            Xr.rowwise() -= Xr.colwise().mean();
            const Eigen::VectorXd yc = d.y.array() - d.y.mean();
            const Eigen::VectorXd ols = Xr.colPivHouseholderQr().solve(yc);
            shrink_err = std::max(shrink_err, (m.coef - ols / (1.0 + m.g)).cwiseAbs().maxCoeff() /
                                                  (1.0 + ols.cwiseAbs().maxCoeff()));
        }
        sum_err = std::max(sum_err, std::abs(total - 1.0));
    }
    out.require(sum_err < 1e-10, "BMA probabilities sum");
    out.require(shrink_err < 1e-12, "shrinkage identity");
    out.detail << " log p(y) err " << ml_err << "; SDDR err " << sddr_err << "; |sum-1| " << sum_err
               << "; shrinkage identity err " << shrink_err;
}

void criterion_cavi(Outcome& out) {
    int monotone = 0;
    for (int r = 0; r < 20; ++r) {
        const int n = 20 + 7 * r;
        const int p = 2 + (r % 7) * 3;
        RngStream rng(100 + r, 1);
        Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
        for (int j = 0; j < p; j += 3) beta(j) = (rng.uniform() < 0.5 ? -1.0 : 1.0) * (0.5 + 2.0 * rng.uniform());
        Dataset d = t::simulate_linear(n, beta, 1.0, static_cast<std::uint64_t>(100 + r));
        preprocess(d, true, true);
        const VBState s = run_cavi(d, VbHyper::defaults(p), 1e-10, 500);
        bool ok = s.elbo_trace.size() >= 2;
        for (std::size_t k = 1; k < s.elbo_trace.size(); ++k) ok = ok && s.elbo_trace[k] >= s.elbo_trace[k - 1] - 1e-8;
        monotone += ok ? 1 : 0;
    }
    out.require(monotone == 20, "ELBO monotone");

    // Exact log p(y) of the p = 1 model by enumeration and quadrature (tests/oracles).
    const double log_py = -63.585443189452505;
    const Dataset p1 = load_csv(t::data_path("vb_p1.csv"), "y", false, false);
    const VBState s1 = run_cavi(p1, VbHyper::defaults(1));
    out.require(s1.elbo_trace.back() <= log_py, "ELBO bound");

    SimConfig cfg;
    int selected = 0;
    for (int rep = 0; rep < 20; ++rep) {
        RngStream rng(cfg.seed, static_cast<std::uint64_t>(rep));
        const SimData sim = generate_dgp(cfg, rng);
        const VBState s = run_cavi(sim.data, VbHyper::defaults(cfg.p));
        selected += (s.pi.head(6).array() > 0.5).all() ? 1 : 0;
    }
    out.require(selected >= 18, "signal inclusion");
    out.detail << " monotone " << monotone << "/20; final ELBO " << fixed(s1.elbo_trace.back(), 4) << " <= log p(y) "
               << fixed(log_py, 4) << "; all signals pi>0.5 in " << selected << "/20";
}

void criterion_quantile(Outcome& out) {
    double mix_err = 0.0;
    for (int k = 0; k < 20; ++k) {
        const double eps = -4.75 + 0.5 * k;
        for (double r : {0.1, 0.25, 0.5, 0.9}) {
            mix_err = std::max(mix_err, std::abs(al_mixture_density(eps, r, 1.3) - al_density(eps, r, 1.3)));
        }
    }
    out.require(mix_err < 1e-6, "mixture identity");

    bool exact = al_constants(0.5).theta == 0.0 && al_constants(0.5).kappa2 == 8.0 &&
                 al_constants(0.25).theta == 8.0 / 3.0 && al_constants(0.25).kappa2 == 32.0 / 3.0 &&
                 al_constants(0.75).theta == -8.0 / 3.0 && al_constants(0.75).kappa2 == 32.0 / 3.0;
    for (double r : QuantileSpec{}.levels) {
        const AlConstants c = al_constants(r);
        const double v = r * (1.0 - r);
        exact = exact && c.theta == (1.0 - 2.0 * r) / v && c.kappa2 == 2.0 / v;
    }
    // Levels whose complement is representable exactly.
    for (double r : {0.0625, 0.125, 0.25, 0.375}) {
        const AlConstants c = al_constants(r), m = al_constants(1.0 - r);
        exact = exact && c.theta == -m.theta && c.kappa2 == m.kappa2;
    }
    out.require(exact, "al_constants");

    // Slope of the check-loss minimiser on the same data (tests/oracles).
    const double oracle = 0.9619423791325464;
    const Dataset d = load_csv(t::data_path("quantile_n200.csv"), "y", false, false);
    QuantileSpec spec;
    spec.levels = {0.5};
    SamplerPlan plan;
    plan.iterations = 6000;
    plan.burn_in = 1000;
    plan.chains = 1;
    plan.seed = 4;
    const QuantileGridResult res = run_quantile_grid(d, spec, plan);
    const double slope = res.failures.empty() ? res.draws.at(0.5).beta.col(1).mean() : NAN;
    out.require(std::abs(slope - oracle) < 0.1, "median slope");
    out.detail << " mixture err " << mix_err << "; al_constants " << (exact ? "exact" : "inexact")
               << "; median slope " << fixed(slope, 4) << " vs " << fixed(oracle, 4);
}

void criterion_skinny(Outcome& out) {
    const Dataset d = t::orthogonal_fixture(100, 20, 23);
    SamplerPlan full;
    full.prior.family = Family::ssvs_fixed;
    full.prior.scaling = default_scaling(Family::ssvs_fixed);
    full.prior.tau0_sq = 1e-4;
    full.iterations = 101000;
    full.burn_in = 1000;
    full.chains = 1;
    full.seed = 24;
    SamplerPlan skinny = full;
    skinny.block_mode = BlockMode::skinny;
    const Eigen::VectorXd a = inclusion_probabilities(run_chains(full, d));
    const Eigen::VectorXd b = inclusion_probabilities(run_chains(skinny, d));
    const double diff = (a - b).cwiseAbs().maxCoeff();
    out.require(diff < 0.05, "PIP difference");
    out.detail << " max |PIP full - PIP skinny| " << fixed(diff, 4);
}

} // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<void(Outcome&)> run;
    };
    const std::vector<Criterion> criteria{
        {"1 ssvs study table (p=50)", criterion_ssvs_table},
        {"2 conjugate vs independent (p=50)", criterion_conj_vs_ind},
        {"3 high-dimension FP ordering (p=300)", criterion_high_dimension},
        {"4 joint-distribution sampler tests", criterion_geweke},
        {"5 kernel equivalence", criterion_kernels},
        {"6 evidence oracles", criterion_evidence},
        {"7 variational suite", criterion_cavi},
        {"8 quantile suite", criterion_quantile},
        {"9 skinny vs full SSVS", criterion_skinny},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Outcome out;
        const auto start = std::chrono::steady_clock::now();
        try {
            c.run(out);
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail << " [error: " << e.what() << "]";
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s criterion %s:%s (%.1fs)\n", out.pass ? "PASS" : "FAIL", c.name, out.detail.str().c_str(), secs);
        std::fflush(stdout);
        failed += out.pass ? 0 : 1;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
