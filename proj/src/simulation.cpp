#include "shrinkage/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "shrinkage/errors.hpp"

namespace shrinkage {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::uint64_t chain_seed(std::uint64_t seed, std::size_t cell, std::size_t method, int rep) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ static_cast<std::uint64_t>(cell));
    h = splitmix64(h ^ static_cast<std::uint64_t>(method));
    return splitmix64(h ^ static_cast<std::uint64_t>(rep));
}

PriorSpec base_prior(Family f) {
    PriorSpec s;
    s.family = f;
    s.scaling = default_scaling(f);
    s.sigma_a0 = 0.1;
    s.sigma_b0 = 0.1;
    return s;
}

} // namespace

void SimConfig::validate() const {
    if (n < 2) throw config_error("simulation n must be at least 2");
    if (p < 1) throw config_error("simulation p must be positive");
    if (!(r2_pop > 0.0 && r2_pop < 1.0)) throw config_error("r2_pop must lie in (0, 1)");
    if (!(sigma2_true > 0.0)) throw config_error("sigma2_true must be positive");
    if (beta_template.empty() || static_cast<int>(beta_template.size()) > p) {
        throw config_error("beta template length must be between 1 and p");
    }
    if (replications < 1) throw config_error("replications must be positive");
}

double signal_scale(const SimConfig& config) {
    double norm2 = 0.0;
    for (double b : config.beta_template) norm2 += b * b;
    return std::sqrt(config.sigma2_true * config.r2_pop / ((1.0 - config.r2_pop) * norm2));
}

SimData generate_dgp(const SimConfig& config, RngStream& rng) {
    config.validate();
    SimData out;
    out.c = signal_scale(config);
    out.beta = Eigen::VectorXd::Zero(config.p);
    for (std::size_t j = 0; j < config.beta_template.size(); ++j) {
        out.beta(static_cast<Eigen::Index>(j)) = out.c * config.beta_template[j];
    }
    Eigen::MatrixXd X(config.n, config.p);
    for (Eigen::Index i = 0; i < X.size(); ++i) X(i) = rng.normal();
    Eigen::VectorXd y = X * out.beta;
    const double sigma = std::sqrt(config.sigma2_true);
    for (int i = 0; i < config.n; ++i) y(i) += sigma * rng.normal();
    std::vector<std::string> names;
    for (int j = 0; j < config.p; ++j) names.push_back("x" + std::to_string(j + 1));
    out.data = make_dataset(std::move(X), std::move(y), std::move(names));
    preprocess(out.data, true, true);
    return out;
}

Eigen::VectorXi classify_signals(const Eigen::VectorXd& posterior_means) {
    const Eigen::Index p = posterior_means.size();
    Eigen::VectorXi labels = Eigen::VectorXi::Zero(p);
    if (p < 2) return labels;
    std::vector<std::pair<double, Eigen::Index>> a;
    for (Eigen::Index j = 0; j < p; ++j) a.emplace_back(std::abs(posterior_means(j)), j);
    std::sort(a.begin(), a.end());

    // Exact 1-D 2-means: best split of the sorted magnitudes.
    std::vector<double> s(p + 1, 0.0), s2(p + 1, 0.0);
    for (Eigen::Index k = 0; k < p; ++k) {
        s[k + 1] = s[k] + a[k].first;
        s2[k + 1] = s2[k] + a[k].first * a[k].first;
    }
    auto sse = [&](Eigen::Index lo, Eigen::Index hi) {
        const double m = static_cast<double>(hi - lo);
        const double sum = s[hi] - s[lo];
        return (s2[hi] - s2[lo]) - sum * sum / m;
    };
    Eigen::Index best_k = 0;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 1; k < p; ++k) {
        const double v = sse(0, k) + sse(k, p);
        if (best_k == 0 || v < best - 1e-15 * (1.0 + std::abs(best))) {
            best = v;
            best_k = k;
        }
    }
    const double low = s[best_k] / static_cast<double>(best_k);
    const double high = (s[p] - s[best_k]) / static_cast<double>(p - best_k);
    if (!(high > 0.0)) return labels;
    if (low > 0.0 && high / low < 1.5) return labels;
    for (Eigen::Index k = best_k; k < p; ++k) labels(a[k].second) = 1;
    return labels;
}

Eigen::VectorXi classify_credible(const Eigen::MatrixXd& draws, double level) {
    if (!(level > 0.0 && level < 1.0)) throw config_error("credible level must lie in (0, 1)");
    Eigen::VectorXi labels = Eigen::VectorXi::Zero(draws.cols());
    if (draws.rows() == 0) return labels;
    const double lo_q = 0.5 * (1.0 - level), hi_q = 1.0 - lo_q;
    for (Eigen::Index j = 0; j < draws.cols(); ++j) {
        std::vector<double> v(draws.col(j).data(), draws.col(j).data() + draws.rows());
        std::sort(v.begin(), v.end());
        auto q = [&](double t) {
            const double pos = t * static_cast<double>(v.size() - 1);
            const std::size_t i = static_cast<std::size_t>(std::floor(pos));
            const double f = pos - static_cast<double>(i);
            return i + 1 < v.size() ? v[i] * (1.0 - f) + v[i + 1] * f : v[i];
        };
        if (q(lo_q) > 0.0 || q(hi_q) < 0.0) labels(j) = 1;
    }
    return labels;
}

Metrics compute_metrics(const Eigen::VectorXd& true_beta, const Eigen::VectorXd& estimates,
                        const Eigen::VectorXi& selections, double sigma2_hat) {
    if (estimates.size() != true_beta.size() || selections.size() != true_beta.size()) {
        throw config_error("metric inputs have different lengths");
    }
    Metrics m;
    m.sigma2_hat = sigma2_hat;
    int signals = 0;
    for (Eigen::Index j = 0; j < true_beta.size(); ++j) {
        const bool is_signal = true_beta(j) != 0.0;
        const bool selected = selections(j) != 0;
        if (is_signal) {
            ++signals;
            const double err = estimates(j) - true_beta(j);
            m.bias += std::abs(err);
            m.mse += err * err;
            if (selected) {
                m.tp += 1.0;
            } else {
                m.fn += 1.0;
            }
        } else if (selected) {
            m.fp += 1.0;
        }
    }
    if (signals > 0) {
        m.bias /= signals;
        m.mse /= signals;
    }
    return m;
}

std::optional<StudyId> parse_study(const std::string& name) {
    if (name == "ssvs_lasso_table") return StudyId::ssvs_lasso_table;
    if (name == "conj_vs_ind_table") return StudyId::conj_vs_ind_table;
    return std::nullopt;
}

std::string study_name(StudyId id) {
    return id == StudyId::ssvs_lasso_table ? "ssvs_lasso_table" : "conj_vs_ind_table";
}

std::vector<StudyMethod> study_methods(StudyId id) {
    std::vector<StudyMethod> out;
    if (id == StudyId::ssvs_lasso_table) {
        PriorSpec l1 = base_prior(Family::ssvs_lasso1);
        l1.r1 = 1.0;
        l1.delta1 = 1.0;
        l1.c1 = 1e-4;
        PriorSpec l2 = base_prior(Family::ssvs_lasso2);
        l2.r1 = 1.0;
        l2.delta1 = 1.0;
        l2.c2 = 1e-4;
        PriorSpec l3 = base_prior(Family::ssvs_lasso3);
        l3.lambda0 = 20.0;
        l3.lambda1 = 1.0;
        for (PriorSpec* s : {&l1, &l2, &l3}) {
            s->beta_c = 1.0;
            s->beta_d = 1.0;
            s->learn_theta = true;
        }
        PriorSpec km = base_prior(Family::kuo_mallick);
        km.km_tau2 = 10.0;
        km.km_inclusion = 0.5;
        out.push_back({"SSVS-Lasso-1", l1});
        out.push_back({"SSVS-Lasso-2", l2});
        out.push_back({"SSVS-Lasso-3", l3});
        out.push_back({"Narisetty-He", base_prior(Family::ssvs_nh)});
        out.push_back({"Kuo-Mallick", km});
    } else {
        const std::pair<const char*, Family> fams[] = {
            {"Student-t", Family::student_t}, {"Bayesian Lasso", Family::lasso_pc}, {"Horseshoe", Family::horseshoe_ms}};
        for (Scaling sc : {Scaling::conjugate, Scaling::independent}) {
            for (const auto& [label, f] : fams) {
                PriorSpec s = base_prior(f);
                s.scaling = sc;
                out.push_back({std::string(label) + (sc == Scaling::conjugate ? " (conjugate)" : " (independent)"), s});
            }
        }
    }
    return out;
}

SamplerPlan desk_plan() {
    SamplerPlan plan;
    plan.iterations = 4000;
    plan.burn_in = 1000;
    plan.chains = 1;
    plan.store_scales = false;
    return plan;
}

SamplerPlan full_plan() {
    SamplerPlan plan = desk_plan();
    plan.iterations = 10000;
    plan.burn_in = 2000;
    return plan;
}

StudyTable run_study(StudyId id, const StudyOptions& options, const SamplerPlan& plan) {
    options.base.validate();
    std::vector<StudyCell> cells = options.cells;
    if (cells.empty()) {
        for (double r2 : {0.8, 0.4})
            for (int p : {50, 100, 300}) cells.push_back({p, r2});
    }
    std::vector<StudyMethod> methods;
    for (const auto& m : study_methods(id)) {
        if (options.methods.empty() ||
            std::find(options.methods.begin(), options.methods.end(), m.label) != options.methods.end()) {
            methods.push_back(m);
        }
    }
    if (methods.empty()) throw config_error("no study method matches the requested labels");
    const int reps = options.base.replications;

    struct Task {
        std::size_t cell, method;
        int rep;
    };
    std::vector<Task> tasks;
    for (std::size_t c = 0; c < cells.size(); ++c)
        for (std::size_t m = 0; m < methods.size(); ++m)
            for (int r = 0; r < reps; ++r) tasks.push_back({c, m, r});

    std::vector<std::optional<Metrics>> results(tasks.size());
    std::vector<std::string> errors(tasks.size());
    std::atomic<std::size_t> next{0};
    std::mutex progress_mutex;
    auto worker = [&] {
        for (std::size_t t = next++; t < tasks.size(); t = next++) {
            const Task& task = tasks[t];
            try {
                SimConfig cfg = options.base;
                cfg.p = cells[task.cell].p;
                cfg.r2_pop = cells[task.cell].r2_pop;
                RngStream data_rng(options.base.seed, static_cast<std::uint64_t>(task.rep));
                SimData sim = generate_dgp(cfg, data_rng);
                SamplerPlan pl = plan;
                pl.prior = methods[task.method].prior;
                pl.threads = 1;
                pl.seed = chain_seed(options.base.seed, task.cell, task.method, task.rep);
                DrawStore draws = run_chains(pl, sim.data);
                const Eigen::VectorXd est = destandardize(sim.data, posterior_mean(draws));
                Eigen::VectorXi sel;
                if (options.classify == ClassifyRule::two_means) {
                    sel = classify_signals(est);
                } else {
                    Eigen::MatrixXd coef = draws.coefficients();
                    for (Eigen::Index i = 0; i < coef.rows(); ++i) {
                        coef.row(i) = destandardize(sim.data, coef.row(i).transpose()).transpose();
                    }
                    sel = classify_credible(coef);
                }
                results[t] = compute_metrics(sim.beta, est, sel, draws.sigma2.mean());
            } catch (const std::exception& e) {
                errors[t] = "replication " + std::to_string(task.rep) + ": " + e.what();
            }
            if (options.progress) {
                std::lock_guard<std::mutex> lock(progress_mutex);
                options.progress(methods[task.method].label + " p=" + std::to_string(cells[task.cell].p) +
                                 " r2=" + std::to_string(cells[task.cell].r2_pop) + " rep " +
                                 std::to_string(task.rep));
            }
        }
    };
    const int nthreads = std::max(1, std::min<int>(options.threads, static_cast<int>(tasks.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    StudyTable table{id, {}};
    std::size_t t = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        for (std::size_t m = 0; m < methods.size(); ++m) {
            StudyRow row;
            row.cell = cells[c];
            row.method = methods[m].label;
            for (int r = 0; r < reps; ++r, ++t) {
                if (results[t]) {
                    const Metrics& x = *results[t];
                    row.mean.sigma2_hat += x.sigma2_hat;
                    row.mean.bias += x.bias;
                    row.mean.mse += x.mse;
                    row.mean.fn += x.fn;
                    row.mean.fp += x.fp;
                    row.mean.tp += x.tp;
                    ++row.replications_ok;
                } else {
                    row.failures.push_back(errors[t]);
                }
            }
            if (row.replications_ok > 0) {
                const double k = row.replications_ok;
                row.mean.sigma2_hat /= k;
                row.mean.bias /= k;
                row.mean.mse /= k;
                row.mean.fn /= k;
                row.mean.fp /= k;
                row.mean.tp /= k;
            }
            table.rows.push_back(std::move(row));
        }
    }
    return table;
}

std::string format_table_text(const StudyTable& table) {
    std::ostringstream os;
    os << std::fixed;
    const bool sigma = table.id == StudyId::conj_vs_ind_table;
    const StudyCell* current = nullptr;
    for (const auto& row : table.rows) {
        if (!current || current->p != row.cell.p || current->r2_pop != row.cell.r2_pop) {
            current = &row.cell;
            os << "\nR2_pop = " << std::setprecision(1) << row.cell.r2_pop << ", p = " << row.cell.p << "\n";
            os << std::left << std::setw(30) << "method" << std::right;
            if (sigma) os << std::setw(9) << "sigma2";
            os << std::setw(8) << "bias" << std::setw(8) << "mse" << std::setw(8) << "FN" << std::setw(8) << "FP"
               << std::setw(8) << "TP" << std::setw(7) << "reps" << "\n";
        }
        os << std::left << std::setw(30) << row.method << std::right << std::setprecision(2);
        if (sigma) os << std::setw(9) << row.mean.sigma2_hat;
        os << std::setw(8) << row.mean.bias << std::setw(8) << row.mean.mse << std::setw(8) << row.mean.fn
           << std::setw(8) << row.mean.fp << std::setw(8) << row.mean.tp << std::setw(7) << row.replications_ok
           << "\n";
        for (const auto& f : row.failures) os << "  failed " << f << "\n";
    }
    return os.str();
}

std::string format_table_csv(const StudyTable& table) {
    std::ostringstream os;
    os << std::setprecision(10);
    os << "study,r2_pop,p,method,sigma2_hat,bias,mse,fn,fp,tp,replications_ok,failures\n";
    for (const auto& row : table.rows) {
        os << study_name(table.id) << ',' << row.cell.r2_pop << ',' << row.cell.p << ",\"" << row.method << "\","
           << row.mean.sigma2_hat << ',' << row.mean.bias << ',' << row.mean.mse << ',' << row.mean.fn << ','
           << row.mean.fp << ',' << row.mean.tp << ',' << row.replications_ok << ',' << row.failures.size() << "\n";
    }
    return os.str();
}

} // namespace shrinkage
