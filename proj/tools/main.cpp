#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "shrinkage/config.hpp"
#include "shrinkage/dataset.hpp"
#include "shrinkage/errors.hpp"
#include "shrinkage/evidence.hpp"
#include "shrinkage/gibbs.hpp"
#include "shrinkage/output.hpp"
#include "shrinkage/quantile.hpp"
#include "shrinkage/simulation.hpp"

using namespace shrinkage;

namespace {

// Pulls `--section.key=value` and `--section.key value` out of argv.
ConfigEntries extract_dotted(std::vector<std::string>& args) {
    ConfigEntries out;
    std::vector<std::string> rest;
    for (std::size_t i = 0; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (a.rfind("--", 0) == 0) {
            const std::string body = a.substr(2);
            const auto eq = body.find('=');
            const std::string name = body.substr(0, eq);
            if (name.find('.') != std::string::npos) {
                if (eq != std::string::npos) {
                    out.emplace_back(name, body.substr(eq + 1));
                } else if (i + 1 < args.size()) {
                    out.emplace_back(name, args[++i]);
                } else {
                    throw config_error("flag --" + name + " needs a value");
                }
                continue;
            }
        }
        rest.push_back(a);
    }
    args = std::move(rest);
    return out;
}

struct Common {
    std::string config_path;
    std::string manifest;
    std::string out;
    std::string data;
    std::string response;
    std::uint64_t seed = 0;
    int threads = 0;
    bool legacy_dof = false;
    bool binary = false;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config_path, "flat section.key = value configuration file");
    app->add_option("--out", c.out, "output directory");
    app->add_option("--data", c.data, "input CSV (data.path)");
    app->add_option("--response", c.response, "response column (data.response)");
    app->add_option("--seed", c.seed, "random seed");
    app->add_option("--threads", c.threads, "worker threads");
    app->add_flag("--legacy-dof", c.legacy_dof, "use the printed degrees of freedom of the improper-prior conditionals");
}

RunConfig resolve(const Common& c, ConfigEntries overrides) {
    ConfigEntries flags;
    if (!c.data.empty()) flags.emplace_back("data.path", c.data);
    if (!c.response.empty()) flags.emplace_back("data.response", c.response);
    if (!c.out.empty()) flags.emplace_back("output.directory", c.out);
    if (c.seed != 0) flags.emplace_back("sampler.seed", std::to_string(c.seed));
    if (c.threads > 0) flags.emplace_back("sampler.threads", std::to_string(c.threads));
    if (c.legacy_dof) flags.emplace_back("prior.legacy_dof", "true");
    if (c.binary) flags.emplace_back("output.binary", "true");
    overrides.insert(overrides.end(), flags.begin(), flags.end());
    if (!c.manifest.empty()) {
        const RunConfig base = config_from_manifest(c.manifest);
        ConfigEntries all = parse_config_text(format_config(base));
        all.insert(all.end(), overrides.begin(), overrides.end());
        return build_config(all);
    }
    return parse_config(c.config_path, overrides);
}

Dataset load(const RunConfig& cfg, std::vector<std::string>& warnings) {
    if (cfg.data.path.empty()) throw config_error("no input data: set data.path or pass --data");
    Dataset d = load_csv(cfg.data.path, cfg.data.response, cfg.data.standardize, cfg.data.demean, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    return d;
}

int run_fit(const Common& c, const ConfigEntries& overrides) {
    RunConfig cfg = resolve(c, overrides);
    std::vector<std::string> warnings;
    Dataset d = load(cfg, warnings);
    SamplerPlan plan = cfg.sampler;
    plan.prior = resolve_for_data(plan.prior, d.n(), d.p(), sample_variance(d.y));
    plan.validate(d.n(), d.p());
    DrawStore draws = run_chains(plan, d);
    write_outputs(draws, cfg, d, warnings);
    std::printf("%-20s %12s %12s %12s\n", "coefficient", "mean", "sd", "pip");
    for (const auto& s : summarize(draws, d.column_names)) {
        if (s.pip >= 0.0) {
            std::printf("%-20s %12.5f %12.5f %12.3f\n", s.name.c_str(), s.mean, s.sd, s.pip);
        } else {
            std::printf("%-20s %12.5f %12.5f %12s\n", s.name.c_str(), s.mean, s.sd, "-");
        }
    }
    std::printf("sigma2 posterior mean %.5f; outputs in %s\n", draws.sigma2.mean(), cfg.output.directory.c_str());
    return 0;
}

struct SimArgs {
    std::string study;
    bool full = false;
    int reps = 0;
    std::vector<int> p;
    std::vector<double> r2;
    int iterations = 0;
    int burn_in = -1;
    std::vector<std::string> methods;
    std::string classify = "two_means";
    std::uint64_t seed = 20240101;
    int threads = 1;
    std::string out;
    bool verbose = false;
};

int run_simulate(const SimArgs& a) {
    const auto id = parse_study(a.study);
    if (!id) {
        std::string msg = "unknown study '" + a.study + "'";
        const auto near = did_you_mean(a.study, {"ssvs_lasso_table", "conj_vs_ind_table"});
        if (!near.empty()) msg += "; did you mean " + near.front() + "?";
        throw config_error(msg);
    }
    StudyOptions opt;
    SamplerPlan plan = a.full ? full_plan() : desk_plan();
    opt.base.replications = a.full ? kFullReplications : 20;
    if (a.reps > 0) opt.base.replications = a.reps;
    if (a.iterations > 0) plan.iterations = a.iterations;
    if (a.burn_in >= 0) plan.burn_in = a.burn_in;
    if (plan.burn_in >= plan.iterations) throw config_error("burn_in >= iterations");
    opt.base.seed = a.seed;
    opt.threads = a.threads;
    opt.methods = a.methods;
    if (a.classify == "credible") {
        opt.classify = ClassifyRule::credible_interval;
    } else if (a.classify != "two_means") {
        throw config_error("--classify must be two_means or credible");
    }
    if (!a.p.empty() || !a.r2.empty()) {
        const std::vector<int> ps = a.p.empty() ? std::vector<int>{50, 100, 300} : a.p;
        const std::vector<double> rs = a.r2.empty() ? std::vector<double>{0.8, 0.4} : a.r2;
        for (double r : rs)
            for (int p : ps) opt.cells.push_back({p, r});
    }
    if (a.verbose) {
        opt.progress = [](const std::string& s) { std::cerr << s << "\n"; };
    }
    StudyTable table = run_study(*id, opt, plan);
    std::cout << study_name(*id) << ": " << opt.base.replications << " replications, " << plan.iterations
              << " iterations (" << plan.burn_in << " burn-in)\n"
              << format_table_text(table);
    if (!a.out.empty()) {
        write_text_file(a.out, study_name(*id) + ".csv", format_table_csv(table));
        write_text_file(a.out, study_name(*id) + ".txt", format_table_text(table));
    }
    return 0;
}

int run_evidence(const Common& c, const ConfigEntries& overrides, bool bma) {
    RunConfig cfg = resolve(c, overrides);
    std::vector<std::string> warnings;
    Dataset d = load(cfg, warnings);
    const ConjugateModel model =
        ConjugateModel::ridge(d.p(), cfg.evidence.prior_variance, cfg.evidence.v0, cfg.evidence.s0);
    const ConjugatePosterior post = conjugate_posterior(model, d);
    const auto mode = conjugate_posterior_mode(model, d);
    const DrawStore draws = sample_conjugate_posterior(model, d, cfg.evidence.draws, cfg.sampler.seed);
    const auto crit = info_criteria(draws, d, gaussian_loglik(d, mode.first, mode.second), d.p(), d.n());

    nlohmann::ordered_json out;
    out["log_marginal"] = post.log_marginal;
    out["posterior_mean"] = std::vector<double>(post.mean.data(), post.mean.data() + post.mean.size());
    out["sigma2_mean"] = post.v > 2.0 ? post.s / (post.v - 2.0) : -1.0;
    for (const auto& [k, v] : crit) out[k] = v;
    nlohmann::ordered_json sd = nlohmann::ordered_json::array();
    for (int j = 0; j < d.p(); ++j) {
        sd.push_back({{"name", d.column_names[static_cast<std::size_t>(j)]}, {"log_bf_restricted", log_sddr(model, d, j, 0.0)}});
    }
    out["savage_dickey"] = sd;
    if (bma || cfg.evidence.bma) {
        BmaOptions opt;
        opt.rule = cfg.evidence.g_rule == "fixed" ? GRule::fixed : GRule::ratio;
        opt.g = cfg.evidence.g;
        const BmaResult r = bma_enumerate_gprior(d, opt);
        nlohmann::ordered_json b;
        b["inclusion"] = std::vector<double>(r.inclusion.data(), r.inclusion.data() + r.inclusion.size());
        b["median_model"] = r.median_model;
        b["coef"] = std::vector<double>(r.coef.data(), r.coef.data() + r.coef.size());
        b["evaluated"] = r.evaluated;
        b["singular"] = r.singular;
        nlohmann::ordered_json top = nlohmann::ordered_json::array();
        for (std::size_t k = 0; k < std::min<std::size_t>(10, r.models.size()); ++k) {
            top.push_back({{"columns", r.models[k].columns}, {"probability", r.models[k].probability}});
        }
        b["top_models"] = top;
        out["bma"] = b;
    }
    const std::string text = out.dump(2) + "\n";
    std::cout << text;
    write_text_file(cfg.output.directory, "evidence.json", text);
    return 0;
}

int run_quantile(const Common& c, const ConfigEntries& overrides, const std::string& levels) {
    ConfigEntries ov = overrides;
    if (!levels.empty()) ov.emplace_back("quantile.levels", levels);
    RunConfig cfg = resolve(c, ov);
    std::vector<std::string> warnings;
    Dataset d = load(cfg, warnings);
    QuantileSpec spec;
    spec.levels = cfg.quantile.levels;
    spec.prior_tau = cfg.quantile.prior_tau;
    const QuantileGridResult res = run_quantile_grid(d, spec, cfg.sampler);

    nlohmann::ordered_json out;
    out["crossing_rate"] = res.crossing_rate;
    nlohmann::ordered_json lv = nlohmann::ordered_json::array();
    for (const auto& [r, draws] : res.draws) {
        nlohmann::ordered_json e;
        e["level"] = r;
        nlohmann::ordered_json coefs = nlohmann::ordered_json::array();
        for (const auto& s : summarize(draws, res.column_names)) {
            coefs.push_back({{"name", s.name}, {"mean", s.mean}, {"sd", s.sd}, {"q025", s.q025}, {"q50", s.q50}, {"q975", s.q975}});
        }
        e["coefficients"] = coefs;
        lv.push_back(e);
        char name[48];
        std::snprintf(name, sizeof name, "draws_q%.4g.csv", r);
        write_text_file(cfg.output.directory, name, draws_csv(draws));
    }
    out["levels"] = lv;
    nlohmann::ordered_json fail = nlohmann::ordered_json::object();
    for (const auto& [r, msg] : res.failures) {
        fail[std::to_string(r)] = msg;
        std::cerr << "warning: " << msg << "\n";
    }
    out["failures"] = fail;
    const std::string text = out.dump(2) + "\n";
    std::cout << text;
    write_text_file(cfg.output.directory, "quantile_summary.json", text);
    write_text_file(cfg.output.directory, "config.resolved", format_config(cfg));
    if (res.draws.empty()) throw numeric_error("every quantile level failed");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    ConfigEntries overrides;
    try {
        overrides = extract_dotted(args);
    } catch (const config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    CLI::App app{"Bayesian shrinkage and variable selection for linear regression"};
    app.require_subcommand(1);

    Common fit_c, ev_c, q_c;
    auto* fit = app.add_subcommand("fit", "run the Gibbs sampler on one dataset with one prior");
    add_common(fit, fit_c);
    fit->add_option("--manifest", fit_c.manifest, "rerun the configuration stored in a run_manifest.json");
    fit->add_flag("--binary", fit_c.binary, "also write draws.bin");

    SimArgs sim;
    auto* simulate = app.add_subcommand("simulate", "run a simulation study");
    simulate->add_option("--study", sim.study, "ssvs_lasso_table or conj_vs_ind_table")->required();
    simulate->add_flag("--full", sim.full, "100 replications, longer chains, every p and R^2 cell");
    simulate->add_option("--reps", sim.reps, "replications per cell");
    simulate->add_option("--p", sim.p, "numbers of covariates")->delimiter(',');
    simulate->add_option("--r2", sim.r2, "population R^2 values")->delimiter(',');
    simulate->add_option("--iterations", sim.iterations, "Gibbs iterations per chain");
    simulate->add_option("--burn-in", sim.burn_in, "burn-in iterations");
    simulate->add_option("--methods", sim.methods, "restrict to these row labels")->delimiter(',');
    simulate->add_option("--classify", sim.classify, "two_means or credible");
    simulate->add_option("--seed", sim.seed, "random seed");
    simulate->add_option("--threads", sim.threads, "worker threads");
    simulate->add_option("--out", sim.out, "directory for the CSV and text tables");
    simulate->add_flag("--verbose", sim.verbose, "report each finished replication");

    bool bma = false;
    auto* evidence = app.add_subcommand("evidence", "conjugate marginal likelihood, BIC, DIC, Savage-Dickey and BMA");
    add_common(evidence, ev_c);
    evidence->add_flag("--bma", bma, "enumerate g-prior models");

    std::string levels;
    auto* quantile = app.add_subcommand("quantile", "Bayesian quantile regression over a grid of levels");
    add_common(quantile, q_c);
    quantile->add_option("--levels", levels, "comma-separated quantile levels");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (fit->parsed()) return run_fit(fit_c, overrides);
        if (simulate->parsed()) {
            if (!overrides.empty()) throw config_error("simulate does not take --section.key overrides");
            return run_simulate(sim);
        }
        if (evidence->parsed()) return run_evidence(ev_c, overrides, bma);
        if (quantile->parsed()) return run_quantile(q_c, overrides, levels);
    } catch (const config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const numeric_error& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const std::domain_error& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
