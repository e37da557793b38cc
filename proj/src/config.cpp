#include "shrinkage/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "shrinkage/errors.hpp"
#include "shrinkage/quantile.hpp"

namespace shrinkage {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string fmt_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
        throw config_error(key + " expects a number, got '" + v + "'");
    }
    return out;
}

template <class Int>
Int to_integer(const std::string& key, const std::string& v) {
    Int out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
        throw config_error(key + " expects an integer, got '" + v + "'");
    }
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw config_error(key + " expects true or false, got '" + v + "'");
}

std::string choice(const std::string& key, const std::string& v, const std::vector<std::string>& options) {
    if (std::find(options.begin(), options.end(), v) != options.end()) return v;
    std::string msg = key + ": unknown value '" + v + "'";
    const auto near = did_you_mean(v, options);
    if (!near.empty()) msg += "; did you mean " + near.front() + "?";
    msg += " (choices:";
    for (const auto& o : options) msg += " " + o;
    throw config_error(msg + ")");
}

const std::vector<std::string> kKernels{"direct", "rue", "bhattacharya", "automatic"};
const std::vector<std::string> kBlocks{"three_block", "scalable", "skinny"};

struct Key {
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&, const std::string&)> set;
};

#define DOUBLE_KEY(name, field)                                                                              \
    {name, {[](const RunConfig& c) { return fmt_double(c.field); },                                           \
            [](RunConfig& c, const std::string& k, const std::string& v) { c.field = to_double(k, v); }}}
#define INT_KEY(name, field)                                                                                 \
    {name, {[](const RunConfig& c) { return std::to_string(c.field); },                                       \
            [](RunConfig& c, const std::string& k, const std::string& v) { c.field = to_integer<int>(k, v); }}}
#define BOOL_KEY(name, field)                                                                                \
    {name, {[](const RunConfig& c) { return std::string(c.field ? "true" : "false"); },                       \
            [](RunConfig& c, const std::string& k, const std::string& v) { c.field = to_bool(k, v); }}}
#define STRING_KEY(name, field)                                                                              \
    {name, {[](const RunConfig& c) { return c.field; },                                                        \
            [](RunConfig& c, const std::string&, const std::string& v) { c.field = v; }}}

const std::map<std::string, Key>& key_table() {
    static const std::map<std::string, Key> table{
        {"prior.family",
         {[](const RunConfig& c) { return family_name(c.prior().family); },
          [](RunConfig& c, const std::string& k, const std::string& v) {
              const auto f = parse_family(v);
              if (!f) choice(k, v, family_names());
              c.sampler.prior.family = *f;
          }}},
        {"prior.scaling",
         {[](const RunConfig& c) {
              return std::string(c.prior().scaling == Scaling::conjugate ? "conjugate" : "independent");
          },
          [](RunConfig& c, const std::string& k, const std::string& v) {
              c.sampler.prior.scaling =
                  choice(k, v, {"conjugate", "independent"}) == "conjugate" ? Scaling::conjugate : Scaling::independent;
              c.scaling_explicit = true;
          }}},
        {"prior.groups",
         {[](const RunConfig& c) {
              std::string out;
              for (std::size_t j = 0; j < c.prior().groups.size(); ++j) {
                  out += (j ? "," : "") + std::to_string(c.prior().groups[j]);
              }
              return out;
          },
          [](RunConfig& c, const std::string& k, const std::string& v) {
              c.sampler.prior.groups.clear();
              for (const auto& item : split_list(v)) c.sampler.prior.groups.push_back(to_integer<int>(k, item));
          }}},
        DOUBLE_KEY("prior.sigma_a0", sampler.prior.sigma_a0),
        DOUBLE_KEY("prior.sigma_b0", sampler.prior.sigma_b0),
        BOOL_KEY("prior.legacy_dof", sampler.prior.legacy_dof),
        DOUBLE_KEY("prior.rho", sampler.prior.rho),
        DOUBLE_KEY("prior.xi", sampler.prior.xi),
        DOUBLE_KEY("prior.r", sampler.prior.r),
        DOUBLE_KEY("prior.delta", sampler.prior.delta),
        BOOL_KEY("prior.learn_lambda", sampler.prior.learn_lambda),
        DOUBLE_KEY("prior.lambda_sq", sampler.prior.lambda_sq),
        DOUBLE_KEY("prior.lambda1_sq", sampler.prior.lambda1_sq),
        DOUBLE_KEY("prior.lambda2_sq", sampler.prior.lambda2_sq),
        BOOL_KEY("prior.fused_differences", sampler.prior.fused_differences),
        DOUBLE_KEY("prior.r1", sampler.prior.r1),
        DOUBLE_KEY("prior.delta1", sampler.prior.delta1),
        DOUBLE_KEY("prior.r2", sampler.prior.r2),
        DOUBLE_KEY("prior.delta2", sampler.prior.delta2),
        DOUBLE_KEY("prior.ng_lambda", sampler.prior.ng_lambda),
        DOUBLE_KEY("prior.ng_gamma2", sampler.prior.ng_gamma2),
        DOUBLE_KEY("prior.dl_alpha", sampler.prior.dl_alpha),
        DOUBLE_KEY("prior.tpb_a", sampler.prior.tpb_a),
        DOUBLE_KEY("prior.tpb_b", sampler.prior.tpb_b),
        DOUBLE_KEY("prior.tau0_sq", sampler.prior.tau0_sq),
        DOUBLE_KEY("prior.tau1_sq", sampler.prior.tau1_sq),
        DOUBLE_KEY("prior.theta", sampler.prior.theta),
        BOOL_KEY("prior.learn_theta", sampler.prior.learn_theta),
        DOUBLE_KEY("prior.beta_c", sampler.prior.beta_c),
        DOUBLE_KEY("prior.beta_d", sampler.prior.beta_d),
        DOUBLE_KEY("prior.c1", sampler.prior.c1),
        DOUBLE_KEY("prior.c2", sampler.prior.c2),
        DOUBLE_KEY("prior.lambda0", sampler.prior.lambda0),
        DOUBLE_KEY("prior.lambda1", sampler.prior.lambda1),
        DOUBLE_KEY("prior.km_tau2", sampler.prior.km_tau2),
        DOUBLE_KEY("prior.km_inclusion", sampler.prior.km_inclusion),
        INT_KEY("sampler.iterations", sampler.iterations),
        INT_KEY("sampler.burn_in", sampler.burn_in),
        INT_KEY("sampler.thin", sampler.thin),
        INT_KEY("sampler.chains", sampler.chains),
        INT_KEY("sampler.threads", sampler.threads),
        BOOL_KEY("sampler.store_scales", sampler.store_scales),
        {"sampler.seed",
         {[](const RunConfig& c) { return std::to_string(c.sampler.seed); },
          [](RunConfig& c, const std::string& k, const std::string& v) {
              c.sampler.seed = to_integer<std::uint64_t>(k, v);
          }}},
        {"sampler.kernel",
         {[](const RunConfig& c) { return kKernels[static_cast<std::size_t>(c.sampler.kernel)]; },
          [](RunConfig& c, const std::string& k, const std::string& v) {
              const auto s = choice(k, v, kKernels);
              c.sampler.kernel = static_cast<MvnKernel>(std::find(kKernels.begin(), kKernels.end(), s) - kKernels.begin());
          }}},
        {"sampler.block_mode",
         {[](const RunConfig& c) { return kBlocks[static_cast<std::size_t>(c.sampler.block_mode)]; },
          [](RunConfig& c, const std::string& k, const std::string& v) {
              const auto s = choice(k, v, kBlocks);
              c.sampler.block_mode = static_cast<BlockMode>(std::find(kBlocks.begin(), kBlocks.end(), s) - kBlocks.begin());
          }}},
        STRING_KEY("data.path", data.path),
        STRING_KEY("data.response", data.response),
        BOOL_KEY("data.standardize", data.standardize),
        BOOL_KEY("data.demean", data.demean),
        STRING_KEY("output.directory", output.directory),
        BOOL_KEY("output.binary", output.binary),
        DOUBLE_KEY("evidence.prior_variance", evidence.prior_variance),
        DOUBLE_KEY("evidence.v0", evidence.v0),
        DOUBLE_KEY("evidence.s0", evidence.s0),
        INT_KEY("evidence.draws", evidence.draws),
        BOOL_KEY("evidence.bma", evidence.bma),
        {"evidence.g_rule",
         {[](const RunConfig& c) { return c.evidence.g_rule; },
          [](RunConfig& c, const std::string& k, const std::string& v) { c.evidence.g_rule = choice(k, v, {"fixed", "ratio"}); }}},
        DOUBLE_KEY("evidence.g", evidence.g),
        {"quantile.levels",
         {[](const RunConfig& c) {
              std::string out;
              for (std::size_t k = 0; k < c.quantile.levels.size(); ++k) {
                  out += (k ? "," : "") + fmt_double(c.quantile.levels[k]);
              }
              return out;
          },
          [](RunConfig& c, const std::string& k, const std::string& v) {
              c.quantile.levels.clear();
              for (const auto& item : split_list(v)) c.quantile.levels.push_back(to_double(k, item));
          }}},
        DOUBLE_KEY("quantile.prior_tau", quantile.prior_tau),
    };
    return table;
}

#undef DOUBLE_KEY
#undef INT_KEY
#undef BOOL_KEY
#undef STRING_KEY

std::size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return row[b.size()];
}

} // namespace

std::vector<std::string> did_you_mean(const std::string& word, const std::vector<std::string>& candidates) {
    const std::size_t limit = std::max<std::size_t>(2, word.size() / 3);
    std::vector<std::pair<std::size_t, std::string>> scored;
    for (const auto& c : candidates) {
        const std::size_t d = edit_distance(word, c);
        if (d <= limit || (word.size() >= 3 && c.rfind(word, 0) == 0)) scored.emplace_back(d, c);
    }
    std::stable_sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    std::vector<std::string> out;
    for (const auto& [d, c] : scored) out.push_back(c);
    return out;
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> v;
        for (const auto& [k, _] : key_table()) v.push_back(k);
        return v;
    }();
    return keys;
}

ConfigEntries parse_config_text(const std::string& text) {
    ConfigEntries out;
    std::stringstream ss(text);
    std::string line;
    int number = 0;
    while (std::getline(ss, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw config_error("line " + std::to_string(number) + ": expected 'section.key = value'");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.find('.') == std::string::npos) {
            throw config_error("line " + std::to_string(number) + ": key '" + key + "' has no section");
        }
        out.emplace_back(std::move(key), std::move(value));
    }
    return out;
}

ConfigEntries read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return parse_config_text(buf.str());
    } catch (const config_error& e) {
        throw config_error(path + ": " + e.what());
    }
}

void RunConfig::validate() const {
    sampler.validate(0, static_cast<int>(sampler.prior.groups.size()));
    if (!(evidence.prior_variance > 0.0)) throw config_error("evidence.prior_variance must be positive");
    if (!(evidence.v0 > 0.0) || !(evidence.s0 > 0.0)) throw config_error("evidence.v0 and evidence.s0 must be positive");
    if (evidence.draws < 1) throw config_error("evidence.draws must be positive");
    if (!(evidence.g > 0.0)) throw config_error("evidence.g must be positive");
    QuantileSpec q;
    q.levels = quantile.levels;
    q.prior_tau = quantile.prior_tau;
    q.validate();
}

RunConfig build_config(const ConfigEntries& entries) {
    RunConfig cfg;
    const auto& table = key_table();
    for (const auto& [key, value] : entries) {
        const auto it = table.find(key);
        if (it == table.end()) {
            std::string msg = "unknown config key '" + key + "'";
            const auto near = did_you_mean(key, config_keys());
            if (!near.empty()) {
                msg += "; did you mean";
                for (std::size_t k = 0; k < std::min<std::size_t>(3, near.size()); ++k) msg += (k ? ", " : " ") + near[k];
                msg += "?";
            }
            throw config_error(msg);
        }
        it->second.set(cfg, key, value);
    }
    if (!cfg.scaling_explicit) cfg.sampler.prior.scaling = default_scaling(cfg.sampler.prior.family);
    cfg.validate();
    return cfg;
}

RunConfig parse_config(const std::string& path, const ConfigEntries& overrides) {
    ConfigEntries all;
    if (!path.empty()) all = read_config_file(path);
    all.insert(all.end(), overrides.begin(), overrides.end());
    return build_config(all);
}

std::string format_config(const RunConfig& config) {
    std::string out;
    for (const auto& [key, k] : key_table()) out += key + " = " + k.get(config) + "\n";
    return out;
}

} // namespace shrinkage
