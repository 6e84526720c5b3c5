#include "wsperc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

#include "wsperc/error.hpp"
#include "wsperc/geometry.hpp"
#include "wsperc/parallel.hpp"
#include "wsperc/percolation.hpp"
#include "wsperc/rng.hpp"

namespace wsperc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != v.size() || !std::isfinite(x))
        throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
    return x;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    unsigned long long x = 0;
    try {
        if (!v.empty() && v[0] != '-') x = std::stoull(v, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != v.size())
        throw ConfigError("config: '" + key + "' expects a non-negative integer, got '" + v + "'");
    return x;
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    if (v.back() == ',') throw ConfigError("config: '" + key + "' has an empty list item");
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
    if (out.empty()) throw ConfigError("config: '" + key + "' is empty");
    return out;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

nlohmann::json finite_or_null(double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

// --- config ---------------------------------------------------------------------------------

void ExperimentConfig::validate() const {
    check_run_dimension(d);
    require(lambda > 0.0, "config: lambda must be > 0");
    require(!r.empty(), "config: r list is required");
    for (double x : r) require(x > 0.0 && x < 1.0, "config: every r must lie in (0, 1)");
    require(!box_sides.empty(), "config: L list is empty");
    for (double x : box_sides) require(x >= 4.0, "config: every L must be >= 4");
    require(c_b > 0.0, "config: c_b must be > 0");
    require(step_divisor > 0.0, "config: step_divisor must be > 0");
    require(n_trials >= 1, "config: n_trials must be >= 1");
    require(safety > 0.0, "config: safety must be > 0");
    require(margin >= 0.0, "config: margin must be >= 0");
    require(bootstrap >= 1, "config: bootstrap must be >= 1");
    parse_model(model, d);
    require(!output_csv.empty() && !output_json.empty(), "config: output paths must be non-empty");
}

ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig cfg;
    std::set<std::string> seen;
    std::string line;
    int lineno = 0;
    bool has_d = false, has_r = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (!seen.insert(key).second) throw ConfigError("config: duplicate key '" + key + "'");
        if (val.empty()) throw ConfigError("config: empty value for '" + key + "'");
        if (key == "d") {
            cfg.d = static_cast<int>(to_u64(key, val));
            has_d = true;
        } else if (key == "lambda") {
            cfg.lambda = to_double(key, val);
        } else if (key == "r") {
            cfg.r = to_list(key, val);
            has_r = true;
        } else if (key == "L") {
            cfg.box_sides = to_list(key, val);
        } else if (key == "c_b") {
            cfg.c_b = to_double(key, val);
        } else if (key == "step_divisor") {
            cfg.step_divisor = to_double(key, val);
        } else if (key == "n_trials") {
            cfg.n_trials = to_u64(key, val);
        } else if (key == "seed") {
            cfg.seed = to_u64(key, val);
        } else if (key == "safety") {
            cfg.safety = to_double(key, val);
        } else if (key == "margin") {
            cfg.margin = to_double(key, val);
        } else if (key == "bootstrap") {
            cfg.bootstrap = to_u64(key, val);
        } else if (key == "model") {
            cfg.model = val;
        } else if (key == "output_csv") {
            cfg.output_csv = val;
        } else if (key == "output_json") {
            cfg.output_json = val;
        } else {
            throw ConfigError("config: unknown key '" + key + "'");
        }
    }
    if (!has_d) throw ConfigError("config: missing required key 'd'");
    if (!has_r) throw ConfigError("config: missing required key 'r'");
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    return parse_config(in);
}

double predicted_scale(int d, double r) {
    require(r > 0.0 && r < 1.0, "predicted_scale: r must lie in (0, 1)");
    if (d == 4) return std::sqrt(std::log(1.0 / r));
    return std::pow(r, (4.0 - d) / 2.0);
}

// --- trials ---------------------------------------------------------------------------------

std::string to_string(TcFlag f) {
    switch (f) {
        case TcFlag::ok: return "OK";
        case TcFlag::none_heavy: return "NONE_HEAVY";
        case TcFlag::underpowered: return "UNDERPOWERED";
    }
    return "unknown";
}

TcSummary summarize_trials(const std::vector<std::optional<double>>& tau,
                           std::size_t n_resamples, std::uint64_t seed) {
    require(!tau.empty(), "summarize_trials: no trials");
    TcSummary s;
    std::vector<double> finite;
    for (const auto& t : tau) {
        if (t) finite.push_back(*t);
        else ++s.n_none;
    }
    const double frac = double(s.n_none) / double(tau.size());
    std::vector<double> values = finite;
    if (frac >= 0.2) values.resize(tau.size(), kInf);
    s.flag = frac > 0.5 ? TcFlag::underpowered : frac >= 0.2 ? TcFlag::none_heavy : TcFlag::ok;
    if (values.empty()) {
        s.median = kInf;
        s.ci = {kInf, kInf};
        return s;
    }
    std::sort(values.begin(), values.end());
    s.median = median(values);
    RngStream rng(seed, derive_stream(seed, {0xB5}));
    s.ci = bootstrap_median_ci(values, n_resamples, rng);
    s.ci.lo = std::min(s.ci.lo, s.median);
    s.ci.hi = std::max(s.ci.hi, s.median);
    return s;
}

std::uint64_t trial_seed(std::uint64_t seed, std::size_t r_index, std::size_t trial) {
    return derive_stream(seed, {0x7C, r_index, trial});
}

std::optional<double> run_trial(const ExperimentConfig& cfg, double r, double box_side,
                                std::uint64_t seed, std::size_t* n_sausages) {
    const double t_ref = predicted_scale(cfg.d, r);
    const double step = (r / cfg.step_divisor) * (r / cfg.step_divisor);
    ConfigurationParams p;
    p.d = cfg.d;
    p.intensity = cfg.lambda;
    p.r = r;
    p.step = step;
    p.t = std::ceil(cfg.safety * t_ref / step) * step;
    const double side = box_side * std::sqrt(t_ref);
    p.box = Aabb::cube(cfg.d, 0.0, side);
    p.margin = cfg.margin * std::sqrt(t_ref);
    const Configuration conf = sample_configuration(p, seed);
    if (n_sausages) *n_sausages = conf.sausages.size();
    // Dense clouds often cross already at time 0; that test needs no stored edge list.
    if (crosses_by(conf, 0.0)) return 0.0;
    return crossing_time(build_timed_graph(conf));
}

TcEstimate estimate_tc(const ExperimentConfig& cfg, std::size_t r_index, double box_side,
                       unsigned workers) {
    cfg.validate();
    require(r_index < cfg.r.size(), "estimate_tc: r index out of range");
    TcEstimate est;
    est.r = cfg.r[r_index];
    est.box_side = box_side;
    est.t_ref = predicted_scale(cfg.d, est.r);
    est.step = (est.r / cfg.step_divisor) * (est.r / cfg.step_divisor);
    est.t_max = std::ceil(cfg.safety * est.t_ref / est.step) * est.step;
    est.tau.resize(cfg.n_trials);
    est.trial_seeds.resize(cfg.n_trials);
    std::vector<std::size_t> counts(cfg.n_trials, 0);
    for (std::size_t k = 0; k < cfg.n_trials; ++k) est.trial_seeds[k] = trial_seed(cfg.seed, r_index, k);
    parallel_for(cfg.n_trials, workers, [&](std::size_t k) {
        est.tau[k] = run_trial(cfg, est.r, box_side, est.trial_seeds[k], &counts[k]);
    });
    for (std::size_t c : counts) est.n_sausages += c;
    est.summary = summarize_trials(est.tau, cfg.bootstrap, derive_stream(cfg.seed, {0xB5, r_index}));
    return est;
}

// --- fits -----------------------------------------------------------------------------------

std::string to_string(ScalingModel m) {
    return m == ScalingModel::power_law ? "power_law" : "log_root";
}

ScalingModel parse_model(const std::string& s, int d) {
    if (s == "power_law") return ScalingModel::power_law;
    if (s == "log_root") return ScalingModel::log_root;
    if (s == "auto") return d == 4 ? ScalingModel::log_root : ScalingModel::power_law;
    throw ConfigError("unknown scaling model '" + s + "' (power_law, log_root, auto)");
}

ScalingFit fit_scaling(const std::vector<double>& r, const std::vector<double>& t, ScalingModel m) {
    require(r.size() == t.size(), "fit_scaling: size mismatch");
    require(r.size() >= 3, "fit_scaling: need at least 3 estimates");
    require(std::set<double>(r.begin(), r.end()).size() >= 2, "fit_scaling: degenerate design, all r equal");
    for (std::size_t i = 0; i < r.size(); ++i) {
        require(r[i] > 0.0 && r[i] < 1.0, "fit_scaling: r must lie in (0, 1)");
        require(std::isfinite(t[i]) && t[i] > 0.0, "fit_scaling: estimates must be finite and > 0");
    }
    ScalingFit f;
    f.model = m;
    f.n = r.size();
    if (m == ScalingModel::power_law) {
        std::vector<double> x, y;
        for (std::size_t i = 0; i < r.size(); ++i) {
            x.push_back(std::log(r[i]));
            y.push_back(std::log(t[i]));
        }
        const LinearFit lf = least_squares(x, y);
        f.exponent = lf.slope;
        f.exponent_se = lf.slope_se;
        f.amplitude = std::exp(lf.intercept);
        f.amplitude_se = f.amplitude * lf.intercept_se;
        f.residuals = lf.residuals;
        return f;
    }
    double sxx = 0.0, sxy = 0.0;
    std::vector<double> x(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        x[i] = std::sqrt(std::log(1.0 / r[i]));
        sxx += x[i] * x[i];
        sxy += x[i] * t[i];
    }
    f.amplitude = sxy / sxx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        f.residuals.push_back(t[i] - f.amplitude * x[i]);
        ssr += f.residuals.back() * f.residuals.back();
    }
    f.amplitude_se = std::sqrt(ssr / double(r.size() - 1) / sxx);
    return f;
}

ScalingFit fit_scaling(const std::vector<TcEstimate>& estimates, ScalingModel m) {
    std::vector<double> r, t;
    for (const auto& e : estimates) {
        r.push_back(e.r);
        t.push_back(e.summary.median);
    }
    return fit_scaling(r, t, m);
}

// --- experiment -----------------------------------------------------------------------------

ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned workers) {
    cfg.validate();
    ExperimentResult res;
    for (std::size_t i = 0; i < cfg.r.size(); ++i)
        for (double side : cfg.box_sides) {
            res.estimates.push_back(estimate_tc(cfg, i, side, workers));
            if (res.estimates.back().summary.flag == TcFlag::underpowered) res.underpowered = true;
        }
    const ScalingModel model = parse_model(cfg.model, cfg.d);
    for (double side : cfg.box_sides) {
        std::vector<TcEstimate> sub;
        for (const auto& e : res.estimates)
            if (e.box_side == side && std::isfinite(e.summary.median) && e.summary.median > 0.0)
                sub.push_back(e);
        std::set<double> distinct;
        for (const auto& e : sub) distinct.insert(e.r);
        if (sub.size() >= 3 && distinct.size() >= 2) res.fits.push_back(fit_scaling(sub, model));
        else res.fits.push_back(std::nullopt);
    }
    return res;
}

void write_trials_csv(std::ostream& out, const ExperimentConfig& cfg, const ExperimentResult& res) {
    out << "r,trial,tau_star,L,d,lambda,seed\n";
    for (const auto& e : res.estimates)
        for (std::size_t k = 0; k < e.tau.size(); ++k)
            out << fmt(e.r) << ',' << k << ',' << (e.tau[k] ? fmt(*e.tau[k]) : "NONE") << ','
                << fmt(e.box_side) << ',' << cfg.d << ',' << fmt(cfg.lambda) << ','
                << e.trial_seeds[k] << '\n';
}

void write_summary_json(std::ostream& out, const ExperimentConfig& cfg, const ExperimentResult& res) {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["config"] = {{"d", cfg.d},
                   {"lambda", cfg.lambda},
                   {"r", cfg.r},
                   {"L", cfg.box_sides},
                   {"c_b", cfg.c_b},
                   {"step_divisor", cfg.step_divisor},
                   {"n_trials", cfg.n_trials},
                   {"seed", cfg.seed},
                   {"safety", cfg.safety},
                   {"margin", cfg.margin},
                   {"bootstrap", cfg.bootstrap},
                   {"model", to_string(parse_model(cfg.model, cfg.d))}};
    auto& ests = j["estimates"] = nlohmann::ordered_json::array();
    for (const auto& e : res.estimates) {
        nlohmann::ordered_json o;
        o["r"] = e.r;
        o["L"] = e.box_side;
        o["t_ref"] = e.t_ref;
        o["t_max"] = e.t_max;
        o["step"] = e.step;
        o["n_trials"] = e.tau.size();
        o["n_none"] = e.summary.n_none;
        o["median"] = finite_or_null(e.summary.median);
        o["ci_lo"] = finite_or_null(e.summary.ci.lo);
        o["ci_hi"] = finite_or_null(e.summary.ci.hi);
        o["median_over_t_ref"] = finite_or_null(e.summary.median / e.t_ref);
        o["flag"] = to_string(e.summary.flag);
        o["mean_sausages"] = double(e.n_sausages) / double(e.tau.size());
        ests.push_back(o);
    }
    auto& fits = j["fits"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < res.fits.size(); ++i) {
        nlohmann::ordered_json o;
        o["L"] = cfg.box_sides[i];
        if (!res.fits[i]) {
            o["model"] = nullptr;
            o["reason"] = "fewer than 3 finite positive medians";
        } else {
            const auto& f = *res.fits[i];
            o["model"] = to_string(f.model);
            o["amplitude"] = f.amplitude;
            o["amplitude_se"] = f.amplitude_se;
            if (f.model == ScalingModel::power_law) {
                o["exponent"] = f.exponent;
                o["exponent_se"] = f.exponent_se;
                o["predicted_exponent"] = (4.0 - cfg.d) / 2.0;
            }
            o["residuals"] = f.residuals;
            o["n"] = f.n;
        }
        fits.push_back(o);
    }
    j["status"] = res.underpowered ? "UNDERPOWERED" : "OK";
    out << j.dump(2) << '\n';
}

void write_results(const ExperimentConfig& cfg, const ExperimentResult& res) {
    {
        std::ofstream out(cfg.output_csv, std::ios::binary);
        if (!out) throw IoError("cannot write '" + cfg.output_csv + "'");
        write_trials_csv(out, cfg, res);
        if (!out) throw IoError("write failed for '" + cfg.output_csv + "'");
    }
    std::ofstream out(cfg.output_json, std::ios::binary);
    if (!out) throw IoError("cannot write '" + cfg.output_json + "'");
    write_summary_json(out, cfg, res);
    if (!out) throw IoError("write failed for '" + cfg.output_json + "'");
}

}  // namespace wsperc
