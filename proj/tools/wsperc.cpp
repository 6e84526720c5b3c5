// wsperc: command-line front end for the Wiener-sausage percolation toolkit.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wsperc/branching.hpp"
#include "wsperc/capacity.hpp"
#include "wsperc/error.hpp"
#include "wsperc/harness.hpp"
#include "wsperc/parallel.hpp"
#include "wsperc/percolation.hpp"
#include "wsperc/stats.hpp"

using namespace wsperc;
using Json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitConfig = 2;
constexpr int kExitUnderpowered = 3;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Output sink: a file when a path is given, stdout otherwise.
class Sink {
public:
    explicit Sink(const std::string& path) {
        if (path.empty() || path == "-") return;
        file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
        if (!*file_) throw IoError("cannot write '" + path + "'");
    }
    std::ostream& out() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

void write_json(const std::string& path, Json j) {
    if (path.empty()) return;
    Json doc;
    doc["schema_version"] = 1;
    for (auto& [k, v] : j.items()) doc[k] = v;
    Sink s(path);
    s.out() << doc.dump(2) << '\n';
}

struct Common {
    std::uint64_t seed = 1;
    unsigned workers = 0;
    std::string out;
    std::string json;

    unsigned n_workers() const { return workers > 0 ? workers : default_workers(); }
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--seed", c.seed, "Experiment seed")->capture_default_str();
    app->add_option("--workers", c.workers, "Worker threads (default: WORKERS or all cores)");
    app->add_option("--out", c.out, "CSV output path (default stdout)");
    app->add_option("--json", c.json, "JSON summary path");
}

// --- cap-estimate ---------------------------------------------------------------------------

struct CapArgs {
    Common c;
    std::string shape = "sausage";
    std::string method = "hitting";
    int d = 4;
    double t = 1.0, r = 1.0;
    std::size_t n = 10000;
    std::size_t paths = 1;
    double quad_step = 0.05;
};

int run_cap(const CapArgs& a) {
    check_run_dimension(a.d);
    require(a.shape == "ball" || a.shape == "sausage", "--shape must be ball or sausage");
    require(a.method == "hitting" || a.method == "energy" || a.method == "zt" || a.method == "all",
            "--method must be hitting, energy, zt or all");
    require(a.n >= 1 && a.paths >= 1, "--n and --paths must be >= 1");
    const GreenKernel k = make_green_kernel(a.d);
    const bool all = a.method == "all";
    struct Row {
        std::string method;
        double t, value, se;
        std::size_t n;
    };
    std::vector<Row> rows;
    if (a.shape == "ball") {
        require(a.method == "hitting" || all, "balls support --method hitting only");
        RngStream rng(a.c.seed, derive_stream(a.c.seed, {0xCA}));
        HittingParams hp;
        hp.n_walks = a.n;
        const auto e = cap_hitting(k, BallTarget(PointD(a.d), a.r), rng, hp);
        rows.push_back({"hitting", 0.0, e.value, e.std_error, e.n_samples});
    } else {
        require(a.t > 0.0 && a.r > 0.0, "--t and --r must be > 0");
        std::vector<std::vector<Row>> per(a.paths);
        parallel_for(a.paths, a.c.n_workers(), [&](std::size_t i) {
            RngStream path_rng(a.c.seed, derive_stream(a.c.seed, {0xCA, i, 0}));
            RngStream est_rng(a.c.seed, derive_stream(a.c.seed, {0xCA, i, 1}));
            const auto path = sample_brownian(path_rng, PointD(a.d), a.t, default_step(a.r));
            if (a.method == "hitting" || all) {
                const Sausage s(0, path, a.r);
                const auto e = cap_hitting(k, SausageTarget(s), est_rng, sausage_hitting_params(a.r, a.n));
                per[i].push_back({"hitting", a.t, e.value, e.std_error, e.n_samples});
            }
            if (a.method == "energy" || all) {
                const auto e = cap_energy_lower(k, path, a.r, a.n, est_rng);
                per[i].push_back({"energy_lower", a.t, e.value, e.std_error, e.n_samples});
            }
            if (a.method == "zt" || (all && a.d == 4 && a.r == 1.0)) {
                require(a.d == 4 && a.r == 1.0, "the zt bound needs d = 4 and r = 1");
                const auto z = cap_zt_upper(k, path, a.quad_step);
                per[i].push_back({"zt_upper", a.t, z.estimate.value, z.estimate.std_error,
                                  z.n_candidates});
            }
        });
        for (auto& v : per) rows.insert(rows.end(), v.begin(), v.end());
    }
    Sink s(a.c.out);
    s.out() << "method,d,t,r,value,std_error,n\n";
    for (const auto& row : rows)
        s.out() << row.method << ',' << a.d << ',' << fmt(row.t) << ',' << fmt(a.r) << ','
                << fmt(row.value) << ',' << fmt(row.se) << ',' << row.n << '\n';
    Json j;
    j["command"] = "cap-estimate";
    j["shape"] = a.shape;
    j["d"] = a.d;
    j["r"] = a.r;
    j["kappa"] = k.kappa;
    j["rows"] = rows.size();
    write_json(a.c.json, j);
    return kExitOk;
}

// --- moments / tail -------------------------------------------------------------------------

struct MomentArgs {
    Common c;
    int d = 5;
    std::vector<double> t{8.0};
    double r = 1.0;
    std::size_t paths = 500;
    std::size_t walks = 1000;
    double confine_cb = 0.0;
};

int run_moments(const MomentArgs& a) {
    check_run_dimension(a.d);
    require(a.paths >= 2, "--paths must be >= 2");
    Sink s(a.c.out);
    s.out() << "d,t,r,n_paths,n_accepted,mean_cap,mean_cap_se,second_moment,second_moment_se,"
               "fourth_moment,fourth_moment_se,p_confined,p_confined_se\n";
    Json rows = Json::array();
    for (double t : a.t) {
        MomentParams p;
        p.n_walks = a.walks;
        p.seed = a.c.seed;
        p.workers = a.c.n_workers();
        if (a.confine_cb > 0.0) p.confine_cb = a.confine_cb;
        const auto m = moment_report(a.d, t, a.r, a.paths, p);
        s.out() << a.d << ',' << fmt(t) << ',' << fmt(a.r) << ',' << m.n_paths << ','
                << m.n_accepted << ',' << fmt(m.mean_cap) << ',' << fmt(m.mean_cap_se) << ','
                << fmt(m.second_moment) << ',' << fmt(m.second_moment_se) << ','
                << fmt(m.fourth_moment) << ',' << fmt(m.fourth_moment_se) << ','
                << fmt(m.p_confined) << ',' << fmt(m.p_confined_se) << '\n';
        const double growth = a.d == 4 ? t / std::log(t) : t;
        rows.push_back({{"t", t}, {"mean_cap", m.mean_cap}, {"mean_over_growth", m.mean_cap / growth}});
    }
    Json j;
    j["command"] = "moments";
    j["d"] = a.d;
    j["r"] = a.r;
    j["rows"] = rows;
    write_json(a.c.json, j);
    return kExitOk;
}

struct TailArgs {
    Common c;
    int d = 5;
    double t = 8.0, r = 1.0;
    std::size_t paths = 10000;
    std::size_t walks = 300;
    std::vector<double> j{2.0, 3.0, 4.0, 5.0};
};

int run_tail(const TailArgs& a) {
    check_run_dimension(a.d);
    MomentParams p;
    p.n_walks = a.walks;
    p.seed = a.c.seed;
    p.workers = a.c.n_workers();
    const auto rep = tail_report(a.d, a.t, a.r, a.paths, a.j, p);
    Sink s(a.c.out);
    s.out() << "j,threshold,count,exceedance,ci_lo,ci_hi\n";
    for (const auto& row : rep.rows)
        s.out() << fmt(row.j) << ',' << fmt(row.threshold) << ',' << row.count << ','
                << fmt(row.exceedance) << ',' << fmt(row.ci_lo) << ',' << fmt(row.ci_hi) << '\n';
    Json j;
    j["command"] = "tail";
    j["d"] = a.d;
    j["t"] = a.t;
    j["r"] = a.r;
    j["n_paths"] = rep.n_paths;
    j["scale"] = rep.scale;
    j["slope"] = rep.slope;
    j["slope_se"] = rep.slope_se;
    j["slope_points"] = rep.slope_points;
    write_json(a.c.json, j);
    return kExitOk;
}

// --- percolate / coarse-grain ---------------------------------------------------------------

struct PercArgs {
    Common c;
    int d = 4;
    double lambda = 1.0, t = 1.0, r = 0.3, side = 4.0, margin = 0.0;
    std::size_t trials = 1;
};

int run_percolate(const PercArgs& a) {
    ConfigurationParams p;
    p.d = a.d;
    p.intensity = a.lambda;
    p.t = a.t;
    p.r = a.r;
    check_run_dimension(a.d);
    require(a.side > 0.0, "--side must be > 0");
    p.box = Aabb::cube(a.d, 0.0, a.side);
    p.margin = a.margin;
    struct Row {
        std::uint64_t seed;
        std::size_t n, edges, largest;
        std::optional<double> tau;
    };
    std::vector<Row> rows(a.trials);
    parallel_for(a.trials, a.c.n_workers(), [&](std::size_t k) {
        const std::uint64_t seed = trial_seed(a.c.seed, 0, k);
        const auto cfg = sample_configuration(p, seed);
        const auto g = build_timed_graph(cfg);
        const auto sizes = component_sizes(g, a.t);
        rows[k] = {seed, cfg.sausages.size(), g.edges.size(), sizes.empty() ? 0 : sizes.front(),
                   crossing_time(g)};
    });
    Sink s(a.c.out);
    s.out() << "trial,seed,d,lambda,t,r,side,n_sausages,n_edges,largest_component,tau_star\n";
    std::size_t crossed = 0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto& row = rows[k];
        crossed += row.tau.has_value();
        s.out() << k << ',' << row.seed << ',' << a.d << ',' << fmt(a.lambda) << ',' << fmt(a.t)
                << ',' << fmt(a.r) << ',' << fmt(a.side) << ',' << row.n << ',' << row.edges << ','
                << row.largest << ',' << (row.tau ? fmt(*row.tau) : "NONE") << '\n';
    }
    Json j;
    j["command"] = "percolate";
    j["trials"] = a.trials;
    j["crossed"] = crossed;
    write_json(a.c.json, j);
    return kExitOk;
}

struct CoarseArgs {
    Common c;
    int d = 4;
    double lambda = 1.0, t = 1.0, r = 0.3, c_b = 2.0;
    int window = 3;
    double cap_threshold = -1.0;
    std::size_t walks = 300;
    std::size_t pilot = 200;
    int contours = 0;
};

int run_coarse(const CoarseArgs& a) {
    check_run_dimension(a.d);
    Json j;
    j["command"] = "coarse-grain";
    if (a.contours > 0) {
        require(a.contours >= 4 && a.contours <= 9, "--contours must be in [4, 9]");
        Sink s(a.c.out);
        s.out() << "N,count,bound\n";
        Json rows = Json::array();
        for (int n = 4; n <= a.contours; ++n) {
            const auto cnt = count_star_contours(n);
            const double bound = n * std::pow(7.0, n);
            s.out() << n << ',' << cnt << ',' << fmt(bound) << '\n';
            rows.push_back({{"N", n}, {"count", cnt}, {"bound", bound}});
        }
        j["contours"] = rows;
        write_json(a.c.json, j);
        return kExitOk;
    }
    require(a.window >= 1, "--window must be >= 1");
    double threshold = a.cap_threshold;
    if (threshold < 0.0) {
        MomentParams mp;
        mp.n_walks = a.walks;
        mp.seed = derive_stream(a.c.seed, {0x9E});
        mp.workers = a.c.n_workers();
        threshold = median(sample_sausage_caps(a.d, a.t / 2.0, a.r, a.pilot, mp));
    }
    const double rad = a.c_b * std::sqrt(a.t);
    ConfigurationParams p;
    p.d = a.d;
    p.intensity = a.lambda;
    p.t = a.t;
    p.r = a.r;
    p.box = Aabb::cube(a.d, -rad, rad);
    for (int k = 0; k < 2; ++k) {
        p.box.lo[k] = -(2.0 * a.window + 1.0) * rad;
        p.box.hi[k] = (2.0 * a.window + 1.0) * rad;
    }
    const auto cfg = sample_configuration(p, a.c.seed);
    const auto g = build_timed_graph(cfg);
    GoodParams gp;
    gp.c_b = a.c_b;
    gp.cap_threshold = threshold;
    gp.n_walks = a.walks;
    gp.seed = a.c.seed;
    const auto good = classify_good(cfg, gp);
    const auto gpg = good_point_graph(cfg, g, good, a.c_b, a.window);
    const auto res = coarse_grain_explore(gpg, a.window);
    Sink s(a.c.out);
    s.out() << "n,kind,cluster_size,dismissed_size,i_n,last_point\n";
    for (const auto& st : res.trace)
        s.out() << st.n << ',' << to_string(st.kind) << ',' << st.c.size() << ',' << st.dismissed.size()
                << ',' << st.i_n << ',' << (st.e.empty() ? std::string("NONE") : std::to_string(st.e.back()))
                << '\n';
    std::size_t n_good = 0;
    for (bool b : good) n_good += b;
    j["n_sausages"] = cfg.sausages.size();
    j["n_good"] = n_good;
    j["good_in_window"] = gpg.points.size();
    j["cap_threshold"] = threshold;
    j["certificate"] = res.certificate;
    j["cluster_size"] = res.cluster.size();
    write_json(a.c.json, j);
    return kExitOk;
}

// --- gw -------------------------------------------------------------------------------------

struct GwArgs {
    Common c;
    std::string kernel_in, kernel_out;
    double poisson = -1.0;
    int d = 5;
    double t = 1.0, r = 0.1, lambda = 1.0, q = 0.95;
    std::size_t outer = 100, inner = 200, walks = 300;
    std::uint32_t max_types = 32;
    std::size_t runs = 1000;
    std::uint32_t max_gen = 100;
    std::uint32_t root = 0;
    std::uint32_t k_max = 60;
};

int run_gw(const GwArgs& a) {
    OffspringKernel kern;
    if (a.poisson >= 0.0) {
        kern = OffspringKernel::from_matrix(1, {a.poisson});
    } else if (!a.kernel_in.empty()) {
        std::ifstream in(a.kernel_in, std::ios::binary);
        if (!in) throw ConfigError("cannot open kernel '" + a.kernel_in + "'");
        kern = read_kernel_csv(in);
    } else {
        KernelParams p;
        p.d = a.d;
        p.t = a.t;
        p.r = a.r;
        p.lambda = a.lambda;
        p.q = a.q;
        p.n_outer = a.outer;
        p.n_inner = a.inner;
        p.n_walks = a.walks;
        p.max_types = a.max_types;
        p.seed = a.c.seed;
        p.workers = a.c.n_workers();
        kern = estimate_kernel(p);
    }
    if (!a.kernel_out.empty()) {
        Sink ks(a.kernel_out);
        write_kernel_csv(ks.out(), kern);
    }
    require(a.root < kern.n_types, "--root out of range");
    std::vector<GwResult> results(a.runs);
    parallel_for(a.runs, a.c.n_workers(), [&](std::size_t i) {
        RngStream rng(a.c.seed, derive_stream(a.c.seed, {0x6A, i}));
        results[i] = simulate_gw(kern, a.root, a.max_gen, rng);
    });
    Sink s(a.c.out);
    s.out() << "run,extinction_time,generations,escaped,final_population\n";
    std::size_t extinct = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& g = results[i];
        extinct += g.extinction_time.has_value();
        s.out() << i << ',' << (g.extinction_time ? std::to_string(*g.extinction_time) : "NONE") << ','
                << g.generations << ',' << (g.escaped ? 1 : 0) << ',' << g.totals.back() << '\n';
    }
    const auto series = series_check(kern, a.root, a.k_max);
    const auto ci = wilson_interval(extinct, a.runs);
    Json j;
    j["command"] = "gw";
    j["n_types"] = kern.n_types;
    j["runs"] = a.runs;
    j["extinct"] = extinct;
    j["extinction_frequency"] = double(extinct) / double(a.runs);
    j["extinction_ci"] = {ci.lo, ci.hi};
    j["series_verdict"] = to_string(series.verdict);
    j["series_ratio"] = series.ratio;
    j["series_partial_sum"] = series.partial_sums.back();
    write_json(a.c.json, j);
    return kExitOk;
}

// --- tc-sweep -------------------------------------------------------------------------------

struct SweepArgs {
    std::string config;
    std::uint64_t seed = 0;
    bool seed_set = false;
    unsigned workers = 0;
};

int run_sweep(const SweepArgs& a) {
    ExperimentConfig cfg = load_config(a.config);
    if (a.seed_set) cfg.seed = a.seed;
    const unsigned workers = a.workers > 0 ? a.workers : default_workers();
    const auto res = run_experiment(cfg, workers);
    write_results(cfg, res);
    for (const auto& e : res.estimates)
        std::cerr << "r=" << e.r << " L=" << e.box_side << " median=" << e.summary.median << " ["
                  << e.summary.ci.lo << ", " << e.summary.ci.hi << "] none=" << e.summary.n_none
                  << "/" << e.tau.size() << " " << to_string(e.summary.flag) << '\n';
    for (std::size_t i = 0; i < res.fits.size(); ++i) {
        if (!res.fits[i]) continue;
        const auto& f = *res.fits[i];
        std::cerr << "L=" << cfg.box_sides[i] << " " << to_string(f.model) << " amplitude=" << f.amplitude;
        if (f.model == ScalingModel::power_law)
            std::cerr << " exponent=" << f.exponent << " +- " << f.exponent_se;
        std::cerr << '\n';
    }
    if (res.underpowered) {
        std::cerr << "wsperc: UNDERPOWERED (more than half of the trials in some cell never crossed)\n";
        return kExitUnderpowered;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wiener-sausage continuum percolation toolkit"};
    app.require_subcommand(1);

    CapArgs cap;
    auto* c_cap = app.add_subcommand("cap-estimate", "Capacity of a ball or of random Wiener sausages");
    add_common(c_cap, cap.c);
    c_cap->add_option("--shape", cap.shape, "ball | sausage")->capture_default_str();
    c_cap->add_option("--method", cap.method, "hitting | energy | zt | all")->capture_default_str();
    c_cap->add_option("--d", cap.d)->capture_default_str();
    c_cap->add_option("--t", cap.t, "Sausage horizon")->capture_default_str();
    c_cap->add_option("--r", cap.r, "Tube or ball radius")->capture_default_str();
    c_cap->add_option("--n", cap.n, "Walks or pairs per estimate")->capture_default_str();
    c_cap->add_option("--paths", cap.paths, "Independent sausages")->capture_default_str();
    c_cap->add_option("--quad-step", cap.quad_step, "Quadrature step of the zt bound")->capture_default_str();

    MomentArgs mom;
    auto* c_mom = app.add_subcommand("moments", "Capacity moments of W^{0,r}_{[0,t]}");
    add_common(c_mom, mom.c);
    c_mom->add_option("--d", mom.d)->capture_default_str();
    c_mom->add_option("--t", mom.t, "One or more horizons")->delimiter(',');
    c_mom->add_option("--r", mom.r)->capture_default_str();
    c_mom->add_option("--paths", mom.paths)->capture_default_str();
    c_mom->add_option("--walks", mom.walks)->capture_default_str();
    c_mom->add_option("--confine-cb", mom.confine_cb, "Keep only sausages inside B(0, c_B sqrt(t))");

    TailArgs tail;
    auto* c_tail = app.add_subcommand("tail", "Empirical capacity exceedance at j * scale");
    add_common(c_tail, tail.c);
    c_tail->add_option("--d", tail.d)->capture_default_str();
    c_tail->add_option("--t", tail.t)->capture_default_str();
    c_tail->add_option("--r", tail.r)->capture_default_str();
    c_tail->add_option("--paths", tail.paths)->capture_default_str();
    c_tail->add_option("--walks", tail.walks)->capture_default_str();
    c_tail->add_option("--j", tail.j, "Threshold multiples")->delimiter(',');

    PercArgs perc;
    auto* c_perc = app.add_subcommand("percolate", "Sample configurations and report crossing times");
    add_common(c_perc, perc.c);
    c_perc->add_option("--d", perc.d)->capture_default_str();
    c_perc->add_option("--lambda", perc.lambda)->capture_default_str();
    c_perc->add_option("--t", perc.t)->capture_default_str();
    c_perc->add_option("--r", perc.r)->capture_default_str();
    c_perc->add_option("--side", perc.side, "Box side (absolute units)")->capture_default_str();
    c_perc->add_option("--margin", perc.margin)->capture_default_str();
    c_perc->add_option("--trials", perc.trials)->capture_default_str();

    CoarseArgs coarse;
    auto* c_coarse = app.add_subcommand("coarse-grain", "Good-box exploration and contour counts");
    add_common(c_coarse, coarse.c);
    c_coarse->add_option("--d", coarse.d)->capture_default_str();
    c_coarse->add_option("--lambda", coarse.lambda)->capture_default_str();
    c_coarse->add_option("--t", coarse.t)->capture_default_str();
    c_coarse->add_option("--r", coarse.r)->capture_default_str();
    c_coarse->add_option("--c-b", coarse.c_b)->capture_default_str();
    c_coarse->add_option("--window", coarse.window)->capture_default_str();
    c_coarse->add_option("--cap-threshold", coarse.cap_threshold,
                         "Good-point capacity threshold (default: pilot median)");
    c_coarse->add_option("--walks", coarse.walks)->capture_default_str();
    c_coarse->add_option("--pilot", coarse.pilot, "Pilot sausages for the median threshold")->capture_default_str();
    c_coarse->add_option("--contours", coarse.contours, "Print *-contour counts for N = 4..value");

    GwArgs gw;
    auto* c_gw = app.add_subcommand("gw", "Offspring kernel, Galton-Watson runs and series check");
    add_common(c_gw, gw.c);
    c_gw->add_option("--kernel", gw.kernel_in, "Read the kernel CSV instead of estimating");
    c_gw->add_option("--write-kernel", gw.kernel_out, "Write the kernel CSV");
    c_gw->add_option("--poisson", gw.poisson, "Single-type Poisson offspring with this mean");
    c_gw->add_option("--d", gw.d)->capture_default_str();
    c_gw->add_option("--t", gw.t)->capture_default_str();
    c_gw->add_option("--r", gw.r)->capture_default_str();
    c_gw->add_option("--lambda", gw.lambda)->capture_default_str();
    c_gw->add_option("--q", gw.q)->capture_default_str();
    c_gw->add_option("--outer", gw.outer)->capture_default_str();
    c_gw->add_option("--inner", gw.inner)->capture_default_str();
    c_gw->add_option("--walks", gw.walks)->capture_default_str();
    c_gw->add_option("--max-types", gw.max_types, "Truncation J + 1; larger classes go to the tail (0: observed)")
        ->capture_default_str();
    c_gw->add_option("--runs", gw.runs)->capture_default_str();
    c_gw->add_option("--max-gen", gw.max_gen)->capture_default_str();
    c_gw->add_option("--root", gw.root)->capture_default_str();
    c_gw->add_option("--k-max", gw.k_max, "Terms of the series check")->capture_default_str();

    SweepArgs sweep;
    auto* c_sweep = app.add_subcommand("tc-sweep", "Critical-time sweep over r from a config file");
    c_sweep->add_option("--config", sweep.config, "Flat key = value experiment file")->required();
    auto* seed_opt = c_sweep->add_option("--seed", sweep.seed, "Override the config seed");
    c_sweep->add_option("--workers", sweep.workers, "Worker threads (default: WORKERS or all cores)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }
    sweep.seed_set = seed_opt->count() > 0;

    try {
        if (c_cap->parsed()) return run_cap(cap);
        if (c_mom->parsed()) return run_moments(mom);
        if (c_tail->parsed()) return run_tail(tail);
        if (c_perc->parsed()) return run_percolate(perc);
        if (c_coarse->parsed()) return run_coarse(coarse);
        if (c_gw->parsed()) return run_gw(gw);
        if (c_sweep->parsed()) return run_sweep(sweep);
    } catch (const ConfigError& e) {
        std::cerr << "wsperc: configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const IoError& e) {
        std::cerr << "wsperc: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "wsperc: " << e.what() << '\n';
        return kExitIo;
    }
    return kExitOk;
}
