#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "wsperc/branching.hpp"
#include "wsperc/capacity.hpp"
#include "wsperc/error.hpp"
#include "wsperc/harness.hpp"
#include "wsperc/percolation.hpp"

namespace py = pybind11;
using namespace wsperc;

namespace {

py::dict estimate_dict(const CapacityEstimate& e) {
    py::dict d;
    d["value"] = e.value;
    d["std_error"] = e.std_error;
    d["method"] = to_string(e.method);
    d["n"] = e.n_samples;
    return d;
}

OffspringKernel kernel_from(const std::vector<std::vector<double>>& m) {
    std::vector<double> flat;
    for (const auto& row : m) {
        if (row.size() != m.size()) throw ConfigError("kernel matrix must be square");
        flat.insert(flat.end(), row.begin(), row.end());
    }
    return OffspringKernel::from_matrix(static_cast<std::uint32_t>(m.size()), flat);
}

}  // namespace

PYBIND11_MODULE(_wsperc, m) {
    m.doc() = "Wiener-sausage continuum percolation toolkit";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ExplosionError>(m, "ExplosionError", PyExc_OverflowError);

    m.def("ball_capacity", [](int d) { return make_green_kernel(d).kappa; }, py::arg("d"),
          "Capacity of the unit ball.");

    m.def(
        "cap_ball_hitting",
        [](int d, double radius, std::size_t n_walks, std::uint64_t seed) {
            const GreenKernel k = make_green_kernel(d);
            RngStream rng(seed, derive_stream(seed, {0xCA}));
            HittingParams hp;
            hp.n_walks = n_walks;
            return estimate_dict(cap_hitting(k, BallTarget(PointD(d), radius), rng, hp));
        },
        py::arg("d"), py::arg("radius") = 1.0, py::arg("n_walks") = 10000, py::arg("seed") = 1);

    m.def(
        "sausage_caps",
        [](int d, double t, double r, std::size_t n_paths, std::size_t n_walks, std::uint64_t seed,
           unsigned workers) {
            MomentParams p;
            p.n_walks = n_walks;
            p.seed = seed;
            p.workers = workers;
            py::gil_scoped_release release;
            return sample_sausage_caps(d, t, r, n_paths, p);
        },
        py::arg("d"), py::arg("t"), py::arg("r"), py::arg("n_paths"), py::arg("n_walks") = 1000,
        py::arg("seed") = 1, py::arg("workers") = 1,
        "Hitting-capacity estimates of independent sausages W^{0,r}_{[0,t]}.");

    m.def(
        "crossing_time",
        [](int d, double lambda, double t, double r, double side, std::uint64_t seed) -> py::object {
            ConfigurationParams p;
            p.d = d;
            p.intensity = lambda;
            p.t = t;
            p.r = r;
            p.box = Aabb::cube(d, 0.0, side);
            std::optional<double> tau;
            {
                py::gil_scoped_release release;
                tau = crossing_time(build_timed_graph(sample_configuration(p, seed)));
            }
            if (!tau) return py::none();
            return py::float_(*tau);
        },
        py::arg("d"), py::arg("lambda_"), py::arg("t"), py::arg("r"), py::arg("side"),
        py::arg("seed") = 1, "Left-right crossing time of one sampled box, or None.");

    m.def(
        "bottleneck",
        [](std::uint32_t n, const std::vector<std::tuple<std::uint32_t, std::uint32_t, double>>& edges)
            -> py::object {
            TimedGraph g;
            g.n_sausages = n;
            for (const auto& [u, v, tau] : edges) {
                if (u >= n + 2 || v >= n + 2) throw ConfigError("edge endpoint out of range");
                g.edges.push_back({u, v, tau});
            }
            const auto tau = crossing_time(g);
            if (!tau) return py::none();
            return py::float_(*tau);
        },
        py::arg("n_sausages"), py::arg("edges"),
        "Minimax LEFT-RIGHT value; LEFT is node n_sausages, RIGHT is n_sausages + 1.");

    m.def("count_star_contours", &count_star_contours, py::arg("n"));
    m.def("count_star_contours_bruteforce", &count_star_contours_bruteforce, py::arg("n"));

    m.def(
        "simulate_gw",
        [](const std::vector<std::vector<double>>& kernel, std::uint32_t root, std::uint32_t max_gen,
           std::uint64_t seed, std::size_t runs) {
            const auto k = kernel_from(kernel);
            RngStream rng(seed, derive_stream(seed, {0x6A}));
            std::vector<py::object> out;
            for (std::size_t i = 0; i < runs; ++i) {
                const auto res = simulate_gw(k, root, max_gen, rng);
                out.push_back(res.extinction_time ? py::object(py::int_(*res.extinction_time)) : py::none());
            }
            return out;
        },
        py::arg("kernel"), py::arg("root") = 0, py::arg("max_gen") = 100, py::arg("seed") = 1,
        py::arg("runs") = 1, "Extinction generation of each run, None for survivors.");

    m.def(
        "series_check",
        [](const std::vector<std::vector<double>>& kernel, std::uint32_t i, std::uint32_t k_max) {
            const auto res = series_check(kernel_from(kernel), i, k_max);
            py::dict d;
            d["verdict"] = to_string(res.verdict);
            d["ratio"] = res.ratio;
            d["partial_sums"] = res.partial_sums;
            return d;
        },
        py::arg("kernel"), py::arg("i") = 0, py::arg("k_max") = 60);

    m.def(
        "fit_scaling",
        [](const std::vector<double>& r, const std::vector<double>& t, const std::string& model) {
            const auto f = fit_scaling(r, t, parse_model(model, 5));
            py::dict d;
            d["model"] = to_string(f.model);
            d["amplitude"] = f.amplitude;
            d["amplitude_se"] = f.amplitude_se;
            d["exponent"] = f.exponent;
            d["exponent_se"] = f.exponent_se;
            d["residuals"] = f.residuals;
            return d;
        },
        py::arg("r"), py::arg("t"), py::arg("model") = "power_law");

    m.def(
        "run_experiment",
        [](const std::string& config_text, unsigned workers) {
            std::istringstream in(config_text);
            const ExperimentConfig cfg = parse_config(in);
            ExperimentResult res;
            {
                py::gil_scoped_release release;
                res = run_experiment(cfg, workers);
            }
            std::ostringstream csv, js;
            write_trials_csv(csv, cfg, res);
            write_summary_json(js, cfg, res);
            return py::make_tuple(csv.str(), js.str());
        },
        py::arg("config_text"), py::arg("workers") = 1,
        "Runs a tc sweep from config text; returns (csv, json) without touching the filesystem.");
}
