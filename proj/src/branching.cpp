#include "wsperc/branching.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "wsperc/capacity.hpp"
#include "wsperc/error.hpp"
#include "wsperc/parallel.hpp"
#include "wsperc/percolation.hpp"
#include "wsperc/stats.hpp"

namespace wsperc {

double ClassIndex::cap_scale() const { return capacity_scale(d, t, r); }

std::uint32_t ClassIndex::of(double cap3r, double outradius2r) const {
    const auto j1 = static_cast<std::uint32_t>(std::max(0.0, std::floor(cap3r / cap_scale())));
    if (d != 4) return j1;
    require(out_bins >= 1, "ClassIndex: out_bins must be >= 1");
    const auto j2 = std::min<std::uint32_t>(
        static_cast<std::uint32_t>(std::max(0.0, std::floor(outradius2r / t))),
        static_cast<std::uint32_t>(out_bins - 1));
    return j1 * static_cast<std::uint32_t>(out_bins) + j2;
}

std::pair<std::uint32_t, std::uint32_t> ClassIndex::split(std::uint32_t type) const {
    if (d != 4) return {type, 0};
    const auto b = static_cast<std::uint32_t>(out_bins);
    return {type / b, type % b};
}

// --- kernel ---------------------------------------------------------------------------------

double OffspringKernel::tail_mass(std::uint32_t i) const {
    if (tail_a <= 0.0) return 0.0;
    const double e = std::exp(-tail_decay);
    return tail_a * std::pow(double(i), tail_alpha) * std::pow(e, double(n_types)) / (1.0 - e);
}

std::vector<double> OffspringKernel::extended() const {
    const std::uint32_t n = n_types, m = n + 1;
    std::vector<double> ext(std::size_t(m) * m, 0.0);
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = 0; j < n; ++j) ext[std::size_t(i) * m + j] = at(i, j);
        ext[std::size_t(i) * m + n] = tail_mass(i);
    }
    // Tail parents behave like the first truncated class n, extrapolated along i^alpha.
    if (n > 0 && tail_a > 0.0) {
        const double grow = std::pow(double(n) / std::max(1.0, double(n - 1)), tail_alpha);
        for (std::uint32_t j = 0; j < n; ++j) ext[std::size_t(n) * m + j] = at(n - 1, j) * grow;
        ext[std::size_t(n) * m + n] = tail_mass(n);
    }
    return ext;
}

OffspringKernel OffspringKernel::from_matrix(std::uint32_t n, std::vector<double> entries) {
    require(entries.size() == std::size_t(n) * n, "kernel: matrix size mismatch");
    for (double v : entries) require(std::isfinite(v) && v >= 0.0, "kernel: entries must be finite and >= 0");
    OffspringKernel k;
    k.n_types = n;
    k.mean = entries;
    k.k = std::move(entries);
    k.std_error.assign(k.k.size(), 0.0);
    k.n_outer.assign(n, 0);
    k.reliable.assign(k.k.size(), 1);
    return k;
}

namespace {

struct OuterSample {
    std::uint32_t type = 0;
    std::map<std::uint32_t, double> counts;  ///< conditional mean estimate per neighbour class
};

void fit_tail(OffspringKernel& k) {
    k.tail_decay = k.t / 2.0;
    if (!(k.tail_decay > 0.0)) k.tail_decay = 1.0;
    std::vector<double> xs, ys;
    for (std::uint32_t i = 1; i < k.n_types; ++i)
        for (std::uint32_t j = 1; j < k.n_types; ++j)
            if (k.at(i, j) > 0.0) {
                xs.push_back(std::log(double(i)));
                ys.push_back(std::log(k.at(i, j)) + k.tail_decay * j);
            }
    const bool distinct = !xs.empty() && std::any_of(xs.begin(), xs.end(), [&](double x) { return x != xs[0]; });
    if (distinct) {
        const LinearFit f = least_squares(xs, ys);
        k.tail_alpha = f.slope;
        k.tail_a = std::exp(f.intercept);
        return;
    }
    k.tail_alpha = 2.0;
    k.tail_a = 0.0;
    if (k.n_types == 0) return;
    const std::uint32_t last = k.n_types - 1;
    for (std::uint32_t i = 0; i < k.n_types; ++i)
        k.tail_a = std::max(k.tail_a, k.at(i, last) * std::exp(k.tail_decay * last) /
                                          std::pow(std::max(1.0, double(i)), k.tail_alpha));
}

}  // namespace

OffspringKernel estimate_kernel(const KernelParams& p) {
    check_run_dimension(p.d);
    require(p.q > 0.5 && p.q < 1.0, "estimate_kernel: q must be in (0.5, 1)");
    require(p.n_outer >= 100, "estimate_kernel: n_outer must be >= 100");
    require(p.lambda >= 0.0, "estimate_kernel: lambda must be >= 0");
    require(p.t > 0.0 && p.r > 0.0, "estimate_kernel: t and r must be > 0");
    require(p.n_inner >= 1 && p.n_walks >= 1, "estimate_kernel: need inner draws and walks");
    const GreenKernel green = make_green_kernel(p.d);
    const ClassIndex ci{p.d, p.t, p.r, p.out_bins};
    const double step = p.step > 0.0 ? p.step : default_step(p.r);
    const int d = p.d;

    auto make_path = [&](RngStream& rng, const PointD& start) {
        return p.frozen ? BrownianPath::frozen(start, p.t, step) : sample_brownian(rng, start, p.t, step);
    };
    auto classify = [&](const Sausage& s, RngStream& rng) {
        const Sausage wide = s.with_radius(3.0 * p.r);
        const double cap = cap_hitting(green, SausageTarget(wide), rng,
                                       sausage_hitting_params(3.0 * p.r, p.n_walks)).value;
        return ci.of(cap, s.path().max_excursion() + 2.0 * p.r);
    };

    std::vector<OuterSample> outer(p.n_outer);
    parallel_for(p.n_outer, p.workers, [&](std::size_t k) {
        RngStream path_rng(p.seed, derive_stream(p.seed, {0xB0, k, 0}));
        RngStream walk_rng(p.seed, derive_stream(p.seed, {0xB0, k, 1}));
        RngStream inner_rng(p.seed, derive_stream(p.seed, {0xB0, k, 2}));
        const Sausage w0(0, make_path(path_rng, PointD(d)), p.r);
        OuterSample out;
        out.type = classify(w0, walk_rng);
        if (p.lambda > 0.0) {
            const Aabb b0 = w0.path().bounds();
            for (std::size_t m = 0; m < p.n_inner; ++m) {
                // Neighbour displacement path first, then a start point uniform over every
                // position from which its tube could reach W^0.
                const BrownianPath delta = make_path(inner_rng, PointD(d));
                const Aabb bd = delta.bounds();
                PointD y(d);
                double vol = 1.0;
                for (int c = 0; c < d; ++c) {
                    const double lo = b0.lo[c] - bd.hi[c] - 2.0 * p.r;
                    const double hi = b0.hi[c] - bd.lo[c] + 2.0 * p.r;
                    vol *= hi - lo;
                    y[c] = inner_rng.uniform(lo, hi);
                }
                const Sausage wy(1, delta.translated(y), p.r);
                if (!connection_time(w0, wy)) continue;
                out.counts[classify(wy, walk_rng)] += vol;
            }
            for (auto& [j, v] : out.counts) v *= p.lambda / double(p.n_inner);
        }
        outer[k] = std::move(out);
    });

    std::uint32_t observed = 0;
    for (const auto& o : outer) {
        observed = std::max(observed, o.type);
        for (const auto& [j, v] : o.counts) observed = std::max(observed, j);
    }
    OffspringKernel kern;
    kern.d = p.d;
    kern.t = p.t;
    kern.r = p.r;
    kern.lambda = p.lambda;
    kern.q = p.q;
    kern.n_types = p.max_types > 0 ? p.max_types : observed + 1;
    const std::uint32_t n = kern.n_types;
    kern.k.assign(std::size_t(n) * n, 0.0);
    kern.mean.assign(kern.k.size(), 0.0);
    kern.std_error.assign(kern.k.size(), 0.0);
    kern.reliable.assign(kern.k.size(), 0);
    kern.n_outer.assign(n, 0);

    std::vector<std::vector<const OuterSample*>> rows(n);
    for (const auto& o : outer)
        if (o.type < n) rows[o.type].push_back(&o);
    for (std::uint32_t i = 0; i < n; ++i) {
        kern.n_outer[i] = rows[i].size();
        if (rows[i].empty()) continue;
        for (std::uint32_t j = 0; j < n; ++j) {
            std::vector<double> v;
            RunningStats s;
            for (const auto* o : rows[i]) {
                const auto it = o->counts.find(j);
                v.push_back(it == o->counts.end() ? 0.0 : it->second);
                s.add(v.back());
            }
            const std::size_t idx = std::size_t(i) * n + j;
            kern.k[idx] = quantile(v, p.q);
            kern.mean[idx] = s.mean();
            kern.std_error[idx] = s.std_error();
            kern.reliable[idx] = rows[i].size() >= p.min_outer ? 1 : 0;
        }
    }
    fit_tail(kern);
    return kern;
}

// --- CSV ------------------------------------------------------------------------------------

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& s) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ConfigError("kernel CSV: bad number '" + s + "'");
    }
    if (pos != s.size()) throw ConfigError("kernel CSV: bad number '" + s + "'");
    return v;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

const char* kEntryHeader = "i,j,k,mean,std_error,n_outer,reliable";

}  // namespace

void write_kernel_csv(std::ostream& out, const OffspringKernel& k) {
    out << "key,value\n";
    out << "d," << k.d << "\n";
    out << "t," << fmt(k.t) << "\n";
    out << "r," << fmt(k.r) << "\n";
    out << "lambda," << fmt(k.lambda) << "\n";
    out << "q," << fmt(k.q) << "\n";
    out << "n_types," << k.n_types << "\n";
    out << "tail_a," << fmt(k.tail_a) << "\n";
    out << "tail_alpha," << fmt(k.tail_alpha) << "\n";
    out << "tail_decay," << fmt(k.tail_decay) << "\n";
    out << kEntryHeader << "\n";
    for (std::uint32_t i = 0; i < k.n_types; ++i)
        for (std::uint32_t j = 0; j < k.n_types; ++j) {
            const std::size_t idx = std::size_t(i) * k.n_types + j;
            out << i << ',' << j << ',' << fmt(k.k[idx]) << ',' << fmt(k.mean[idx]) << ','
                << fmt(k.std_error[idx]) << ',' << k.n_outer[i] << ','
                << int(k.reliable[idx]) << "\n";
        }
}

OffspringKernel read_kernel_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "key,value")
        throw ConfigError("kernel CSV: missing 'key,value' header");
    OffspringKernel k;
    std::map<std::string, std::string> meta;
    while (std::getline(in, line) && line != kEntryHeader) {
        const auto cells = split_csv(line);
        if (cells.size() != 2) throw ConfigError("kernel CSV: bad metadata line '" + line + "'");
        meta[cells[0]] = cells[1];
    }
    for (const char* key : {"d", "t", "r", "lambda", "q", "n_types", "tail_a", "tail_alpha", "tail_decay"})
        if (!meta.count(key)) throw ConfigError(std::string("kernel CSV: missing key ") + key);
    k.d = int(parse_double(meta["d"]));
    k.t = parse_double(meta["t"]);
    k.r = parse_double(meta["r"]);
    k.lambda = parse_double(meta["lambda"]);
    k.q = parse_double(meta["q"]);
    k.n_types = std::uint32_t(parse_double(meta["n_types"]));
    k.tail_a = parse_double(meta["tail_a"]);
    k.tail_alpha = parse_double(meta["tail_alpha"]);
    k.tail_decay = parse_double(meta["tail_decay"]);
    const std::size_t n = k.n_types;
    k.k.assign(n * n, 0.0);
    k.mean.assign(n * n, 0.0);
    k.std_error.assign(n * n, 0.0);
    k.reliable.assign(n * n, 0);
    k.n_outer.assign(n, 0);
    std::vector<char> seen(n * n, 0);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto c = split_csv(line);
        if (c.size() != 7) throw ConfigError("kernel CSV: bad entry line '" + line + "'");
        const auto i = std::size_t(parse_double(c[0])), j = std::size_t(parse_double(c[1]));
        if (i >= n || j >= n) throw ConfigError("kernel CSV: index out of range");
        const std::size_t idx = i * n + j;
        k.k[idx] = parse_double(c[2]);
        k.mean[idx] = parse_double(c[3]);
        k.std_error[idx] = parse_double(c[4]);
        k.n_outer[i] = std::uint64_t(parse_double(c[5]));
        k.reliable[idx] = std::uint8_t(parse_double(c[6]));
        if (!(std::isfinite(k.k[idx]) && k.k[idx] >= 0.0))
            throw ConfigError("kernel CSV: entries must be finite and >= 0");
        seen[idx] = 1;
    }
    if (std::count(seen.begin(), seen.end(), 0) != 0) throw ConfigError("kernel CSV: missing entries");
    return k;
}

// --- Galton-Watson --------------------------------------------------------------------------

GwResult simulate_gw(const OffspringKernel& kernel, std::uint32_t root_type,
                     std::uint32_t max_gen, RngStream& rng, std::uint64_t escape_population) {
    require(max_gen >= 1, "simulate_gw: max_gen must be >= 1");
    require(root_type < kernel.n_types, "simulate_gw: root type out of range");
    constexpr double kExplosion = 1e9;
    const auto ext = kernel.extended();
    const std::size_t m = std::size_t(kernel.n_types) + 1;
    std::vector<std::uint64_t> z(m, 0), next(m, 0);
    z[root_type] = 1;
    GwResult res;
    res.totals.push_back(1);
    std::vector<double> mean(m);
    for (std::uint32_t gen = 1; gen <= max_gen; ++gen) {
        std::fill(mean.begin(), mean.end(), 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            if (z[i] == 0) continue;
            for (std::size_t j = 0; j < m; ++j) mean[j] += double(z[i]) * ext[i * m + j];
        }
        double total_mean = 0.0;
        for (double v : mean) total_mean += v;
        if (total_mean > kExplosion)
            throw ExplosionError("simulate_gw: expected offspring exceeds 1e9");
        std::uint64_t total = 0;
        for (std::size_t j = 0; j < m; ++j) {
            next[j] = mean[j] > 0.0 ? rng.poisson(mean[j]) : 0;
            total += next[j];
        }
        z.swap(next);
        res.totals.push_back(total);
        res.generations = gen;
        if (total == 0) {
            res.extinction_time = gen;
            break;
        }
        if (total > escape_population) {
            res.escaped = true;
            break;
        }
    }
    return res;
}

std::string to_string(SeriesVerdict v) {
    switch (v) {
        case SeriesVerdict::convergent: return "CONVERGENT";
        case SeriesVerdict::divergent: return "DIVERGENT";
        case SeriesVerdict::inconclusive: return "INCONCLUSIVE";
    }
    return "unknown";
}

SeriesResult series_check(const OffspringKernel& kernel, std::uint32_t i, std::uint32_t k_max,
                          double budget) {
    require(k_max >= 1, "series_check: k_max must be >= 1");
    require(i < kernel.n_types, "series_check: type out of range");
    const auto ext = kernel.extended();
    const std::size_t m = std::size_t(kernel.n_types) + 1;
    std::vector<double> w(m, 1.0), nw(m);
    SeriesResult res;
    double sum = 0.0;
    for (std::uint32_t k = 0; k <= k_max; ++k) {
        if (k > 0) {
            for (std::size_t a = 0; a < m; ++a) {
                double s = 0.0;
                for (std::size_t b = 0; b < m; ++b) s += ext[a * m + b] * w[b];
                nw[a] = s;
            }
            w.swap(nw);
        }
        res.terms.push_back(w[i]);
        sum += w[i];
        res.partial_sums.push_back(sum);
        if (w[i] == 0.0) {
            res.verdict = SeriesVerdict::convergent;
            return res;
        }
        if (sum > budget) {
            res.verdict = SeriesVerdict::divergent;
            res.ratio = res.terms.size() > 1 ? w[i] / res.terms[res.terms.size() - 2] : 0.0;
            return res;
        }
    }
    const std::size_t n_fit = std::min<std::size_t>(10, res.terms.size());
    std::vector<double> xs, ys;
    for (std::size_t k = res.terms.size() - n_fit; k < res.terms.size(); ++k) {
        xs.push_back(double(k));
        ys.push_back(std::log(res.terms[k]));
    }
    res.ratio = n_fit >= 2 ? std::exp(least_squares(xs, ys).slope) : 0.0;
    if (res.ratio < 1.0 - 1e-3) res.verdict = SeriesVerdict::convergent;
    else if (res.ratio > 1.0 + 1e-3) res.verdict = SeriesVerdict::divergent;
    else res.verdict = SeriesVerdict::inconclusive;
    return res;
}

}  // namespace wsperc
