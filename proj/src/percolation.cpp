#include "wsperc/percolation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numbers>
#include <set>

#include "wsperc/capacity.hpp"
#include "wsperc/error.hpp"

namespace wsperc {

// --- configurations -------------------------------------------------------------------------

Configuration sample_configuration(const ConfigurationParams& p, std::uint64_t seed) {
    check_run_dimension(p.d);
    require(p.box.dim() == p.d, "configuration: box dimension mismatch");
    require(p.intensity > 0.0, "configuration: intensity must be > 0");
    require(p.t > 0.0 && p.r > 0.0, "configuration: t and r must be > 0");
    require(p.margin >= 0.0, "configuration: margin must be >= 0");
    Configuration cfg;
    cfg.box = p.box;
    cfg.sample_box = p.box.inflated(p.margin);
    cfg.intensity = p.intensity;
    cfg.t = p.t;
    cfg.r = p.r;
    cfg.step = p.step > 0.0 ? p.step : default_step(p.r);
    cfg.d = p.d;
    cfg.seed = seed;
    // Count by inversion and points drawn in sequence: equal seeds give nested clouds across
    // intensities.
    RngStream count_rng(seed, derive_stream(seed, {0, 0}));
    RngStream point_rng(seed, derive_stream(seed, {0, 1}));
    const std::uint64_t n =
        poisson_quantile(p.intensity * cfg.sample_box.volume(), count_rng.uniform());
    cfg.sausages.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        PointD x(p.d);
        for (int c = 0; c < p.d; ++c) x[c] = point_rng.uniform(cfg.sample_box.lo[c], cfg.sample_box.hi[c]);
        RngStream path_rng(seed, derive_stream(seed, {1, i}));
        cfg.sausages.emplace_back(static_cast<std::uint32_t>(i),
                                  sample_brownian(path_rng, x, p.t, cfg.step), p.r);
    }
    return cfg;
}

Configuration make_configuration(const Aabb& box, double t, double r,
                                 std::vector<Sausage> sausages) {
    Configuration cfg;
    cfg.box = box;
    cfg.sample_box = box;
    cfg.t = t;
    cfg.r = r;
    cfg.d = box.dim();
    for (const auto& s : sausages) {
        require(s.dim() == cfg.d, "configuration: sausage dimension mismatch");
        cfg.sample_box.expand(s.path().start().coords());
    }
    if (!sausages.empty()) cfg.step = sausages.front().path().step();
    cfg.sausages = std::move(sausages);
    return cfg;
}

Configuration truncated(const Configuration& cfg, double t_cut) {
    Configuration out = cfg;
    out.t = std::min(cfg.t, t_cut);
    for (auto& s : out.sausages) s = s.truncated(t_cut);
    return out;
}

// --- pairwise timing ------------------------------------------------------------------------

std::optional<double> connection_time(const Sausage& s1, const Sausage& s2) {
    if (s1.dim() != s2.dim()) throw ConfigError("connection_time: dimension mismatch");
    const double h1 = s1.horizon(), h2 = s2.horizon();
    if (std::fabs(h1 - h2) > 1e-9 * std::max({1.0, h1, h2}))
        throw ConfigError("connection_time: horizon mismatch");
    const double reach = s1.radius() + s2.radius();
    if (s1.tree().root_box_dist_sq(s2.tree()) > reach * reach) return std::nullopt;

    const ChainTree& t1 = s1.tree();
    const ChainTree& t2 = s2.tree();
    double best = std::numeric_limits<double>::infinity();
    for (std::uint32_t e = 0; e < t1.element_count(); ++e) {
        const double te = t1.elem_time(e);
        if (te >= best) break;
        const auto hit = t2.earliest_within(t1.elem_a(e), t1.elem_b(e), reach, best);
        if (hit) best = std::min(best, std::max(te, t2.elem_time(*hit)));
    }
    if (best == std::numeric_limits<double>::infinity()) return std::nullopt;
    return best;
}

std::optional<double> face_touch_time(const Sausage& s, double plane, int side) {
    const auto& path = s.path();
    const double r = s.radius();
    for (std::size_t k = 0; k < path.size(); ++k) {
        const double x = path.point(k)[0];
        if ((side < 0 && x <= plane + r) || (side > 0 && x >= plane - r)) return path.time(k);
    }
    return std::nullopt;
}

TimedGraph build_timed_graph(const Configuration& cfg) {
    TimedGraph g;
    const auto n = static_cast<std::uint32_t>(cfg.sausages.size());
    g.n_sausages = n;
    if (n == 0) return g;
    std::vector<Aabb> boxes;
    boxes.reserve(n);
    for (const auto& s : cfg.sausages) boxes.push_back(s.aabb());
    GridIndex grid(cfg.d, GridIndex::default_cell_size(boxes));
    for (std::uint32_t i = 0; i < n; ++i) grid.insert(i, boxes[i]);
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j : grid.candidates(boxes[i])) {
            if (j <= i || !boxes[i].overlaps(boxes[j])) continue;
            if (const auto tau = connection_time(cfg.sausages[i], cfg.sausages[j]))
                g.edges.push_back({i, j, *tau});
        }
        if (const auto tl = face_touch_time(cfg.sausages[i], cfg.box.lo[0], -1))
            g.edges.push_back({i, g.left(), *tl});
        if (const auto tr = face_touch_time(cfg.sausages[i], cfg.box.hi[0], +1))
            g.edges.push_back({i, g.right(), *tr});
    }
    return g;
}

// --- union-find and sweeps ------------------------------------------------------------------

UnionFind::UnionFind(std::size_t n) : parent_(n), rank_(n, 0) {
    for (std::size_t i = 0; i < n; ++i) parent_[i] = static_cast<std::uint32_t>(i);
}

std::uint32_t UnionFind::find(std::uint32_t a) {
    while (parent_[a] != a) {
        parent_[a] = parent_[parent_[a]];
        a = parent_[a];
    }
    return a;
}

bool UnionFind::unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
    return true;
}

std::optional<double> crossing_time(const TimedGraph& g) {
    std::vector<TimedEdge> edges = g.edges;
    std::sort(edges.begin(), edges.end(), [](const TimedEdge& a, const TimedEdge& b) {
        if (a.tau != b.tau) return a.tau < b.tau;
        if (a.u != b.u) return a.u < b.u;
        return a.v < b.v;
    });
    UnionFind uf(g.n_nodes());
    for (const auto& e : edges) {
        uf.unite(e.u, e.v);
        if (uf.find(g.left()) == uf.find(g.right())) return e.tau;
    }
    return std::nullopt;
}

bool crosses_by(const Configuration& cfg, double horizon) {
    const auto n = static_cast<std::uint32_t>(cfg.sausages.size());
    if (n == 0) return false;
    std::vector<Sausage> cut;
    cut.reserve(n);
    for (const auto& s : cfg.sausages) cut.push_back(horizon < s.horizon() ? s.truncated(horizon) : s);
    std::vector<Aabb> boxes;
    boxes.reserve(n);
    for (const auto& s : cut) boxes.push_back(s.aabb());
    GridIndex grid(cfg.d, GridIndex::default_cell_size(boxes));
    for (std::uint32_t i = 0; i < n; ++i) grid.insert(i, boxes[i]);
    const std::uint32_t left = n, right = n + 1;
    UnionFind uf(n + 2);
    for (std::uint32_t i = 0; i < n; ++i) {
        if (face_touch_time(cut[i], cfg.box.lo[0], -1)) uf.unite(i, left);
        if (face_touch_time(cut[i], cfg.box.hi[0], +1)) uf.unite(i, right);
    }
    if (uf.find(left) == uf.find(right)) return true;
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j : grid.candidates(boxes[i])) {
            if (j <= i || !boxes[i].overlaps(boxes[j]) || uf.find(i) == uf.find(j)) continue;
            if (connection_time(cut[i], cut[j])) {
                uf.unite(i, j);
                if (uf.find(left) == uf.find(right)) return true;
            }
        }
    }
    return false;
}

std::vector<std::vector<std::uint32_t>> explore_generations(const TimedGraph& g,
                                                            std::uint32_t root, double horizon) {
    if (root >= g.n_nodes()) throw ConfigError("explore_generations: root not in graph");
    std::vector<std::vector<std::uint32_t>> adj(g.n_nodes());
    for (const auto& e : g.edges) {
        if (e.tau > horizon) continue;
        adj[e.u].push_back(e.v);
        adj[e.v].push_back(e.u);
    }
    std::vector<char> seen(g.n_nodes(), 0);
    std::vector<std::vector<std::uint32_t>> layers{{root}};
    seen[root] = 1;
    while (true) {
        std::vector<std::uint32_t> next;
        for (std::uint32_t x : layers.back())
            for (std::uint32_t y : adj[x])
                if (!seen[y]) {
                    seen[y] = 1;
                    next.push_back(y);
                }
        if (next.empty()) break;
        std::sort(next.begin(), next.end());
        layers.push_back(std::move(next));
    }
    return layers;
}

std::vector<std::size_t> component_sizes(const TimedGraph& g, double horizon) {
    UnionFind uf(g.n_sausages);
    for (const auto& e : g.edges)
        if (e.tau <= horizon && e.v < g.n_sausages) uf.unite(e.u, e.v);
    std::map<std::uint32_t, std::size_t> counts;
    for (std::uint32_t i = 0; i < g.n_sausages; ++i) ++counts[uf.find(i)];
    std::vector<std::size_t> sizes;
    for (const auto& [root, c] : counts) sizes.push_back(c);
    std::sort(sizes.rbegin(), sizes.rend());
    return sizes;
}

std::vector<bool> classify_good(const Configuration& cfg, const GoodParams& p) {
    require(p.cap_threshold >= 0.0, "classify_good: cap_threshold must be >= 0");
    require(p.c_b > 0.0, "classify_good: c_B must be > 0");
    const double half = cfg.t / 2.0;
    const double confine = p.c_b * std::sqrt(half);
    std::vector<bool> good(cfg.sausages.size(), false);
    std::optional<GreenKernel> k;
    for (std::size_t i = 0; i < cfg.sausages.size(); ++i) {
        const Sausage h = cfg.sausages[i].truncated(half);
        if (h.outradius() > confine) continue;
        if (p.cap_threshold <= 0.0) {
            good[i] = true;
            continue;
        }
        if (!k) k = make_green_kernel(cfg.d);
        RngStream rng(p.seed, derive_stream(p.seed, {0x600D, cfg.sausages[i].id()}));
        const auto est = cap_hitting(*k, SausageTarget(h), rng,
                                     sausage_hitting_params(cfg.r, p.n_walks));
        good[i] = est.value >= p.cap_threshold;
    }
    return good;
}

// --- coarse graining ------------------------------------------------------------------------

GoodPointGraph good_point_graph(const Configuration& cfg, const TimedGraph& g,
                                const std::vector<bool>& good, double c_b, int window) {
    require(good.size() == cfg.sausages.size(), "good_point_graph: flag count mismatch");
    require(c_b > 0.0 && window >= 1, "good_point_graph: need c_B > 0 and window >= 1");
    const double rad = c_b * std::sqrt(cfg.t);
    const PointD centre = cfg.box.center();
    for (int k = 0; k < cfg.d; ++k) {
        const double ext = k < 2 ? (2.0 * window + 1.0) * rad : rad;
        if (centre[k] - ext < cfg.sample_box.lo[k] - 1e-12 ||
            centre[k] + ext > cfg.sample_box.hi[k] + 1e-12)
            throw ConfigError("coarse-grain window does not fit in the sampling box");
    }
    GoodPointGraph out;
    out.origin = centre;
    std::vector<std::int64_t> local(cfg.sausages.size(), -1);
    for (std::size_t i = 0; i < cfg.sausages.size(); ++i) {
        if (!good[i]) continue;
        const PointD x = cfg.sausages[i].path().start();
        Site z{int(std::lround((x[0] - centre[0]) / (2.0 * rad))),
               int(std::lround((x[1] - centre[1]) / (2.0 * rad)))};
        if (std::max(std::abs(z[0]), std::abs(z[1])) > window) continue;
        PointD c = centre;
        c[0] += 2.0 * rad * z[0];
        c[1] += 2.0 * rad * z[1];
        if (distance(x, c) >= rad) continue;
        local[i] = static_cast<std::int64_t>(out.points.size());
        out.points.push_back(x);
        out.site.push_back(z);
    }
    out.neighbours.assign(out.points.size(), {});
    for (const auto& e : g.edges) {
        if (e.v >= g.n_sausages || e.tau > cfg.t) continue;
        const auto a = local[e.u], b = local[e.v];
        if (a < 0 || b < 0) continue;
        out.neighbours[std::size_t(a)].push_back(std::uint32_t(b));
        out.neighbours[std::size_t(b)].push_back(std::uint32_t(a));
    }
    for (auto& nb : out.neighbours) std::sort(nb.begin(), nb.end());
    return out;
}

std::string to_string(StepCase c) {
    switch (c) {
        case StepCase::init: return "init";
        case StepCase::stop: return "stop";
        case StepCase::case2a: return "2a";
        case StepCase::case2b: return "2b";
    }
    return "unknown";
}

namespace {

// (1,0) < (0,1) < (-1,0) < (0,-1)
constexpr std::array<Site, 4> kDirections{{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}};

Site plus(Site a, Site b) { return {a[0] + b[0], a[1] + b[1]}; }

bool closer(const PointD& a, const PointD& b, const PointD& ref) {
    const double da = sq_dist(a.data(), ref.data(), a.dim());
    const double db = sq_dist(b.data(), ref.data(), b.dim());
    if (da != db) return da < db;
    return std::lexicographical_compare(a.data(), a.data() + a.dim(), b.data(), b.data() + b.dim());
}

}  // namespace

CoarseGrainResult coarse_grain_explore(const GoodPointGraph& g, int window) {
    require(window >= 1, "coarse_grain_explore: window must be >= 1");
    require(g.points.size() == g.site.size() && g.points.size() == g.neighbours.size(),
            "coarse_grain_explore: inconsistent good-point graph");
    CoarseGrainResult res;

    std::map<Site, std::vector<std::uint32_t>> by_site;
    for (std::uint32_t i = 0; i < g.points.size(); ++i) by_site[g.site[i]].push_back(i);

    // Good points of box z adjacent to point e, best first relative to `ref`.
    auto candidates = [&](Site z, std::uint32_t e) {
        std::vector<std::uint32_t> out;
        const auto it = by_site.find(z);
        if (it == by_site.end()) return out;
        const auto& nb = g.neighbours[e];
        for (std::uint32_t x : it->second)
            if (std::binary_search(nb.begin(), nb.end(), x)) out.push_back(x);
        return out;
    };

    std::vector<Site> c;
    std::vector<std::uint32_t> e;
    std::set<Site> cset, dset;
    auto record = [&](int n, StepCase kind, int i_n) {
        CoarseGrainStep s;
        s.n = n;
        s.kind = kind;
        s.c = c;
        s.dismissed.assign(dset.begin(), dset.end());
        s.i_n = i_n;
        s.e = e;
        res.trace.push_back(std::move(s));
    };
    auto on_boundary = [&](Site z) { return std::max(std::abs(z[0]), std::abs(z[1])) >= window; };

    const auto origin_it = by_site.find(Site{0, 0});
    if (origin_it == by_site.end() || origin_it->second.empty()) {
        record(0, StepCase::init, -1);
        return res;
    }
    std::uint32_t e0 = origin_it->second.front();
    for (std::uint32_t x : origin_it->second)
        if (closer(g.points[x], g.points[e0], g.origin)) e0 = x;
    c.push_back({0, 0});
    cset.insert({0, 0});
    e.push_back(e0);
    record(0, StepCase::init, -1);

    std::size_t prev_size = 0;  // |C_{n-1}|, with C_{-1} empty
    for (int n = 0;; ++n) {
        if (c.size() == prev_size) {
            record(n, StepCase::stop, -1);
            break;
        }
        prev_size = c.size();
        auto free_site = [&](Site z) { return !cset.count(z) && !dset.count(z); };
        int i_n = -1;
        for (int i = int(c.size()) - 1; i >= 0 && i_n < 0; --i)
            for (const auto& dir : kDirections) {
                const Site z = plus(c[std::size_t(i)], dir);
                if (free_site(z) && !candidates(z, e[std::size_t(i)]).empty()) {
                    i_n = i;
                    break;
                }
            }
        if (i_n < 0) {
            record(n + 1, StepCase::case2a, -1);
            continue;
        }
        const Site base = c[std::size_t(i_n)];
        const std::uint32_t e_base = e[std::size_t(i_n)];
        std::size_t dir_idx = 0;
        for (; dir_idx < kDirections.size(); ++dir_idx) {
            const Site z = plus(base, kDirections[dir_idx]);
            if (free_site(z) && !candidates(z, e_base).empty()) break;
        }
        const Site next = plus(base, kDirections[dir_idx]);
        const auto cand = candidates(next, e_base);
        std::uint32_t e_next = cand.front();
        for (std::uint32_t x : cand)
            if (closer(g.points[x], g.points[e_next], g.points[e_base])) e_next = x;

        std::vector<Site> add;
        for (std::size_t k = 0; k < dir_idx; ++k) {
            const Site z = plus(base, kDirections[k]);
            if (candidates(z, e_base).empty() && !cset.count(z)) add.push_back(z);
        }
        for (std::size_t i = std::size_t(i_n) + 1; i < c.size(); ++i)
            for (const auto& dir : kDirections) {
                const Site z = plus(c[i], dir);
                if (free_site(z)) add.push_back(z);
            }
        c.push_back(next);
        cset.insert(next);
        e.push_back(e_next);
        for (const auto& z : add)
            if (!cset.count(z)) dset.insert(z);
        record(n + 1, StepCase::case2b, i_n);
        if (on_boundary(next)) {
            res.certificate = true;
            break;
        }
    }
    res.cluster = c;
    res.chosen = e;
    return res;
}

// --- *-contours -----------------------------------------------------------------------------

namespace {

constexpr std::array<Site, 8> kKing{{{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}}};

int cheb(Site a, Site b) { return std::max(std::abs(a[0] - b[0]), std::abs(a[1] - b[1])); }

// Even-odd rule with a horizontal ray from the origin towards +x; the half-open rule on y
// handles vertices on the ray.
bool encloses_even_odd(const std::vector<Site>& cyc) {
    bool inside = false;
    for (std::size_t k = 0; k < cyc.size(); ++k) {
        const Site p = cyc[k], q = cyc[(k + 1) % cyc.size()];
        if ((p[1] > 0) != (q[1] > 0)) {
            const double x = p[0] + double(0 - p[1]) * (q[0] - p[0]) / double(q[1] - p[1]);
            if (x > 0) inside = !inside;
        }
    }
    return inside;
}

bool encloses_winding(const std::vector<Site>& cyc) {
    double total = 0.0;
    for (std::size_t k = 0; k < cyc.size(); ++k) {
        const Site p = cyc[k], q = cyc[(k + 1) % cyc.size()];
        total += std::atan2(double(p[0]) * q[1] - double(p[1]) * q[0],
                            double(p[0]) * q[0] + double(p[1]) * q[1]);
    }
    return std::lround(total / (2.0 * std::numbers::pi)) != 0;
}

struct ContourSearch {
    int n;
    int reach;
    bool canonical;
    std::vector<Site> path;
    std::set<Site> used;
    std::uint64_t count = 0;

    bool less(Site a, Site b) const { return a < b; }

    void extend() {
        const Site cur = path.back();
        const int k = int(path.size());
        if (k == n) {
            if (cheb(cur, path.front()) != 1) return;
            const bool in = canonical ? encloses_even_odd(path) : encloses_winding(path);
            if (in) ++count;
            return;
        }
        for (const auto& dir : kKing) {
            const Site nx = plus(cur, dir);
            if (cheb(nx, {0, 0}) > reach || (nx[0] == 0 && nx[1] == 0)) continue;
            if (used.count(nx)) continue;
            if (canonical && !less(path.front(), nx)) continue;
            if (cheb(nx, path.front()) > n - k) continue;
            path.push_back(nx);
            used.insert(nx);
            extend();
            used.erase(nx);
            path.pop_back();
        }
    }
};

std::uint64_t run_contours(int n, bool canonical) {
    if (n < 4 || n > 9) throw ConfigError("count_star_contours: N must be in [4, 9]");
    // A contour around the origin has vertices on both sides of it in each coordinate, so
    // every vertex lies within Chebyshev distance n/2 of the origin.
    const int reach = n / 2;
    ContourSearch s{n, reach, canonical, {}, {}, 0};
    for (int x = -reach; x <= reach; ++x)
        for (int y = -reach; y <= reach; ++y) {
            if (x == 0 && y == 0) continue;
            s.path = {{x, y}};
            s.used = {{x, y}};
            s.extend();
        }
    return canonical ? s.count / 2 : s.count / (2 * std::uint64_t(n));
}

}  // namespace

std::uint64_t count_star_contours(int n) { return run_contours(n, true); }
std::uint64_t count_star_contours_bruteforce(int n) { return run_contours(n, false); }

}  // namespace wsperc
