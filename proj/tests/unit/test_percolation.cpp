#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <vector>

#include "coarse_grain_fixtures.hpp"
#include "doctest.h"
#include "wsperc/capacity.hpp"
#include "wsperc/error.hpp"
#include "wsperc/percolation.hpp"

using namespace wsperc;

namespace {

Sausage frozen_ball(std::uint32_t id, const PointD& x, double t, double step, double r) {
    return Sausage(id, BrownianPath::frozen(x, t, step), r);
}

// Brute-force tube intersection of two polylines.
bool tubes_meet(const Sausage& a, const Sausage& b) {
    const auto& pa = a.path();
    const auto& pb = b.path();
    const double reach = a.radius() + b.radius();
    auto seg_end = [](const BrownianPath& p, std::size_t k) { return k == 0 ? 0 : k - 1; };
    for (std::size_t i = 0; i < pa.size(); ++i)
        for (std::size_t j = 0; j < pb.size(); ++j) {
            const double d2 = segment_segment_dist_sq(pa.point(seg_end(pa, i)).data(), pa.point(i).data(),
                                                      pb.point(seg_end(pb, j)).data(), pb.point(j).data(),
                                                      a.dim());
            if (d2 <= reach * reach) return true;
        }
    return false;
}

ConfigurationParams small_params(double lambda = 0.35) {
    ConfigurationParams p;
    p.d = 4;
    p.intensity = lambda;
    p.t = 1.0;
    p.r = 0.5;
    p.box = Aabb::cube(4, 0.0, 4.0);
    p.margin = 1.0;
    return p;
}

// Exhaustive minimax over simple LEFT-RIGHT paths.
std::optional<double> minimax_oracle(const TimedGraph& g) {
    const std::uint32_t n = g.n_nodes();
    std::vector<std::vector<std::pair<std::uint32_t, double>>> adj(n);
    for (const auto& e : g.edges) {
        adj[e.u].push_back({e.v, e.tau});
        adj[e.v].push_back({e.u, e.tau});
    }
    std::optional<double> best;
    std::vector<char> on(n, 0);
    std::function<void(std::uint32_t, double)> dfs = [&](std::uint32_t x, double worst) {
        if (x == g.right()) {
            if (!best || worst < *best) best = worst;
            return;
        }
        for (auto [y, tau] : adj[x]) {
            if (on[y]) continue;
            on[y] = 1;
            dfs(y, std::max(worst, tau));
            on[y] = 0;
        }
    };
    on[g.left()] = 1;
    dfs(g.left(), -1e300);
    return best;
}

}  // namespace

TEST_CASE("connection_time fixtures") {
    SUBCASE("overlapping initial balls connect at time zero") {
        const auto a = frozen_ball(0, PointD{0, 0, 0, 0}, 1.0, 0.1, 0.6);
        const auto b = frozen_ball(1, PointD{1, 0, 0, 0}, 1.0, 0.1, 0.6);
        CHECK(connection_time(a, b) == 0.0);
    }
    SUBCASE("approaching linear path") {
        const auto a = frozen_ball(0, PointD{0, 0, 0, 0}, 5.0, 1.0, 0.5);
        std::vector<PointD> pts;
        std::vector<double> times;
        for (int s = 0; s <= 5; ++s) {
            pts.push_back(PointD{5.0 - s, 0, 0, 0});
            times.push_back(s);
        }
        const Sausage b(1, BrownianPath::from_points(pts, times), 0.5);
        CHECK(connection_time(a, b) == 4.0);
        CHECK(connection_time(b, a) == 4.0);
    }
    SUBCASE("never meeting") {
        const auto a = frozen_ball(0, PointD{0, 0, 0, 0}, 1.0, 0.1, 0.5);
        const auto b = frozen_ball(1, PointD{0, 3, 0, 0}, 1.0, 0.1, 0.5);
        CHECK_FALSE(connection_time(a, b).has_value());
    }
    SUBCASE("parameter mismatch") {
        const auto a = frozen_ball(0, PointD{0, 0, 0, 0}, 1.0, 0.1, 0.5);
        const auto b = frozen_ball(1, PointD{0, 0, 0, 0}, 2.0, 0.1, 0.5);
        const auto c = frozen_ball(2, PointD{0, 0, 0, 0, 0}, 1.0, 0.1, 0.5);
        CHECK_THROWS_AS(connection_time(a, b), ConfigError);
        CHECK_THROWS_AS(connection_time(a, c), ConfigError);
    }
    SUBCASE("truncate-and-retest oracle on random pairs") {
        std::size_t mismatches = 0, hits = 0;
        for (std::uint64_t i = 0; i < 300; ++i) {
            RngStream rng(90, i);
            PointD x(4), y(4);
            for (int k = 0; k < 4; ++k) y[k] = rng.uniform(-1.5, 1.5);
            const double r = 0.2, t = 2.0;
            const Sausage a(0, sample_brownian(rng, x, t, 0.02), r);
            const Sausage b(1, sample_brownian(rng, y, t, 0.02), r);
            const auto tau = connection_time(a, b);
            if (tau) ++hits;
            for (double tp : {t / 4, t / 2, t}) {
                const bool direct = tubes_meet(a.truncated(tp), b.truncated(tp));
                if (direct != (tau && *tau <= tp)) ++mismatches;
            }
        }
        CHECK(mismatches == 0);
        CHECK(hits > 20);
    }
}

TEST_CASE("build_timed_graph") {
    SUBCASE("empty configuration") {
        const auto cfg = make_configuration(Aabb::cube(4, 0, 1), 1.0, 0.5, {});
        const auto g = build_timed_graph(cfg);
        CHECK(g.n_nodes() == 2);
        CHECK(g.edges.empty());
        CHECK_FALSE(crossing_time(g).has_value());
    }
    SUBCASE("collinear chain of balls") {
        const double r = 0.5;
        std::vector<Sausage> s;
        for (std::uint32_t i = 0; i < 3; ++i)
            s.push_back(frozen_ball(i, PointD{5.0 + 1.5 * r * i, 0, 0, 0}, 1.0, 0.25, r));
        const auto g = build_timed_graph(make_configuration(Aabb::cube(4, -10, 20), 1.0, r, s));
        std::set<std::pair<std::uint32_t, std::uint32_t>> got;
        for (const auto& e : g.edges) {
            CHECK(e.tau == 0.0);
            got.insert({e.u, e.v});
        }
        CHECK(got == std::set<std::pair<std::uint32_t, std::uint32_t>>{{0, 1}, {1, 2}});
    }
    SUBCASE("edges equal the all-pairs oracle") {
        auto p = small_params(0.6);
        const auto cfg = sample_configuration(p, 7);
        REQUIRE(cfg.sausages.size() >= 200);
        const auto g = build_timed_graph(cfg);
        std::map<std::pair<std::uint32_t, std::uint32_t>, double> want, got;
        for (std::uint32_t i = 0; i < cfg.sausages.size(); ++i)
            for (std::uint32_t j = i + 1; j < cfg.sausages.size(); ++j)
                if (const auto tau = connection_time(cfg.sausages[i], cfg.sausages[j])) want[{i, j}] = *tau;
        for (const auto& e : g.edges)
            if (e.v < g.n_sausages) got[{e.u, e.v}] = e.tau;
        CHECK(got == want);
    }
    SUBCASE("face edges") {
        const double r = 0.5;
        std::vector<Sausage> s{frozen_ball(0, PointD{0.2, 0, 0, 0}, 1.0, 0.5, r),
                               frozen_ball(1, PointD{3.8, 0, 0, 0}, 1.0, 0.5, r),
                               frozen_ball(2, PointD{2.0, 0, 0, 0}, 1.0, 0.5, r)};
        const auto g = build_timed_graph(make_configuration(Aabb::cube(4, 0, 4), 1.0, r, s));
        std::set<std::pair<std::uint32_t, std::uint32_t>> faces;
        for (const auto& e : g.edges)
            if (e.v >= g.n_sausages) faces.insert({e.u, e.v});
        CHECK(faces == std::set<std::pair<std::uint32_t, std::uint32_t>>{{0, g.left()}, {1, g.right()}});
    }
}

TEST_CASE("crossing_time") {
    auto graph = [](std::uint32_t n, std::vector<TimedEdge> e) {
        TimedGraph g;
        g.n_sausages = n;
        g.edges = std::move(e);
        return g;
    };
    SUBCASE("chain") {
        // A = 0, B = 1, LEFT = 2, RIGHT = 3
        const auto g = graph(2, {{0, 2, 1.0}, {0, 1, 3.0}, {1, 3, 2.0}});
        CHECK(crossing_time(g) == 3.0);
    }
    SUBCASE("two routes") {
        const auto g = graph(2, {{0, 2, 1.0}, {0, 3, 5.0}, {1, 2, 4.0}, {1, 3, 0.5}});
        CHECK(crossing_time(g) == 4.0);
    }
    SUBCASE("exhaustive minimax oracle on random small graphs") {
        RngStream rng(3, 3);
        std::size_t mismatches = 0;
        for (int trial = 0; trial < 1000; ++trial) {
            const auto n = static_cast<std::uint32_t>(rng.below(9));  // + 2 face nodes <= 10
            TimedGraph g;
            g.n_sausages = n;
            for (std::uint32_t a = 0; a < n + 2; ++a)
                for (std::uint32_t b = a + 1; b < n + 2; ++b)
                    if (rng.uniform() < 0.35) g.edges.push_back({a, b, double(rng.below(6))});
            if (crossing_time(g) != minimax_oracle(g)) ++mismatches;
        }
        CHECK(mismatches == 0);
    }
    SUBCASE("invariant under edge order and id permutation") {
        auto cfg = sample_configuration(small_params(), 11);
        const auto g = build_timed_graph(cfg);
        const auto tau = crossing_time(g);
        TimedGraph h = g;
        std::reverse(h.edges.begin(), h.edges.end());
        CHECK(crossing_time(h) == tau);

        std::vector<Sausage> perm;
        for (std::size_t i = cfg.sausages.size(); i-- > 0;) perm.push_back(cfg.sausages[i]);
        auto cfg2 = cfg;
        cfg2.sausages = perm;
        CHECK(crossing_time(build_timed_graph(cfg2)) == tau);
    }
}

TEST_CASE("equal seeds give nested clouds across intensities") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto lo = sample_configuration(small_params(0.05), seed);
        const auto hi = sample_configuration(small_params(0.2), seed);
        REQUIRE(lo.sausages.size() <= hi.sausages.size());
        for (std::size_t i = 0; i < lo.sausages.size(); ++i)
        {
            const auto a = lo.sausages[i].path().positions(), b = hi.sausages[i].path().positions();
            CHECK(std::equal(a.begin(), a.end(), b.begin(), b.end()));
        }
        const auto t_lo = crossing_time(build_timed_graph(lo));
        const auto t_hi = crossing_time(build_timed_graph(hi));
        if (t_lo) {
            REQUIRE(t_hi.has_value());
            CHECK(*t_hi <= *t_lo);
        }
    }
}

TEST_CASE("monotone coupling: truncate and rebuild") {
    std::size_t mismatches = 0, crossings = 0, configs = 0;
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        const auto cfg = sample_configuration(small_params(0.02), 1000 + seed);
        const auto tau = crossing_time(build_timed_graph(cfg));
        ++configs;
        if (tau) ++crossings;
        for (double tp : {cfg.t / 4, cfg.t / 2, cfg.t}) {
            const bool rebuilt = crossing_time(build_timed_graph(truncated(cfg, tp))).has_value();
            if (rebuilt != (tau && *tau <= tp)) ++mismatches;
            if (crosses_by(cfg, tp) != rebuilt) ++mismatches;
        }
        if (crosses_by(cfg, 0.0) != (tau && *tau == 0.0)) ++mismatches;
    }
    CHECK(mismatches == 0);
    CHECK(crossings > 0);
    CHECK(crossings < configs);
}

TEST_CASE("translation invariance of the crossing time") {
    auto p = small_params();
    const auto cfg = sample_configuration(p, 5);
    std::vector<Sausage> moved;
    const PointD shift{8, -16, 4, 2};
    for (const auto& s : cfg.sausages) {
        std::vector<PointD> pts;
        for (std::size_t k = 0; k < s.path().size(); ++k) {
            PointD q = s.path().point_d(k);
            for (int i = 0; i < 4; ++i) q[i] += shift[i];
            pts.push_back(q);
        }
        moved.emplace_back(s.id(), BrownianPath::from_points(pts, s.path().times()), s.radius());
    }
    Aabb box = cfg.box;
    for (int i = 0; i < 4; ++i) {
        box.lo[i] += shift[i];
        box.hi[i] += shift[i];
    }
    CHECK(crossing_time(build_timed_graph(make_configuration(box, cfg.t, cfg.r, moved))) ==
          crossing_time(build_timed_graph(cfg)));
}

TEST_CASE("explore_generations") {
    TimedGraph path;
    path.n_sausages = 3;
    path.edges = {{0, 1, 0.0}, {1, 2, 0.0}};
    CHECK(explore_generations(path, 0) ==
          std::vector<std::vector<std::uint32_t>>{{0}, {1}, {2}});
    CHECK(explore_generations(path, 3) == std::vector<std::vector<std::uint32_t>>{{3}});
    CHECK_THROWS_AS(explore_generations(path, 99), ConfigError);

    SUBCASE("union of generations equals the union-find component") {
        RngStream rng(5, 5);
        for (int trial = 0; trial < 200; ++trial) {
            TimedGraph g;
            g.n_sausages = 30;
            for (std::uint32_t a = 0; a < 32; ++a)
                for (std::uint32_t b = a + 1; b < 32; ++b)
                    if (rng.uniform() < 0.05) g.edges.push_back({a, b, rng.uniform()});
            const double horizon = 0.6;
            const auto root = static_cast<std::uint32_t>(rng.below(32));
            const auto layers = explore_generations(g, root, horizon);
            UnionFind uf(32);
            for (const auto& e : g.edges)
                if (e.tau <= horizon) uf.unite(e.u, e.v);
            std::set<std::uint32_t> seen;
            for (const auto& layer : layers)
                for (auto x : layer) CHECK(seen.insert(x).second);
            for (std::uint32_t x = 0; x < 32; ++x)
                CHECK((uf.find(x) == uf.find(root)) == bool(seen.count(x)));
        }
    }
}

TEST_CASE("classify_good") {
    const double t = 8.0, r = 0.1;
    SUBCASE("frozen paths are confined; zero threshold means confinement only") {
        std::vector<Sausage> s{frozen_ball(0, PointD{0, 0, 0, 0, 0}, t, 0.5, r)};
        RngStream rng(4, 4);
        s.emplace_back(1, sample_brownian(rng, PointD(5), t, 0.01), r);
        const auto cfg = make_configuration(Aabb::cube(5, -1, 1), t, r, s);
        GoodParams gp;
        gp.c_b = 1.0;
        const auto good = classify_good(cfg, gp);
        CHECK(good[0]);
        CHECK(good[1] == (s[1].truncated(t / 2).outradius() <= std::sqrt(t / 2)));
    }
    SUBCASE("good points occur with positive frequency (d=5, t=8, c_B=1)") {
        std::vector<Sausage> confined;
        const std::size_t n_paths = 100000;
        for (std::uint64_t i = 0; i < n_paths && confined.size() < 40; ++i) {
            RngStream rng(77, i);
            BrownianPath p = sample_brownian(rng, PointD(5), t, 0.04);
            if (Sausage(0, p.truncated(t / 2), r).outradius() <= std::sqrt(t / 2))
                confined.emplace_back(std::uint32_t(confined.size()), std::move(p), r);
        }
        REQUIRE(confined.size() >= 2);
        const auto cfg = make_configuration(Aabb::cube(5, -1, 1), t, r, confined);
        const auto k = make_green_kernel(5);
        double mean = 0.0;
        for (const auto& s : confined) {
            RngStream rng(78, s.id());
            mean += cap_hitting(k, SausageTarget(s.truncated(t / 2)), rng, sausage_hitting_params(r, 400)).value;
        }
        mean /= double(confined.size());
        GoodParams gp;
        gp.c_b = 1.0;
        gp.cap_threshold = 0.5 * mean;
        gp.n_walks = 400;
        const auto good = classify_good(cfg, gp);
        CHECK(std::count(good.begin(), good.end(), true) > 0);
    }
}

// --- coarse graining -----------------------------------------------------------------------

TEST_CASE("coarse_grain_explore: hand-executed fixtures") {
    for (const auto& f : fixtures::coarse_grain_fixtures()) {
        INFO(f.name);
        const auto res = coarse_grain_explore(f.g, f.window);
        REQUIRE(res.trace.size() == f.trace.size());
        for (std::size_t k = 0; k < f.trace.size(); ++k) {
            INFO("step " << k);
            const auto& s = res.trace[k];
            const auto& w = f.trace[k];
            CHECK(s.n == w.n);
            CHECK(s.kind == w.kind);
            CHECK(s.c == w.c);
            CHECK(s.dismissed == w.dismissed);
            CHECK(s.i_n == w.i_n);
            CHECK(s.e == w.e);
        }
        if (f.certificate) CHECK(res.certificate == *f.certificate);
        CHECK(fixtures::matches(f, res));
    }
    const auto first = fixtures::coarse_grain_fixtures().front();
    CHECK(coarse_grain_explore(first.g, first.window).cluster.empty());
}

TEST_CASE("coarse_grain_explore: invariants on random good-point graphs") {
    RngStream rng(12, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const int w = 4;
        fixtures::CoarseGrainFixture f("random", w);
        for (int x = -w; x <= w; ++x)
            for (int y = -w; y <= w; ++y)
                for (int k = int(rng.below(3)); k > 0; --k)
                    f.add({x, y}, rng.uniform(-0.9, 0.9) / std::sqrt(2.0), rng.uniform(-0.9, 0.9) / std::sqrt(2.0));
        for (std::uint32_t a = 0; a < f.g.points.size(); ++a)
            for (std::uint32_t b = a + 1; b < f.g.points.size(); ++b) {
                const auto za = f.g.site[a], zb = f.g.site[b];
                if (std::abs(za[0] - zb[0]) + std::abs(za[1] - zb[1]) == 1 && rng.uniform() < 0.4)
                    f.link(a, b);
            }
        const auto res = coarse_grain_explore(f.g, w);
        std::size_t prev = 0;
        for (const auto& s : res.trace) {
            std::set<Site> cs(s.c.begin(), s.c.end());
            CHECK(cs.size() == s.c.size());
            for (const auto& z : s.dismissed) CHECK_FALSE(cs.count(z));
            CHECK(s.c.size() <= prev + 1);
            prev = s.c.size();
            for (std::size_t i = 0; i < s.e.size(); ++i) CHECK(f.g.site[s.e[i]] == s.c[i]);
        }
        for (std::size_t i = 1; i < res.cluster.size(); ++i) {
            // each new box is linked to an earlier chosen point
            const auto e = res.chosen[i];
            bool linked = false;
            for (std::size_t j = 0; j < i; ++j)
                linked |= std::binary_search(f.g.neighbours[e].begin(), f.g.neighbours[e].end(), res.chosen[j]);
            CHECK(linked);
        }
    }
}

TEST_CASE("good_point_graph window must fit") {
    auto p = small_params();
    const auto cfg = sample_configuration(p, 3);
    const auto g = build_timed_graph(cfg);
    std::vector<bool> good(cfg.sausages.size(), true);
    CHECK_NOTHROW(good_point_graph(cfg, g, good, 0.5, 1));
    CHECK_THROWS_AS(good_point_graph(cfg, g, good, 0.5, 10), ConfigError);
    const auto gp = good_point_graph(cfg, g, good, 0.5, 1);
    for (std::size_t i = 0; i < gp.points.size(); ++i) {
        PointD c = cfg.box.center();
        c[0] += gp.site[i][0];
        c[1] += gp.site[i][1];
        CHECK(distance(gp.points[i], c) < 0.5);
    }
}

TEST_CASE("star contours") {
    CHECK(count_star_contours(4) >= 1);
    CHECK(count_star_contours(4) == 1);
    for (int n = 4; n <= 8; ++n) {
        const auto a = count_star_contours(n);
        const auto b = count_star_contours_bruteforce(n);
        INFO("N=" << n << " count=" << a);
        CHECK(a == b);
        CHECK(double(a) <= n * std::pow(7.0, n));
    }
    CHECK_THROWS_AS(count_star_contours(3), ConfigError);
    CHECK_THROWS_AS(count_star_contours(10), ConfigError);
}
