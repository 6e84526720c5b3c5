#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "wsperc/error.hpp"
#include "wsperc/geometry.hpp"
#include "wsperc/rng.hpp"

using namespace wsperc;

namespace {

Segment seg(PointD a, PointD b) { return Segment{a, b, 0.0, 1.0}; }

PointD random_point(RngStream& rng, int d, double scale) {
    PointD p(d);
    for (int i = 0; i < d; ++i) p[i] = rng.uniform(-scale, scale);
    return p;
}

// Brute-force oracle: grid search over the unit square.
double grid_search_distance(const Segment& s1, const Segment& s2, int steps) {
    const int d = s1.a.dim();
    double best = 1e300;
    for (int i = 0; i <= steps; ++i) {
        const double u = double(i) / steps;
        for (int j = 0; j <= steps; ++j) {
            const double v = double(j) / steps;
            double s = 0.0;
            for (int k = 0; k < d; ++k) {
                const double p = s1.a[k] + u * (s1.b[k] - s1.a[k]);
                const double q = s2.a[k] + v * (s2.b[k] - s2.a[k]);
                s += (p - q) * (p - q);
            }
            best = std::min(best, s);
        }
    }
    return std::sqrt(best);
}

double point_to_segment(const PointD& p, const Segment& s) {
    return std::sqrt(point_segment_dist_sq(p.data(), s.a.data(), s.b.data(), p.dim()));
}

double hausdorff(const Segment& s1, const Segment& s2) {
    return std::max({point_to_segment(s1.a, s2), point_to_segment(s1.b, s2),
                     point_to_segment(s2.a, s1), point_to_segment(s2.b, s1)});
}

}  // namespace

TEST_CASE("segment_distance: parallel unit-offset segments") {
    const auto s1 = seg({0, 0, 0, 0}, {1, 0, 0, 0});
    const auto s2 = seg({0, 1, 0, 0}, {1, 1, 0, 0});
    CHECK(segment_distance(s1, s2) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("segment_distance: identical segments") {
    RngStream rng(7, 1);
    for (int trial = 0; trial < 50; ++trial) {
        const auto s = seg(random_point(rng, 5, 3.0), random_point(rng, 5, 3.0));
        CHECK(segment_distance(s, s) == doctest::Approx(0.0));
    }
}

TEST_CASE("segment_distance: degenerate point segment agrees with grid search") {
    const auto s1 = seg({0, 0, 0, 0}, {2, 0, 0, 0});
    const auto s2 = seg({1, 1, 0, 0}, {1, 1, 0, 0});
    const double brute = grid_search_distance(s1, s2, 10000);
    CHECK(std::fabs(brute - 1.0) < 1e-3);
    CHECK(segment_distance(s1, s2) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("segment_distance: random pairs agree with grid search") {
    RngStream rng(11, 2);
    for (int trial = 0; trial < 40; ++trial) {
        const int d = 3 + int(rng.below(6));
        const auto s1 = seg(random_point(rng, d, 2.0), random_point(rng, d, 2.0));
        const auto s2 = seg(random_point(rng, d, 2.0), random_point(rng, d, 2.0));
        const double exact = segment_distance(s1, s2);
        const double brute = grid_search_distance(s1, s2, 400);
        // The exact minimum never exceeds a sampled value; the grid is fine enough to be close.
        CHECK(exact <= brute + 1e-12);
        CHECK(brute - exact < 2e-2);
    }
}

TEST_CASE("segment_distance: dimension mismatch is a configuration error") {
    const auto s1 = seg({0, 0, 0}, {1, 0, 0});
    const auto s2 = seg({0, 0, 0, 0}, {1, 0, 0, 0});
    CHECK_THROWS_AS(segment_distance(s1, s2), ConfigError);
}

TEST_CASE("segment_distance: symmetry and Hausdorff bound") {
    RngStream rng(13, 3);
    for (int trial = 0; trial < 500; ++trial) {
        const int d = 4;
        const auto s1 = seg(random_point(rng, d, 2.0), random_point(rng, d, 2.0));
        const auto s2 = seg(random_point(rng, d, 2.0), random_point(rng, d, 2.0));
        const auto s3 = seg(random_point(rng, d, 2.0), random_point(rng, d, 2.0));
        CHECK(segment_distance(s1, s2) == doctest::Approx(segment_distance(s2, s1)).epsilon(1e-12));
        const double lhs = std::fabs(segment_distance(s1, s3) - segment_distance(s2, s3));
        CHECK(lhs <= hausdorff(s1, s2) + 1e-9);
    }
}

TEST_CASE("polyline_distance: reductions and exhaustive oracle") {
    RngStream rng(17, 4);
    auto random_polyline = [&](int n, const PointD& offset) {
        std::vector<Segment> p;
        PointD cur = offset;
        for (int i = 0; i < n; ++i) {
            PointD next = cur;
            for (int k = 0; k < 4; ++k) next[k] += rng.normal() * 0.3;
            p.push_back(seg(cur, next));
            cur = next;
        }
        return p;
    };
    const auto p1 = random_polyline(100, PointD{0, 0, 0, 0});
    const auto p2 = random_polyline(100, PointD{1.5, 0, 0, 0});

    SUBCASE("single segments reduce to segment_distance") {
        CHECK(polyline_distance(std::span(p1).first(1), std::span(p2).first(1)) ==
              segment_distance(p1[0], p2[0]));
    }
    SUBCASE("self distance is zero") {
        CHECK(polyline_distance(p1, p1) == 0.0);
        CHECK(polyline_distance(p2, p2, 0.5) == 0.0);
    }
    SUBCASE("full search equals exhaustive double loop") {
        double brute = 1e300;
        for (const auto& a : p1)
            for (const auto& b : p2) brute = std::min(brute, segment_distance(a, b));
        CHECK(polyline_distance(p1, p2) == brute);
    }
    SUBCASE("early exit returns a value below the threshold when one exists") {
        double brute = 1e300;
        for (const auto& a : p1)
            for (const auto& b : p2) brute = std::min(brute, segment_distance(a, b));
        const double thr = brute + 0.5;
        CHECK(polyline_distance(p1, p2, thr) < thr);
    }
    SUBCASE("empty polylines are rejected") {
        CHECK_THROWS_AS(polyline_distance({}, p1), ConfigError);
    }
}

TEST_CASE("GridIndex: candidates") {
    SUBCASE("empty index") {
        GridIndex g(4, 1.0);
        CHECK(g.candidates(Aabb::cube(4, 0, 1)).empty());
    }
    SUBCASE("query equal to a stored box") {
        GridIndex g(4, 0.7);
        const Aabb b = Aabb::cube(4, 0.2, 1.9);
        g.insert(42, b);
        const auto c = g.candidates(b);
        CHECK(std::find(c.begin(), c.end(), 42u) != c.end());
    }
    SUBCASE("never misses a true overlap (random boxes vs all-pairs oracle)") {
        RngStream rng(23, 5);
        for (int d : {3, 4, 5}) {
            std::vector<Aabb> boxes;
            for (int i = 0; i < 1000; ++i) {
                const PointD c = random_point(rng, d, 10.0);
                Aabb b = Aabb::of_point(c);
                for (int k = 0; k < d; ++k) {
                    const double h = rng.uniform(0.0, 1.5);
                    b.lo[k] -= h;
                    b.hi[k] += h;
                }
                boxes.push_back(b);
            }
            GridIndex g(d, GridIndex::default_cell_size(boxes));
            for (std::uint32_t i = 0; i < boxes.size(); ++i) g.insert(i, boxes[i]);
            std::size_t missed = 0;
            for (std::uint32_t q = 0; q < 200; ++q) {
                const auto cand = g.candidates(boxes[q]);
                for (std::uint32_t i = 0; i < boxes.size(); ++i)
                    if (boxes[q].overlaps(boxes[i]) &&
                        !std::binary_search(cand.begin(), cand.end(), i))
                        ++missed;
            }
            CHECK(missed == 0);
        }
    }
    SUBCASE("query spanning more cells than are occupied") {
        GridIndex g(3, 0.01);
        g.insert(1, Aabb::cube(3, 0.0, 0.005));
        g.insert(2, Aabb::cube(3, 5.0, 5.005));
        const auto c = g.candidates(Aabb::cube(3, -1.0, 1.0));
        CHECK(c == std::vector<std::uint32_t>{1});
    }
    SUBCASE("non-positive cell size is rejected") {
        CHECK_THROWS_AS(GridIndex(4, 0.0), ConfigError);
    }
}

TEST_CASE("run dimension range") {
    CHECK_NOTHROW(check_run_dimension(3));
    CHECK_NOTHROW(check_run_dimension(8));
    CHECK_THROWS_AS(check_run_dimension(2), ConfigError);
    CHECK_THROWS_AS(check_run_dimension(9), ConfigError);
}
