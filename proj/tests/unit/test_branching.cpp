#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "wsperc/branching.hpp"
#include "wsperc/error.hpp"

using namespace wsperc;

namespace {

KernelParams frozen_params() {
    KernelParams p;
    p.d = 4;
    p.t = 1.0;
    p.r = 0.5;
    p.lambda = 1.0;
    p.frozen = true;
    p.n_outer = 100;
    p.n_inner = 200;
    p.n_walks = 20;
    p.seed = 11;
    p.workers = 2;
    return p;
}

double row_sum(const std::vector<double>& m, std::uint32_t n, std::uint32_t i) {
    double s = 0.0;
    for (std::uint32_t j = 0; j < n; ++j) s += m[std::size_t(i) * n + j];
    return s;
}

/// Root of 1 - s = exp(-mu s) by bisection; survival probability of Poisson(mu) GW.
double poisson_survival(double mu) {
    double lo = 1e-9, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (1.0 - mid - std::exp(-mu * mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("class index: d=4 flattening round-trips and clamps the outradius bin") {
    const ClassIndex ci{4, 1.0, 0.1, 4};
    const double s = ci.cap_scale();
    CHECK(s == doctest::Approx(1.0 / std::log(10.0)));
    CHECK(ci.of(2.5 * s, 1.5) == 2 * 4 + 1);
    CHECK(ci.of(0.0, 100.0) == 3);
    const auto [j1, j2] = ci.split(ci.of(5.2 * s, 2.2));
    CHECK(j1 == 5);
    CHECK(j2 == 2);
    const ClassIndex c5{5, 2.0, 0.1, 4};
    CHECK(c5.of(3.5 * c5.cap_scale(), 100.0) == 3);
    CHECK(c5.split(7).first == 7);
}

TEST_CASE("kernel: frozen balls give lambda times the volume of the 2r ball") {
    const auto p = frozen_params();
    const auto k = estimate_kernel(p);
    const std::uint32_t n = k.n_types;
    double total_mean = 0.0;
    std::uint64_t outer = 0;
    for (std::uint32_t i = 0; i < n; ++i) {
        total_mean += double(k.n_outer[i]) * row_sum(k.mean, n, i);
        outer += k.n_outer[i];
    }
    REQUIRE(outer == p.n_outer);
    total_mean /= double(outer);
    const double expected = std::numbers::pi * std::numbers::pi / 2.0;  // vol of the unit 4-ball
    // Starts are uniform on [-1, 1]^4; each draw hits with probability expected / 16.
    const double box = 16.0, hit = expected / box;
    const double se = box * std::sqrt(hit * (1.0 - hit) / double(p.n_outer * p.n_inner));
    INFO("mean " << total_mean << " se " << se);
    CHECK(std::abs(total_mean - expected) < 3.0 * se);
    CHECK(std::abs(total_mean - expected) / expected < 0.05);
}

TEST_CASE("kernel: zero intensity is the zero kernel, entries are linear in lambda") {
    auto p = frozen_params();
    p.frozen = false;
    p.r = 0.2;
    p.n_inner = 30;
    p.n_walks = 10;
    p.max_types = 12;
    p.lambda = 0.0;
    const auto zero = estimate_kernel(p);
    for (double v : zero.k) CHECK(v == 0.0);
    p.lambda = 0.5;
    const auto a = estimate_kernel(p);
    p.lambda = 1.0;
    const auto b = estimate_kernel(p);
    for (std::size_t e = 0; e < a.k.size(); ++e) {
        CHECK(b.k[e] >= a.k[e]);
        CHECK(b.k[e] == doctest::Approx(2.0 * a.k[e]).epsilon(1e-12));
    }
}

TEST_CASE("kernel: deterministic for a seed and independent of workers") {
    auto p = frozen_params();
    p.frozen = false;
    p.r = 0.2;
    p.n_inner = 20;
    p.n_walks = 10;
    p.workers = 1;
    const auto a = estimate_kernel(p);
    p.workers = 4;
    const auto b = estimate_kernel(p);
    CHECK(a.k == b.k);
    CHECK(a.mean == b.mean);
    CHECK(a.n_outer == b.n_outer);
}

TEST_CASE("kernel: parameter validation") {
    auto p = frozen_params();
    p.q = 0.5;
    CHECK_THROWS_AS(estimate_kernel(p), ConfigError);
    p = frozen_params();
    p.n_outer = 50;
    CHECK_THROWS_AS(estimate_kernel(p), ConfigError);
    p = frozen_params();
    p.d = 2;
    CHECK_THROWS_AS(estimate_kernel(p), ConfigError);
    CHECK_THROWS_AS(OffspringKernel::from_matrix(2, {1.0, -1.0, 0.0, 0.0}), ConfigError);
}

TEST_CASE("kernel CSV round-trips bit-exactly") {
    auto k = OffspringKernel::from_matrix(3, {1.0 / 3.0, 0.0, 2.5e-17, std::nextafter(1.0, 2.0), 7.0,
                                              0.1, 0.2, 0.30000000000000004, 1e300});
    k.d = 5;
    k.t = 0.7;
    k.r = 0.05;
    k.lambda = 1.0 / 7.0;
    k.q = 0.95;
    k.tail_a = 0.123456789012345678;
    k.tail_alpha = 2.0;
    k.tail_decay = 0.35;
    k.std_error[4] = 1e-3 / 3.0;
    k.n_outer = {5, 120, 0};
    k.reliable[1] = 0;
    std::ostringstream first;
    write_kernel_csv(first, k);
    std::istringstream in(first.str());
    const auto back = read_kernel_csv(in);
    std::ostringstream second;
    write_kernel_csv(second, back);
    CHECK(first.str() == second.str());
    CHECK(back.k == k.k);
    CHECK(back.std_error == k.std_error);
    CHECK(back.tail_a == k.tail_a);
    CHECK(back.n_outer == k.n_outer);
    CHECK(back.reliable == k.reliable);

    std::istringstream bad("key,value\nd,5\n");
    CHECK_THROWS_AS(read_kernel_csv(bad), ConfigError);
}

TEST_CASE("GW: subcritical single type goes extinct") {
    const auto k = OffspringKernel::from_matrix(1, {0.5});
    RngStream rng(3, 0);
    int extinct = 0;
    const int runs = 4000;
    for (int i = 0; i < runs; ++i) extinct += simulate_gw(k, 0, 200, rng).extinction_time.has_value();
    CHECK(double(extinct) / runs >= 0.999);
}

TEST_CASE("GW: supercritical Poisson(2) extinction probability matches the fixed point") {
    const auto k = OffspringKernel::from_matrix(1, {2.0});
    const double q_ext = 1.0 - poisson_survival(2.0);
    CHECK(q_ext == doctest::Approx(0.2032).epsilon(1e-3));
    RngStream rng(5, 0);
    int extinct = 0;
    const int runs = 20000;
    for (int i = 0; i < runs; ++i) {
        const auto res = simulate_gw(k, 0, 400, rng, 2000);
        extinct += res.extinction_time.has_value();
        CHECK((res.extinction_time.has_value() || res.escaped));
    }
    CHECK(std::abs(double(extinct) / runs - q_ext) < 0.01);
}

TEST_CASE("GW: zero kernel dies in one generation, huge means throw") {
    const auto zero = OffspringKernel::from_matrix(2, {0.0, 0.0, 0.0, 0.0});
    RngStream rng(1, 0);
    const auto res = simulate_gw(zero, 1, 10, rng);
    REQUIRE(res.extinction_time.has_value());
    CHECK(*res.extinction_time == 1);
    CHECK(res.totals == std::vector<std::uint64_t>{1, 0});
    const auto huge = OffspringKernel::from_matrix(1, {1e10});
    CHECK_THROWS_AS(simulate_gw(huge, 0, 10, rng), ExplosionError);
    CHECK_THROWS_AS(simulate_gw(zero, 2, 10, rng), ConfigError);
}

TEST_CASE("series: geometric diagonal kernels") {
    const auto half = OffspringKernel::from_matrix(1, {0.5});
    const auto s = series_check(half, 0, 60);
    CHECK(s.verdict == SeriesVerdict::convergent);
    CHECK(s.partial_sums.back() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(s.ratio == doctest::Approx(0.5).epsilon(1e-9));

    const auto two = OffspringKernel::from_matrix(1, {2.0});
    CHECK(series_check(two, 0, 60).verdict == SeriesVerdict::divergent);
    CHECK(series_check(two, 0, 200, 1e6).partial_sums.size() < 30);

    const auto one = OffspringKernel::from_matrix(1, {1.0});
    CHECK(series_check(one, 0, 50, 1e12).verdict == SeriesVerdict::inconclusive);

    const auto zero = OffspringKernel::from_matrix(1, {0.0});
    CHECK(series_check(zero, 0, 10).verdict == SeriesVerdict::convergent);
}

TEST_CASE("series: fitted ratio tracks the spectral radius of a 3x3 kernel") {
    RngStream rng(17, 0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> m(9);
        for (double& v : m) v = rng.uniform(0.0, 0.6);
        // Power iteration oracle for the Perron root.
        std::vector<double> x{1.0, 1.0, 1.0}, y(3);
        double rho = 0.0;
        for (int it = 0; it < 2000; ++it) {
            for (int a = 0; a < 3; ++a) y[a] = m[a * 3] * x[0] + m[a * 3 + 1] * x[1] + m[a * 3 + 2] * x[2];
            rho = std::max({y[0], y[1], y[2]});
            for (int a = 0; a < 3; ++a) x[a] = y[a] / rho;
        }
        const auto k = OffspringKernel::from_matrix(3, m);
        const auto s = series_check(k, trial % 3, 300, 1e300);
        INFO("rho " << rho << " ratio " << s.ratio);
        CHECK(s.ratio == doctest::Approx(rho).epsilon(1e-6));
        if (rho < 0.99) CHECK(s.verdict == SeriesVerdict::convergent);
        if (rho > 1.01) CHECK(s.verdict == SeriesVerdict::divergent);
    }
}

TEST_CASE("extended kernel appends the tail type") {
    auto k = OffspringKernel::from_matrix(2, {0.1, 0.2, 0.3, 0.4});
    k.tail_a = 0.5;
    k.tail_alpha = 2.0;
    k.tail_decay = 1.0;
    const auto ext = k.extended();
    REQUIRE(ext.size() == 9);
    const double e = std::exp(-1.0);
    CHECK(ext[0 * 3 + 2] == 0.0);  // i = 0: i^alpha = 0
    CHECK(ext[1 * 3 + 2] == doctest::Approx(0.5 * e * e / (1.0 - e)));
    CHECK(ext[1 * 3 + 1] == 0.4);
    CHECK(ext[2 * 3 + 2] == doctest::Approx(0.5 * 4.0 * e * e / (1.0 - e)));
}
