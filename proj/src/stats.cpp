#include "wsperc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wsperc/error.hpp"

namespace wsperc {

void RunningStats::add(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / double(n_);
    m2_ += delta * (x - mean_);
}

void RunningStats::merge(const RunningStats& o) {
    if (o.n_ == 0) return;
    if (n_ == 0) {
        *this = o;
        return;
    }
    const double n = double(n_ + o.n_);
    const double delta = o.mean_ - mean_;
    mean_ += delta * double(o.n_) / n;
    m2_ += o.m2_ + delta * delta * double(n_) * double(o.n_) / n;
    n_ += o.n_;
}

double RunningStats::std_error() const {
    return n_ > 1 ? std::sqrt(variance() / double(n_)) : 0.0;
}

Interval wilson_interval(std::size_t k, std::size_t n, double z) {
    if (n == 0) return {0.0, 1.0};
    const double nn = double(n);
    const double p = double(k) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double centre = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double quantile(std::vector<double> v, double q) {
    require(!v.empty(), "quantile of an empty sample");
    require(q >= 0.0 && q <= 1.0, "quantile level must be in [0,1]");
    std::sort(v.begin(), v.end());
    const double h = q * double(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    if (h == double(lo) || v[hi] == v[lo]) return v[lo];  // no interpolation between equal (possibly infinite) order statistics
    return v[lo] + (h - double(lo)) * (v[hi] - v[lo]);
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

Interval bootstrap_median_ci(std::span<const double> values, std::size_t n_resamples,
                             RngStream& rng, double level) {
    require(!values.empty(), "bootstrap of an empty sample");
    std::vector<double> meds;
    meds.reserve(n_resamples);
    std::vector<double> buf(values.size());
    for (std::size_t b = 0; b < n_resamples; ++b) {
        for (auto& x : buf) x = values[rng.below(values.size())];
        meds.push_back(median(buf));
    }
    const double alpha = (1.0 - level) / 2.0;
    return {quantile(meds, alpha), quantile(meds, 1.0 - alpha)};
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size(), "least_squares: size mismatch");
    require(x.size() >= 2, "least_squares: need at least two points");
    const double n = double(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw ConfigError("least_squares: degenerate design (identical x)");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        f.residuals.push_back(r);
        rss += r * r;
    }
    if (x.size() > 2) {
        const double s2 = rss / (n - 2.0);
        f.slope_se = std::sqrt(s2 / sxx);
        f.intercept_se = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
    }
    return f;
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    require(!a.empty() && !b.empty(), "ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = double(a.size()), nb = double(b.size());
    std::size_t i = 0, j = 0;
    double dmax = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        dmax = std::max(dmax, std::fabs(double(i) / na - double(j) / nb));
    }
    const double ne = na * nb / (na + nb);
    const double sq = std::sqrt(ne);
    const double lambda = (sq + 0.12 + 0.11 / sq) * dmax;
    double p = 0.0;
    if (lambda < 1e-3) {
        p = 1.0;
    } else {
        double sign = 1.0;
        for (int k = 1; k <= 100; ++k) {
            const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
            p += term;
            if (std::fabs(term) < 1e-12) break;
            sign = -sign;
        }
        p = std::clamp(2.0 * p, 0.0, 1.0);
    }
    return {dmax, p};
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

double mann_whitney_greater(std::span<const double> x, std::span<const double> y) {
    require(!x.empty() && !y.empty(), "mann_whitney: empty sample");
    struct Item {
        double v;
        bool from_x;
    };
    std::vector<Item> all;
    all.reserve(x.size() + y.size());
    for (double v : x) all.push_back({v, true});
    for (double v : y) all.push_back({v, false});
    std::sort(all.begin(), all.end(), [](const Item& a, const Item& b) { return a.v < b.v; });
    const double n1 = double(x.size()), n2 = double(y.size()), n = n1 + n2;
    double rank_sum_x = 0.0, tie_term = 0.0;
    for (std::size_t i = 0; i < all.size();) {
        std::size_t j = i;
        while (j < all.size() && all[j].v == all[i].v) ++j;
        const double avg_rank = 0.5 * double(i + 1 + j);
        const double t = double(j - i);
        tie_term += t * t * t - t;
        for (std::size_t k = i; k < j; ++k)
            if (all[k].from_x) rank_sum_x += avg_rank;
        i = j;
    }
    const double u = rank_sum_x - n1 * (n1 + 1.0) / 2.0;
    const double mu = n1 * n2 / 2.0;
    const double var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if (var <= 0.0) return 0.5;
    return normal_sf((u - mu - 0.5) / std::sqrt(var));
}

}  // namespace wsperc
