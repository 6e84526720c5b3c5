#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "wsperc/rng.hpp"

namespace wsperc {

/// Mergeable running mean/variance (Chan et al. pairwise update).
class RunningStats {
public:
    void add(double x);
    void merge(const RunningStats& o);
    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const { return n_ > 1 ? m2_ / double(n_ - 1) : 0.0; }
    double std_error() const;

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Wilson score interval for k successes out of n.
Interval wilson_interval(std::size_t k, std::size_t n, double z = 1.959963984540054);

/// Sample quantile, linear interpolation between order statistics (type 7).
double quantile(std::vector<double> values, double q);
double median(std::vector<double> values);

/// Percentile bootstrap interval of the median.
Interval bootstrap_median_ci(std::span<const double> values, std::size_t n_resamples,
                             RngStream& rng, double level = 0.95);

struct LinearFit {
    double slope = 0.0, intercept = 0.0;
    double slope_se = 0.0, intercept_se = 0.0;
    std::vector<double> residuals;
};

/// Ordinary least squares y = intercept + slope x. Throws ConfigError when all x coincide or
/// fewer than two points are supplied.
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

/// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// One-sided Mann-Whitney test of "x tends to be larger than y" (normal approximation with tie
/// correction); returns the p-value.
double mann_whitney_greater(std::span<const double> x, std::span<const double> y);

/// Standard normal upper tail probability.
double normal_sf(double z);

}  // namespace wsperc
