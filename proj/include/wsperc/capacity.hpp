#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wsperc/geometry.hpp"
#include "wsperc/rng.hpp"
#include "wsperc/sausage.hpp"
#include "wsperc/stochastic.hpp"

namespace wsperc {

/// Newtonian Green kernel G(x,y) = normalizer * |x-y|^{2-d} and its companion constants.
struct GreenKernel {
    int d = 0;
    double normalizer = 0.0;  ///< Gamma(d/2-1) / (2 pi^{d/2})
    double kappa = 0.0;       ///< capacity of the unit ball, 1 / normalizer
    double c_vol = 0.0;       ///< volume of the unit ball
};

GreenKernel make_green_kernel(int d);

/// G(x, y). Throws SingularityError when x == y.
double green(const GreenKernel& k, const PointD& x, const PointD& y);

/// Mean of G(x, .) over the uniform ball of radius `r` whose centre is at distance `rho`
/// from x (Newton's shell theorem; bounded by (d/2) r^{2-d} * normalizer).
double ball_mean_green(const GreenKernel& k, double rho, double r);

/// G*(x) = integral of G(x, z) over z in B(0,1); d = 4 only. Closed form 1/(4|x|^2) outside
/// the unit ball, fixed-order Gauss-Legendre radial quadrature inside.
double g_star(const GreenKernel& k, const PointD& x);
double g_star_radial(const GreenKernel& k, double rho);

enum class CapMethod { hitting, energy_lower, zt_upper };
std::string to_string(CapMethod m);

struct CapacityEstimate {
    double value = 0.0;
    double std_error = 0.0;
    CapMethod method = CapMethod::hitting;
    std::size_t n_samples = 0;
    std::map<std::string, double> params;
    /// "none" for hitting (up to the eps_hit inflation), "lower" or "upper" otherwise.
    std::string bias;
};

/// Bounded set seen by the walk-on-spheres estimator.
class CapacityTarget {
public:
    virtual ~CapacityTarget() = default;
    virtual int dim() const = 0;
    /// Signed distance to the boundary (<= 0 inside).
    virtual double surface_distance(const double* x) const = 0;
    /// Any value not exceeding surface_distance(x); defaults to the exact one.
    virtual double surface_distance_lower(const double* x) const { return surface_distance(x); }
    virtual PointD center() const = 0;
    /// Radius of a ball around center() that contains the set.
    virtual double enclosing_radius() const = 0;
};

class BallTarget final : public CapacityTarget {
public:
    BallTarget(PointD center, double radius);
    int dim() const override { return center_.dim(); }
    double surface_distance(const double* x) const override;
    PointD center() const override { return center_; }
    double enclosing_radius() const override { return radius_; }

private:
    PointD center_;
    double radius_;
};

class BallUnionTarget final : public CapacityTarget {
public:
    BallUnionTarget(std::vector<PointD> centers, std::vector<double> radii);
    int dim() const override { return centers_.front().dim(); }
    double surface_distance(const double* x) const override;
    PointD center() const override { return center_; }
    double enclosing_radius() const override { return enclosing_; }

private:
    std::vector<PointD> centers_;
    std::vector<double> radii_;
    PointD center_;
    double enclosing_;
};

class SausageTarget final : public CapacityTarget {
public:
    explicit SausageTarget(const Sausage& s);
    int dim() const override { return s_->dim(); }
    double surface_distance(const double* x) const override { return s_->surface_distance(x); }
    double surface_distance_lower(const double* x) const override {
        return s_->surface_distance_lower(x);
    }
    PointD center() const override { return center_; }
    double enclosing_radius() const override { return enclosing_; }

private:
    const Sausage* s_;
    PointD center_;
    double enclosing_;
};

struct HittingParams {
    std::size_t n_walks = 10000;
    double launch_radius = 0.0;  ///< 0 selects 3 * enclosing radius
    double eps_hit = 1e-3;
    double kill_factor = 100.0;  ///< kill radius = kill_factor * launch radius
};

/// Walk-on-spheres estimate of cap(A) = kappa_d R^{d-2} P(walk from the launch sphere hits A).
CapacityEstimate cap_hitting(const GreenKernel& k, const CapacityTarget& target, RngStream& rng,
                             const HittingParams& params);

/// Hitting defaults for a sausage: eps_hit = r/100.
HittingParams sausage_hitting_params(double r, std::size_t n_walks);

/// 1/I(nu) for the occupation measure of the tube of radius r around `path`; a lower bound in
/// expectation. The z' ball integral is done in closed form.
CapacityEstimate cap_energy_lower(const GreenKernel& k, const BrownianPath& path, double r,
                                  std::size_t n_pairs, RngStream& rng);

/// Generic energy estimate 1/mean G(X, Y) for X, Y i.i.d. from `sample`; coincident pairs are
/// resampled.
using MeasureSampler = std::function<void(RngStream&, double*)>;
CapacityEstimate cap_energy_lower_measure(const GreenKernel& k, const MeasureSampler& sample,
                                          std::size_t n_pairs, RngStream& rng);

struct ZtBound {
    CapacityEstimate estimate;
    double z_hat = 0.0;
    std::size_t argmin = 0;  ///< index of the minimizing candidate point
    std::size_t n_candidates = 0;
};

/// Upper bound c_vol t / Z_t for the radius-1 sausage of `path` in d = 4. The infimum is taken
/// over tube-boundary candidates B_u + e for unit directions e at each quadrature node.
ZtBound cap_zt_upper(const GreenKernel& k, const BrownianPath& path, double quad_step);

// --- moment and tail statistics -------------------------------------------------------------

struct MomentParams {
    std::size_t n_walks = 1000;       ///< walks per sausage
    double eps_factor = 0.01;         ///< eps_hit = eps_factor * r
    double step = 0.0;                ///< 0 selects (r/4)^2
    std::optional<double> confine_cb; ///< restrict to W inside B(0, c_B sqrt(t))
    std::uint64_t seed = 1;
    unsigned workers = 1;
};

struct MomentReport {
    int d = 0;
    double t = 0.0, r = 0.0;
    std::size_t n_paths = 0;      ///< paths sampled
    std::size_t n_accepted = 0;   ///< paths kept (all, unless confined)
    double mean_cap = 0.0, mean_cap_se = 0.0;
    double second_moment = 0.0, second_moment_se = 0.0;
    double fourth_moment = 0.0, fourth_moment_se = 0.0;
    double p_confined = 1.0, p_confined_se = 0.0;
    std::vector<double> caps;     ///< per accepted path, in path order
};

/// Capacity samples of independent sausages W^{0,r}_{[0,t]}; path i uses stream (seed, i).
std::vector<double> sample_sausage_caps(int d, double t, double r, std::size_t n_paths,
                                        const MomentParams& p,
                                        std::vector<double>* outradii = nullptr);

MomentReport moment_report(int d, double t, double r, std::size_t n_paths, const MomentParams& p);

struct TailRow {
    double j = 0.0;
    double threshold = 0.0;
    std::size_t count = 0;
    double exceedance = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0;
};

struct TailReport {
    int d = 0;
    double t = 0.0, r = 0.0, scale = 0.0;
    std::size_t n_paths = 0;
    std::vector<TailRow> rows;
    /// Least-squares slope of log exceedance against j over rows with positive counts.
    double slope = 0.0, slope_se = 0.0;
    std::size_t slope_points = 0;
};

/// t r^{d-4} for d >= 5, t / |log r| for d = 4.
double capacity_scale(int d, double t, double r);

TailReport tail_report(int d, double t, double r, std::size_t n_paths,
                       const std::vector<double>& thresholds, const MomentParams& p);
/// Tail table from precomputed capacity samples.
TailReport tail_table(int d, double t, double r, const std::vector<double>& caps,
                      const std::vector<double>& thresholds);

struct PathPairMoment {
    double value = 0.0;       ///< normalized by t (d >= 5) or t log t (d = 4)
    double std_error = 0.0;
    double raw = 0.0;         ///< un-normalized estimate
    std::size_t n_samples = 0;
};

/// E of the four-fold integral of G(B_u + z, B_v + z') over u, v in [0,t], z, z' in B(0,1).
PathPairMoment green_pathpair_moment(int d, double t, std::size_t n_samples, RngStream& rng);

}  // namespace wsperc
