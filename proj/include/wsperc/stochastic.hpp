#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "wsperc/geometry.hpp"
#include "wsperc/rng.hpp"

namespace wsperc {

/// Discretized Brownian trajectory. Positions are stored flat (stride = dim) together with
/// their sampling times; times[0] = 0 and times.back() = horizon.
class BrownianPath {
public:
    BrownianPath() = default;
    BrownianPath(int dim, double step, std::vector<double> positions, std::vector<double> times);

    /// Path that stays at `start` for the whole horizon, sampled on the usual grid.
    static BrownianPath frozen(const PointD& start, double horizon, double step);
    /// Hand-built path from explicit points and times.
    static BrownianPath from_points(std::span<const PointD> points, std::span<const double> times);

    int dim() const { return dim_; }
    double step() const { return step_; }
    double horizon() const { return times_.empty() ? 0.0 : times_.back(); }
    std::size_t size() const { return times_.size(); }
    std::span<const double> point(std::size_t k) const {
        return {positions_.data() + k * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
    }
    PointD point_d(std::size_t k) const { return PointD(point(k)); }
    PointD start() const { return point_d(0); }
    double time(std::size_t k) const { return times_[k]; }
    std::span<const double> times() const { return times_; }
    std::span<const double> positions() const { return positions_; }

    /// Position at an arbitrary time in [0, horizon] by linear interpolation.
    void interpolate(double s, double* out) const;
    /// Keeps the sample points with time <= t_cut (at least the start point).
    BrownianPath truncated(double t_cut) const;
    /// Same path translated by `shift`.
    BrownianPath translated(const PointD& shift) const;
    /// Same path scaled in space by `a` and in time by `a^2`.
    BrownianPath scaled(double a) const;
    /// sup_k ||B_k - B_0||.
    double max_excursion() const;
    Aabb bounds() const;

private:
    int dim_ = 0;
    double step_ = 0.0;
    std::vector<double> positions_;
    std::vector<double> times_;
};

/// Increments are i.i.d. N(0, delta I); a final partial step of length t - floor(t/delta)*delta
/// is added when nonzero.
BrownianPath sample_brownian(RngStream& rng, const PointD& start, double t, double delta);

/// Halves every step `levels` times by Brownian-bridge midpoint insertion.
BrownianPath refine_bridge(const BrownianPath& path, int levels, RngStream& rng);

struct PoissonCloud {
    Aabb box;
    double intensity = 0.0;
    std::vector<PointD> points;
};

PoissonCloud sample_poisson_cloud(RngStream& rng, const Aabb& box, double intensity);

/// Uniform direction on the unit sphere S^{d-1}.
void sample_unit_vector(RngStream& rng, int d, double* out);
/// Uniform point in the ball B(0, radius).
void sample_in_ball(RngStream& rng, int d, double radius, double* out);

/// Default time step (r/4)^2.
inline double default_step(double r) { return (r / 4.0) * (r / 4.0); }

}  // namespace wsperc
