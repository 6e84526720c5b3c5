#include "wsperc/stochastic.hpp"

#include <algorithm>
#include <cmath>

#include "wsperc/error.hpp"

namespace wsperc {

BrownianPath::BrownianPath(int dim, double step, std::vector<double> positions,
                           std::vector<double> times)
    : dim_(dim), step_(step), positions_(std::move(positions)), times_(std::move(times)) {
    require(dim >= 1 && dim <= kMaxDim, "BrownianPath: dimension out of range");
    require(!times_.empty(), "BrownianPath: empty path");
    require(positions_.size() == times_.size() * static_cast<std::size_t>(dim),
            "BrownianPath: positions/times size mismatch");
}

BrownianPath BrownianPath::frozen(const PointD& start, double horizon, double step) {
    require(horizon >= 0.0 && step > 0.0, "frozen path: need horizon >= 0 and step > 0");
    const int d = start.dim();
    std::vector<double> times{0.0};
    const auto n_full = static_cast<std::size_t>(std::floor(horizon / step));
    for (std::size_t k = 1; k <= n_full; ++k) times.push_back(double(k) * step);
    if (horizon - times.back() > 1e-12 * std::max(1.0, horizon)) times.push_back(horizon);
    std::vector<double> pos;
    pos.reserve(times.size() * static_cast<std::size_t>(d));
    for (std::size_t k = 0; k < times.size(); ++k) pos.insert(pos.end(), start.data(), start.data() + d);
    return BrownianPath(d, step, std::move(pos), std::move(times));
}

BrownianPath BrownianPath::from_points(std::span<const PointD> points, std::span<const double> times) {
    require(!points.empty() && points.size() == times.size(), "from_points: size mismatch");
    const int d = points[0].dim();
    std::vector<double> pos;
    for (const auto& p : points) {
        require(p.dim() == d, "from_points: dimension mismatch");
        pos.insert(pos.end(), p.data(), p.data() + d);
    }
    for (std::size_t k = 1; k < times.size(); ++k)
        require(times[k] >= times[k - 1], "from_points: times must be non-decreasing");
    const double step = times.size() > 1 ? times[1] - times[0] : 0.0;
    return BrownianPath(d, step, std::move(pos), std::vector<double>(times.begin(), times.end()));
}

void BrownianPath::interpolate(double s, double* out) const {
    const auto it = std::upper_bound(times_.begin(), times_.end(), s);
    if (it == times_.begin()) {
        std::copy_n(point(0).data(), dim_, out);
        return;
    }
    if (it == times_.end()) {
        std::copy_n(point(size() - 1).data(), dim_, out);
        return;
    }
    const auto k = static_cast<std::size_t>(it - times_.begin()) - 1;
    const double h = times_[k + 1] - times_[k];
    const double w = h > 0.0 ? (s - times_[k]) / h : 0.0;
    const auto a = point(k);
    const auto b = point(k + 1);
    for (int i = 0; i < dim_; ++i) out[i] = a[i] + w * (b[i] - a[i]);
}

BrownianPath BrownianPath::truncated(double t_cut) const {
    std::size_t n = 1;
    while (n < size() && times_[n] <= t_cut) ++n;
    std::vector<double> pos(positions_.begin(),
                            positions_.begin() + static_cast<std::ptrdiff_t>(n * dim_));
    std::vector<double> t(times_.begin(), times_.begin() + static_cast<std::ptrdiff_t>(n));
    return BrownianPath(dim_, step_, std::move(pos), std::move(t));
}

BrownianPath BrownianPath::translated(const PointD& shift) const {
    require(shift.dim() == dim_, "translated: dimension mismatch");
    std::vector<double> pos = positions_;
    for (std::size_t k = 0; k < size(); ++k)
        for (int i = 0; i < dim_; ++i) pos[k * dim_ + i] += shift[i];
    return BrownianPath(dim_, step_, std::move(pos), times_);
}

BrownianPath BrownianPath::scaled(double a) const {
    std::vector<double> pos = positions_;
    for (auto& x : pos) x *= a;
    std::vector<double> t = times_;
    for (auto& s : t) s *= a * a;
    return BrownianPath(dim_, step_ * a * a, std::move(pos), std::move(t));
}

double BrownianPath::max_excursion() const {
    double m = 0.0;
    const double* x0 = positions_.data();
    for (std::size_t k = 1; k < size(); ++k)
        m = std::max(m, sq_dist(x0, positions_.data() + k * dim_, dim_));
    return std::sqrt(m);
}

Aabb BrownianPath::bounds() const {
    Aabb b = Aabb::of_point(point_d(0));
    for (std::size_t k = 1; k < size(); ++k) b.expand(point(k));
    return b;
}

BrownianPath sample_brownian(RngStream& rng, const PointD& start, double t, double delta) {
    if (!(t > 0.0) || !(delta > 0.0))
        throw ConfigError("sample_brownian: horizon and step must be positive");
    const int d = start.dim();
    const double ratio = t / delta;
    auto n_full = static_cast<std::size_t>(std::floor(ratio));
    double rem = t - double(n_full) * delta;
    if (std::fabs(ratio - std::round(ratio)) <= 1e-9 * std::max(1.0, ratio)) {
        n_full = static_cast<std::size_t>(std::round(ratio));
        rem = 0.0;
    }

    const std::size_t n = n_full + 1 + (rem > 0.0 ? 1 : 0);
    std::vector<double> times(n);
    std::vector<double> pos(n * static_cast<std::size_t>(d));
    std::copy_n(start.data(), d, pos.data());
    times[0] = 0.0;
    const double sd = std::sqrt(delta);
    for (std::size_t k = 1; k <= n_full; ++k) {
        times[k] = double(k) * delta;
        const double* prev = pos.data() + (k - 1) * d;
        double* cur = pos.data() + k * d;
        for (int i = 0; i < d; ++i) cur[i] = prev[i] + sd * rng.normal();
    }
    if (rem > 0.0) {
        times[n - 1] = t;
        const double sr = std::sqrt(rem);
        const double* prev = pos.data() + (n - 2) * d;
        double* cur = pos.data() + (n - 1) * d;
        for (int i = 0; i < d; ++i) cur[i] = prev[i] + sr * rng.normal();
    }
    return BrownianPath(d, delta, std::move(pos), std::move(times));
}

BrownianPath refine_bridge(const BrownianPath& path, int levels, RngStream& rng) {
    require(levels >= 0, "refine_bridge: levels must be >= 0");
    BrownianPath cur = path;
    const int d = path.dim();
    for (int level = 0; level < levels; ++level) {
        const std::size_t n = cur.size();
        std::vector<double> times;
        std::vector<double> pos;
        times.reserve(2 * n - 1);
        pos.reserve((2 * n - 1) * d);
        for (std::size_t k = 0; k < n; ++k) {
            if (k > 0) {
                const double h = cur.time(k) - cur.time(k - 1);
                const double sd = std::sqrt(h / 4.0);
                const auto a = cur.point(k - 1);
                const auto b = cur.point(k);
                for (int i = 0; i < d; ++i) pos.push_back(0.5 * (a[i] + b[i]) + sd * rng.normal());
                times.push_back(0.5 * (cur.time(k - 1) + cur.time(k)));
            }
            const auto p = cur.point(k);
            pos.insert(pos.end(), p.begin(), p.end());
            times.push_back(cur.time(k));
        }
        cur = BrownianPath(d, cur.step() / 2.0, std::move(pos), std::move(times));
    }
    return cur;
}

PoissonCloud sample_poisson_cloud(RngStream& rng, const Aabb& box, double intensity) {
    if (!(intensity > 0.0)) throw ConfigError("sample_poisson_cloud: intensity must be > 0");
    PoissonCloud cloud{box, intensity, {}};
    const double vol = box.volume();
    if (vol <= 0.0) return cloud;
    const std::uint64_t n = rng.poisson(intensity * vol);
    cloud.points.reserve(n);
    const int d = box.dim();
    for (std::uint64_t k = 0; k < n; ++k) {
        PointD p(d);
        for (int i = 0; i < d; ++i) p[i] = rng.uniform(box.lo[i], box.hi[i]);
        cloud.points.push_back(p);
    }
    return cloud;
}

void sample_unit_vector(RngStream& rng, int d, double* out) {
    double s = 0.0;
    do {
        s = 0.0;
        for (int i = 0; i < d; ++i) {
            out[i] = rng.normal();
            s += out[i] * out[i];
        }
    } while (s == 0.0);
    const double inv = 1.0 / std::sqrt(s);
    for (int i = 0; i < d; ++i) out[i] *= inv;
}

void sample_in_ball(RngStream& rng, int d, double radius, double* out) {
    sample_unit_vector(rng, d, out);
    const double rho = radius * std::pow(rng.uniform(), 1.0 / d);
    for (int i = 0; i < d; ++i) out[i] *= rho;
}

}  // namespace wsperc
