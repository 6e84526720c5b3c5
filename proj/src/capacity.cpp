#include "wsperc/capacity.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "wsperc/error.hpp"
#include "wsperc/parallel.hpp"
#include "wsperc/stats.hpp"

namespace wsperc {

namespace {

constexpr double kPi = std::numbers::pi;

// 16-point Gauss-Legendre rule on [-1, 1], computed once by Newton iteration.
struct GaussLegendre16 {
    std::array<double, 16> x{}, w{};
    GaussLegendre16() {
        constexpr int n = 16;
        for (int i = 0; i < n; ++i) {
            double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = 0.0;
                for (int j = 1; j <= n; ++j) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
                }
                dp = n * (z * p0 - p1) / (z * z - 1.0);
                const double dz = p0 / dp;
                z -= dz;
                if (std::fabs(dz) < 1e-15) break;
            }
            x[static_cast<std::size_t>(i)] = z;
            w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - z * z) * dp * dp);
        }
    }
};

const GaussLegendre16& gauss16() {
    static const GaussLegendre16 rule;
    return rule;
}

template <class F>
double integrate(F f, double a, double b) {
    const auto& gl = gauss16();
    const double h = 0.5 * (b - a), c = 0.5 * (a + b);
    double s = 0.0;
    for (std::size_t i = 0; i < 16; ++i) s += gl.w[i] * f(c + h * gl.x[i]);
    return s * h;
}

void require_dim(const GreenKernel& k, int d, const char* who) {
    if (k.d != d) throw ConfigError(std::string(who) + ": dimension mismatch");
}

}  // namespace

GreenKernel make_green_kernel(int d) {
    check_run_dimension(d);
    GreenKernel k;
    k.d = d;
    k.normalizer = std::tgamma(d / 2.0 - 1.0) / (2.0 * std::pow(kPi, d / 2.0));
    k.kappa = 2.0 * std::pow(kPi, d / 2.0) / std::tgamma(d / 2.0 - 1.0);
    k.c_vol = std::pow(kPi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
    return k;
}

double green(const GreenKernel& k, const PointD& x, const PointD& y) {
    require(x.dim() == k.d && y.dim() == k.d, "green: dimension mismatch");
    const double rho = distance(x, y);
    if (rho == 0.0) throw SingularityError("green: x == y");
    return k.normalizer * std::pow(rho, 2.0 - k.d);
}

double ball_mean_green(const GreenKernel& k, double rho, double r) {
    if (rho >= r) return k.normalizer * std::pow(rho, 2.0 - k.d);
    const double d = k.d;
    return k.normalizer * (d / std::pow(r, d)) * (rho * rho / d + 0.5 * (r * r - rho * rho));
}

double g_star_radial(const GreenKernel& k, double rho) {
    if (k.d != 4) throw ConfigError("g_star: only defined for d = 4");
    if (rho >= 1.0) return 0.25 / (rho * rho);
    // Shell of radius s contributes |S^3| s^3 * normalizer * max(rho, s)^{-2}.
    const double shell = 2.0 * kPi * kPi * k.normalizer;
    const double inner = integrate([&](double s) { return s * s * s / (rho * rho); }, 0.0, rho);
    const double outer = integrate([](double s) { return s; }, rho, 1.0);
    return shell * ((rho > 0.0 ? inner : 0.0) + outer);
}

double g_star(const GreenKernel& k, const PointD& x) {
    if (k.d != 4 || x.dim() != 4) throw ConfigError("g_star: only defined for d = 4");
    return g_star_radial(k, x.norm());
}

std::string to_string(CapMethod m) {
    switch (m) {
        case CapMethod::hitting: return "hitting";
        case CapMethod::energy_lower: return "energy_lower";
        case CapMethod::zt_upper: return "zt_upper";
    }
    return "unknown";
}

// --- targets ------------------------------------------------------------------------------

BallTarget::BallTarget(PointD center, double radius) : center_(center), radius_(radius) {
    require(radius > 0.0, "BallTarget: radius must be > 0");
}

double BallTarget::surface_distance(const double* x) const {
    return std::sqrt(sq_dist(x, center_.data(), center_.dim())) - radius_;
}

BallUnionTarget::BallUnionTarget(std::vector<PointD> centers, std::vector<double> radii)
    : centers_(std::move(centers)), radii_(std::move(radii)) {
    require(!centers_.empty() && centers_.size() == radii_.size(), "BallUnionTarget: bad input");
    const int d = centers_.front().dim();
    Aabb box = Aabb::of_point(centers_.front());
    for (std::size_t i = 0; i < centers_.size(); ++i) {
        require(centers_[i].dim() == d, "BallUnionTarget: dimension mismatch");
        Aabb ball = Aabb::of_point(centers_[i]).inflated(radii_[i]);
        box.expand(ball.lo.coords());
        box.expand(ball.hi.coords());
    }
    center_ = box.center();
    enclosing_ = 0.0;
    for (std::size_t i = 0; i < centers_.size(); ++i)
        enclosing_ = std::max(enclosing_, distance(center_, centers_[i]) + radii_[i]);
}

double BallUnionTarget::surface_distance(const double* x) const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < centers_.size(); ++i)
        best = std::min(best, std::sqrt(sq_dist(x, centers_[i].data(), centers_[i].dim())) - radii_[i]);
    return best;
}

SausageTarget::SausageTarget(const Sausage& s) : s_(&s) {
    center_ = s.path().bounds().center();
    double m = 0.0;
    for (std::size_t k = 0; k < s.path().size(); ++k)
        m = std::max(m, sq_dist(center_.data(), s.path().point(k).data(), s.dim()));
    enclosing_ = std::sqrt(m) + s.radius();
}

// --- hitting estimator ----------------------------------------------------------------------

HittingParams sausage_hitting_params(double r, std::size_t n_walks) {
    HittingParams p;
    p.n_walks = n_walks;
    p.eps_hit = r / 100.0;
    return p;
}

CapacityEstimate cap_hitting(const GreenKernel& k, const CapacityTarget& target, RngStream& rng,
                             const HittingParams& params) {
    const int d = target.dim();
    require_dim(k, d, "cap_hitting");
    require(params.n_walks >= 1, "cap_hitting: n_walks must be >= 1");
    require(params.eps_hit > 0.0, "cap_hitting: eps_hit must be > 0");
    require(params.kill_factor > 1.0, "cap_hitting: kill_factor must exceed 1");
    const double m = target.enclosing_radius();
    const double launch = params.launch_radius > 0.0 ? params.launch_radius : 3.0 * m;
    if (launch < 3.0 * m * (1.0 - 1e-12))
        throw ConfigError("cap_hitting: launch radius must be >= 3 x enclosing radius");
    const double kill = params.kill_factor * launch;
    const PointD c = target.center();

    std::array<double, kMaxDim> x{}, u{};
    auto relaunch = [&] {
        sample_unit_vector(rng, d, u.data());
        for (int i = 0; i < d; ++i) x[i] = c[i] + launch * u[i];
    };

    RunningStats scores;
    constexpr double kMinWeight = 1e-12;
    constexpr std::size_t kMaxSteps = 10'000'000;
    for (std::size_t w = 0; w < params.n_walks; ++w) {
        relaunch();
        double weight = 1.0;
        double score = 0.0;
        for (std::size_t step = 0; step < kMaxSteps; ++step) {
            double dist = target.surface_distance_lower(x.data());
            if (dist <= params.eps_hit) {
                dist = target.surface_distance(x.data());
                if (dist <= params.eps_hit) {
                    score = weight;
                    break;
                }
            }
            const double rho = std::sqrt(sq_dist(x.data(), c.data(), d));
            if (rho > kill) {
                // Return to the launch sphere happens with probability (launch/rho)^{d-2}; the
                // return point is taken uniform on that sphere.
                weight *= std::pow(launch / rho, d - 2.0);
                if (weight < kMinWeight) break;
                relaunch();
                continue;
            }
            sample_unit_vector(rng, d, u.data());
            for (int i = 0; i < d; ++i) x[i] += dist * u[i];
        }
        scores.add(score);
    }

    const double factor = k.kappa * std::pow(launch, d - 2.0);
    CapacityEstimate e;
    e.method = CapMethod::hitting;
    e.value = factor * scores.mean();
    e.std_error = factor * scores.std_error();
    e.n_samples = params.n_walks;
    e.params = {{"launch_radius", launch}, {"eps_hit", params.eps_hit}, {"kill_radius", kill}};
    e.bias = "none";
    return e;
}

// --- energy lower bound -------------------------------------------------------------------

CapacityEstimate cap_energy_lower(const GreenKernel& k, const BrownianPath& path, double r,
                                  std::size_t n_pairs, RngStream& rng) {
    const int d = path.dim();
    require_dim(k, d, "cap_energy_lower");
    require(r > 0.0, "cap_energy_lower: r must be > 0");
    require(n_pairs >= 1000, "cap_energy_lower: n_pairs must be >= 1000");
    if (path.size() < 2 || !(path.horizon() > 0.0))
        throw ConfigError("cap_energy_lower: degenerate path (zero horizon)");
    const double t = path.horizon();
    std::array<double, kMaxDim> bu{}, bv{}, z{};
    RunningStats s;
    for (std::size_t i = 0; i < n_pairs; ++i) {
        path.interpolate(rng.uniform(0.0, t), bu.data());
        path.interpolate(rng.uniform(0.0, t), bv.data());
        sample_in_ball(rng, d, r, z.data());
        double rho2 = 0.0;
        for (int j = 0; j < d; ++j) {
            const double g = bu[j] + z[j] - bv[j];
            rho2 += g * g;
        }
        // Averaging over z' in B(B_v, r) analytically keeps the integrand bounded.
        s.add(ball_mean_green(k, std::sqrt(rho2), r));
    }
    CapacityEstimate e;
    e.method = CapMethod::energy_lower;
    e.value = 1.0 / s.mean();
    e.std_error = s.std_error() / (s.mean() * s.mean());
    e.n_samples = n_pairs;
    e.params = {{"r", r}, {"t", t}};
    e.bias = "lower";
    return e;
}

CapacityEstimate cap_energy_lower_measure(const GreenKernel& k, const MeasureSampler& sample,
                                          std::size_t n_pairs, RngStream& rng) {
    require(n_pairs >= 1000, "cap_energy_lower: n_pairs must be >= 1000");
    const int d = k.d;
    std::array<double, kMaxDim> x{}, y{};
    RunningStats s;
    for (std::size_t i = 0; i < n_pairs; ++i) {
        double rho2 = 0.0;
        do {
            sample(rng, x.data());
            sample(rng, y.data());
            rho2 = sq_dist(x.data(), y.data(), d);
        } while (rho2 == 0.0);
        s.add(k.normalizer * std::pow(rho2, 1.0 - d / 2.0));
    }
    CapacityEstimate e;
    e.method = CapMethod::energy_lower;
    e.value = 1.0 / s.mean();
    e.std_error = s.std_error() / (s.mean() * s.mean());
    e.n_samples = n_pairs;
    e.bias = "lower";
    return e;
}

// --- Z_t upper bound ------------------------------------------------------------------------

ZtBound cap_zt_upper(const GreenKernel& k, const BrownianPath& path, double quad_step) {
    if (k.d != 4 || path.dim() != 4) throw ConfigError("cap_zt_upper: only defined for d = 4");
    require(quad_step > 0.0, "cap_zt_upper: quad_step must be > 0");
    const double t = path.horizon();
    require(t >= 1.0, "cap_zt_upper: horizon must be >= 1");
    constexpr int d = 4;

    // Quadrature nodes u_m with trapezoid weights summing to t.
    std::vector<double> nodes;
    const auto n_full = static_cast<std::size_t>(std::floor(t / quad_step));
    for (std::size_t m = 0; m <= n_full; ++m) nodes.push_back(double(m) * quad_step);
    if (t - nodes.back() > 1e-12 * t) nodes.push_back(t);
    const std::size_t n = nodes.size();
    std::vector<double> weights(n, 0.0);
    for (std::size_t m = 0; m + 1 < n; ++m) {
        const double h = nodes[m + 1] - nodes[m];
        weights[m] += 0.5 * h;
        weights[m + 1] += 0.5 * h;
    }
    std::vector<double> pos(n * d);
    for (std::size_t m = 0; m < n; ++m) path.interpolate(nodes[m], pos.data() + m * d);

    // Unit directions: +-axes, the 16 diagonals, and away from the path centroid.
    std::vector<std::array<double, d>> dirs;
    for (int i = 0; i < d; ++i)
        for (double sgn : {1.0, -1.0}) {
            std::array<double, d> e{};
            e[static_cast<std::size_t>(i)] = sgn;
            dirs.push_back(e);
        }
    for (int mask = 0; mask < (1 << d); ++mask) {
        std::array<double, d> e{};
        for (int i = 0; i < d; ++i) e[static_cast<std::size_t>(i)] = ((mask >> i) & 1 ? -0.5 : 0.5);
        dirs.push_back(e);
    }
    std::array<double, d> centroid{};
    for (std::size_t m = 0; m < n; ++m)
        for (int i = 0; i < d; ++i) centroid[i] += pos[m * d + i] / double(n);

    ZtBound out;
    double best = std::numeric_limits<double>::infinity();
    std::size_t cand = 0;
    std::array<double, d> y{};
    auto evaluate = [&](const std::array<double, d>& yy) {
        double f = 0.0;
        for (std::size_t m = 0; m < n; ++m) {
            const double rho = std::sqrt(sq_dist(yy.data(), pos.data() + m * d, d));
            f += weights[m] * g_star_radial(k, rho);
        }
        if (f < best) {
            best = f;
            out.argmin = cand;
        }
        ++cand;
    };
    for (std::size_t m = 0; m < n; ++m) {
        const double* b = pos.data() + m * d;
        for (const auto& e : dirs) {
            for (int i = 0; i < d; ++i) y[i] = b[i] + e[i];
            evaluate(y);
        }
        double away = 0.0;
        for (int i = 0; i < d; ++i) away += (b[i] - centroid[i]) * (b[i] - centroid[i]);
        away = std::sqrt(away);
        if (away > 0.0) {
            for (int i = 0; i < d; ++i) y[i] = b[i] + (b[i] - centroid[i]) / away;
        } else {
            for (int i = 0; i < d; ++i) y[i] = b[i] + (i == 0 ? 1.0 : 0.0);
        }
        evaluate(y);
    }
    out.z_hat = best;
    out.n_candidates = cand;
    out.estimate.method = CapMethod::zt_upper;
    out.estimate.value = k.c_vol * t / best;
    out.estimate.std_error = 0.0;
    out.estimate.n_samples = n;
    out.estimate.params = {{"quad_step", quad_step}, {"t", t}, {"z_hat", best}};
    out.estimate.bias = "upper";
    return out;
}

// --- moments and tails ----------------------------------------------------------------------

double capacity_scale(int d, double t, double r) {
    require(r > 0.0 && t > 0.0, "capacity_scale: t and r must be positive");
    if (d == 4) {
        require(r != 1.0, "capacity_scale: |log r| vanishes at r = 1 in d = 4");
        return t / std::fabs(std::log(r));
    }
    return t * std::pow(r, d - 4.0);
}

std::vector<double> sample_sausage_caps(int d, double t, double r, std::size_t n_paths,
                                        const MomentParams& p, std::vector<double>* outradii) {
    const GreenKernel k = make_green_kernel(d);
    const double step = p.step > 0.0 ? p.step : default_step(r);
    std::vector<double> caps(n_paths, 0.0);
    if (outradii) outradii->assign(n_paths, 0.0);
    parallel_for(n_paths, p.workers, [&](std::size_t i) {
        RngStream path_rng(p.seed, derive_stream(p.seed, {0x5A5A, i}));
        RngStream walk_rng(p.seed, derive_stream(p.seed, {0xA5A5, i}));
        const Sausage s(static_cast<std::uint32_t>(i),
                        sample_brownian(path_rng, PointD(d), t, step), r);
        HittingParams hp = sausage_hitting_params(r, p.n_walks);
        hp.eps_hit = p.eps_factor * r;
        caps[i] = cap_hitting(k, SausageTarget(s), walk_rng, hp).value;
        if (outradii) (*outradii)[i] = s.outradius();
    });
    return caps;
}

MomentReport moment_report(int d, double t, double r, std::size_t n_paths, const MomentParams& p) {
    require(n_paths >= 100, "moment_report: n_paths must be >= 100");
    std::vector<double> outradii;
    const auto caps = sample_sausage_caps(d, t, r, n_paths, p, &outradii);
    MomentReport rep;
    rep.d = d;
    rep.t = t;
    rep.r = r;
    rep.n_paths = n_paths;
    RunningStats m1, m2, m4;
    std::size_t confined = 0;
    for (std::size_t i = 0; i < n_paths; ++i) {
        if (p.confine_cb && outradii[i] > *p.confine_cb * std::sqrt(t)) continue;
        ++confined;
        const double c = caps[i];
        m1.add(c);
        m2.add(c * c);
        m4.add(c * c * c * c);
        rep.caps.push_back(c);
    }
    rep.n_accepted = confined;
    rep.mean_cap = m1.mean();
    rep.mean_cap_se = m1.std_error();
    rep.second_moment = m2.mean();
    rep.second_moment_se = m2.std_error();
    rep.fourth_moment = m4.mean();
    rep.fourth_moment_se = m4.std_error();
    rep.p_confined = double(confined) / double(n_paths);
    rep.p_confined_se = std::sqrt(rep.p_confined * (1.0 - rep.p_confined) / double(n_paths));
    return rep;
}

TailReport tail_table(int d, double t, double r, const std::vector<double>& caps,
                      const std::vector<double>& thresholds) {
    require(!caps.empty(), "tail_table: no samples");
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        require(thresholds[i] >= 1.0, "tail_report: thresholds must be >= 1");
        if (i > 0) require(thresholds[i] > thresholds[i - 1], "tail_report: thresholds must increase");
    }
    TailReport rep;
    rep.d = d;
    rep.t = t;
    rep.r = r;
    rep.scale = capacity_scale(d, t, r);
    rep.n_paths = caps.size();
    std::vector<double> xs, ys;
    for (double j : thresholds) {
        TailRow row;
        row.j = j;
        row.threshold = j * rep.scale;
        row.count = static_cast<std::size_t>(
            std::count_if(caps.begin(), caps.end(), [&](double c) { return c >= row.threshold; }));
        row.exceedance = double(row.count) / double(caps.size());
        const Interval ci = wilson_interval(row.count, caps.size());
        row.ci_lo = ci.lo;
        row.ci_hi = ci.hi;
        rep.rows.push_back(row);
        if (row.count > 0) {
            xs.push_back(j);
            ys.push_back(std::log(row.exceedance));
        }
    }
    rep.slope_points = xs.size();
    if (xs.size() >= 2) {
        const LinearFit f = least_squares(xs, ys);
        rep.slope = f.slope;
        rep.slope_se = f.slope_se;
    }
    return rep;
}

TailReport tail_report(int d, double t, double r, std::size_t n_paths,
                       const std::vector<double>& thresholds, const MomentParams& p) {
    const auto caps = sample_sausage_caps(d, t, r, n_paths, p);
    return tail_table(d, t, r, caps, thresholds);
}

PathPairMoment green_pathpair_moment(int d, double t, std::size_t n_samples, RngStream& rng) {
    require(t >= 2.0, "green_pathpair_moment: t must be >= 2");
    require(n_samples >= 2, "green_pathpair_moment: need at least two samples");
    const GreenKernel k = make_green_kernel(d);
    std::array<double, kMaxDim> z{};
    RunningStats s;
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double u = rng.uniform(0.0, t), v = rng.uniform(0.0, t);
        const double sd = std::sqrt(std::fabs(u - v));
        sample_in_ball(rng, d, 1.0, z.data());
        double rho2 = 0.0;
        for (int j = 0; j < d; ++j) {
            const double g = sd * rng.normal() + z[j];
            rho2 += g * g;
        }
        s.add(ball_mean_green(k, std::sqrt(rho2), 1.0));
    }
    const double factor = t * t * k.c_vol * k.c_vol;
    const double norm = d == 4 ? t * std::log(t) : t;
    PathPairMoment out;
    out.raw = factor * s.mean();
    out.value = out.raw / norm;
    out.std_error = factor * s.std_error() / norm;
    out.n_samples = n_samples;
    return out;
}

}  // namespace wsperc
