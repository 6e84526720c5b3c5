#include "wsperc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wsperc/error.hpp"

namespace wsperc {

void check_run_dimension(int d) {
    if (d < 3 || d > kMaxDim)
        throw ConfigError("dimension must lie in [3, 8], got " + std::to_string(d));
}

PointD::PointD(int dim) : dim_(dim) {
    require(dim >= 1 && dim <= kMaxDim, "point dimension out of range");
}

PointD::PointD(std::initializer_list<double> coords) : dim_(static_cast<int>(coords.size())) {
    require(dim_ >= 1 && dim_ <= kMaxDim, "point dimension out of range");
    std::copy(coords.begin(), coords.end(), c_.begin());
}

PointD::PointD(std::span<const double> coords) : dim_(static_cast<int>(coords.size())) {
    require(dim_ >= 1 && dim_ <= kMaxDim, "point dimension out of range");
    std::copy(coords.begin(), coords.end(), c_.begin());
}

double PointD::norm() const {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) s += c_[i] * c_[i];
    return std::sqrt(s);
}

bool PointD::operator==(const PointD& o) const {
    if (dim_ != o.dim_) return false;
    for (int i = 0; i < dim_; ++i)
        if (c_[i] != o.c_[i]) return false;
    return true;
}

double distance(const PointD& x, const PointD& y) {
    require(x.dim() == y.dim(), "dimension mismatch");
    return std::sqrt(sq_dist(x.data(), y.data(), x.dim()));
}

Aabb Aabb::cube(int dim, double lo, double hi) {
    Aabb b{PointD(dim), PointD(dim)};
    for (int i = 0; i < dim; ++i) {
        b.lo[i] = lo;
        b.hi[i] = hi;
    }
    return b;
}

Aabb Aabb::of_point(const PointD& p) { return Aabb{p, p}; }

double Aabb::volume() const {
    double v = 1.0;
    for (int i = 0; i < dim(); ++i) v *= std::max(0.0, hi[i] - lo[i]);
    return v;
}

double Aabb::longest_edge() const {
    double e = 0.0;
    for (int i = 0; i < dim(); ++i) e = std::max(e, hi[i] - lo[i]);
    return e;
}

bool Aabb::contains(const PointD& p) const {
    for (int i = 0; i < dim(); ++i)
        if (p[i] < lo[i] || p[i] > hi[i]) return false;
    return true;
}

bool Aabb::overlaps(const Aabb& o) const {
    for (int i = 0; i < dim(); ++i)
        if (o.hi[i] < lo[i] || o.lo[i] > hi[i]) return false;
    return true;
}

Aabb Aabb::inflated(double margin) const {
    Aabb b = *this;
    for (int i = 0; i < dim(); ++i) {
        b.lo[i] -= margin;
        b.hi[i] += margin;
    }
    return b;
}

void Aabb::expand(std::span<const double> p) {
    for (int i = 0; i < dim(); ++i) {
        lo[i] = std::min(lo[i], p[i]);
        hi[i] = std::max(hi[i], p[i]);
    }
}

double Aabb::distance_to(const Aabb& o) const {
    return std::sqrt(box_box_dist_sq(lo.data(), hi.data(), o.lo.data(), o.hi.data(), dim()));
}

PointD Aabb::center() const {
    PointD c(dim());
    for (int i = 0; i < dim(); ++i) c[i] = 0.5 * (lo[i] + hi[i]);
    return c;
}

double sq_dist(const double* x, const double* y, int d) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
        const double t = x[i] - y[i];
        s += t * t;
    }
    return s;
}

double point_segment_dist_sq(const double* p, const double* a, const double* b, int d) {
    double ab2 = 0.0, ap_ab = 0.0;
    for (int i = 0; i < d; ++i) {
        const double e = b[i] - a[i];
        ab2 += e * e;
        ap_ab += (p[i] - a[i]) * e;
    }
    double u = 0.0;
    if (ab2 > 0.0) u = std::clamp(ap_ab / ab2, 0.0, 1.0);
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
        const double t = p[i] - (a[i] + u * (b[i] - a[i]));
        s += t * t;
    }
    return s;
}

// Closest points of two segments, parametrized over [0,1]^2. Interior stationary point
// first, then clamped onto the square edges; degenerate segments reduce to
// point-segment queries.
double segment_segment_dist_sq(const double* a1, const double* b1, const double* a2,
                               const double* b2, int d) {
    double a = 0.0, e = 0.0, f = 0.0, c = 0.0, b = 0.0;
    for (int i = 0; i < d; ++i) {
        const double d1 = b1[i] - a1[i];
        const double d2 = b2[i] - a2[i];
        const double r = a1[i] - a2[i];
        a += d1 * d1;
        e += d2 * d2;
        f += d2 * r;
        c += d1 * r;
        b += d1 * d2;
    }
    double s = 0.0, t = 0.0;
    if (a <= 0.0 && e <= 0.0) {
        s = t = 0.0;
    } else if (a <= 0.0) {
        s = 0.0;
        t = std::clamp(f / e, 0.0, 1.0);
    } else if (e <= 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
    } else {
        const double denom = a * e - b * b;
        s = denom > 0.0 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
        t = (b * s + f) / e;
        if (t < 0.0) {
            t = 0.0;
            s = std::clamp(-c / a, 0.0, 1.0);
        } else if (t > 1.0) {
            t = 1.0;
            s = std::clamp((b - c) / a, 0.0, 1.0);
        }
    }
    double sum = 0.0;
    for (int i = 0; i < d; ++i) {
        const double p1 = a1[i] + s * (b1[i] - a1[i]);
        const double p2 = a2[i] + t * (b2[i] - a2[i]);
        sum += (p1 - p2) * (p1 - p2);
    }
    return sum;
}

double box_box_dist_sq(const double* lo1, const double* hi1, const double* lo2,
                       const double* hi2, int d) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
        double g = 0.0;
        if (hi1[i] < lo2[i])
            g = lo2[i] - hi1[i];
        else if (hi2[i] < lo1[i])
            g = lo1[i] - hi2[i];
        s += g * g;
    }
    return s;
}

double segment_distance(const Segment& s1, const Segment& s2) {
    const int d = s1.a.dim();
    if (s1.b.dim() != d || s2.a.dim() != d || s2.b.dim() != d)
        throw ConfigError("segment_distance: dimension mismatch");
    return std::sqrt(
        segment_segment_dist_sq(s1.a.data(), s1.b.data(), s2.a.data(), s2.b.data(), d));
}

double polyline_distance(std::span<const Segment> p1, std::span<const Segment> p2,
                         double early_exit) {
    require(!p1.empty() && !p2.empty(), "polyline_distance: empty polyline");
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s1 : p1) {
        for (const auto& s2 : p2) {
            best = std::min(best, segment_distance(s1, s2));
            if (best < early_exit) return best;
        }
    }
    return best;
}

// --- GridIndex ---------------------------------------------------------------

std::size_t GridIndex::KeyHash::operator()(const Key& k) const {
    std::uint64_t h = 0x9E3779B97F4A7C15ULL;
    for (auto v : k.c) {
        h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(v)) + 0x9E3779B97F4A7C15ULL +
             (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
}

GridIndex::GridIndex(int dim, double cell_size) : dim_(dim), cell_size_(cell_size) {
    require(dim >= 1 && dim <= kMaxDim, "GridIndex: dimension out of range");
    require(cell_size > 0.0 && std::isfinite(cell_size), "GridIndex: cell_size must be > 0");
}

void GridIndex::cell_range(const Aabb& box, Key& lo, Key& hi) const {
    for (int i = 0; i < dim_; ++i) {
        lo.c[i] = static_cast<std::int32_t>(std::floor(box.lo[i] / cell_size_));
        hi.c[i] = static_cast<std::int32_t>(std::floor(box.hi[i] / cell_size_));
    }
}

void GridIndex::insert(std::uint32_t id, const Aabb& box) {
    require(box.dim() == dim_, "GridIndex::insert: dimension mismatch");
    Key lo, hi;
    cell_range(box, lo, hi);
    Key cur = lo;
    while (true) {
        cells_[cur].push_back(id);
        int i = 0;
        for (; i < dim_; ++i) {
            if (cur.c[i] < hi.c[i]) {
                ++cur.c[i];
                break;
            }
            cur.c[i] = lo.c[i];
        }
        if (i == dim_) break;
    }
    ++n_items_;
}

std::vector<std::uint32_t> GridIndex::candidates(const Aabb& query) const {
    std::vector<std::uint32_t> out;
    if (cells_.empty()) return out;
    require(query.dim() == dim_, "GridIndex::candidates: dimension mismatch");
    Key lo, hi;
    cell_range(query, lo, hi);
    double range_cells = 1.0;
    for (int i = 0; i < dim_; ++i) range_cells *= double(hi.c[i]) - double(lo.c[i]) + 1.0;

    if (range_cells > double(cells_.size())) {
        for (const auto& [key, ids] : cells_) {
            bool inside = true;
            for (int i = 0; i < dim_ && inside; ++i)
                inside = key.c[i] >= lo.c[i] && key.c[i] <= hi.c[i];
            if (inside) out.insert(out.end(), ids.begin(), ids.end());
        }
    } else {
        Key cur = lo;
        while (true) {
            if (auto it = cells_.find(cur); it != cells_.end())
                out.insert(out.end(), it->second.begin(), it->second.end());
            int i = 0;
            for (; i < dim_; ++i) {
                if (cur.c[i] < hi.c[i]) {
                    ++cur.c[i];
                    break;
                }
                cur.c[i] = lo.c[i];
            }
            if (i == dim_) break;
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double GridIndex::default_cell_size(std::span<const Aabb> boxes) {
    if (boxes.empty()) return 1.0;
    std::vector<double> edges;
    edges.reserve(boxes.size());
    for (const auto& b : boxes) edges.push_back(b.longest_edge());
    const std::size_t k = std::min(edges.size() - 1, (edges.size() * 9) / 10);
    std::nth_element(edges.begin(), edges.begin() + static_cast<std::ptrdiff_t>(k), edges.end());
    const double e = edges[k];
    return e > 0.0 ? e : 1.0;
}

}  // namespace wsperc
