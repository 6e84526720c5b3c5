#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <unordered_map>
#include <vector>

namespace wsperc {

inline constexpr int kMaxDim = 8;

/// Throws ConfigError unless `d` is a supported run dimension (3..8).
void check_run_dimension(int d);

/// Fixed-capacity point in R^d, d <= kMaxDim.
class PointD {
public:
    PointD() = default;
    explicit PointD(int dim);
    PointD(std::initializer_list<double> coords);
    explicit PointD(std::span<const double> coords);

    int dim() const { return dim_; }
    double& operator[](int i) { return c_[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }
    const double* data() const { return c_.data(); }
    double* data() { return c_.data(); }
    std::span<const double> coords() const { return {c_.data(), static_cast<std::size_t>(dim_)}; }

    double norm() const;
    bool operator==(const PointD& o) const;

private:
    std::array<double, kMaxDim> c_{};
    int dim_ = 0;
};

double distance(const PointD& x, const PointD& y);

struct Segment {
    PointD a;
    PointD b;
    double t_start = 0.0;
    double t_end = 0.0;
};

struct Aabb {
    PointD lo;
    PointD hi;

    static Aabb cube(int dim, double lo, double hi);
    static Aabb of_point(const PointD& p);

    int dim() const { return lo.dim(); }
    double volume() const;
    double longest_edge() const;
    bool contains(const PointD& p) const;
    bool overlaps(const Aabb& o) const;
    Aabb inflated(double margin) const;
    void expand(std::span<const double> p);
    double distance_to(const Aabb& o) const;
    PointD center() const;
};

// Raw kernels over contiguous coordinate arrays of length d.
double sq_dist(const double* x, const double* y, int d);
double point_segment_dist_sq(const double* p, const double* a, const double* b, int d);
double segment_segment_dist_sq(const double* a1, const double* b1, const double* a2,
                               const double* b2, int d);
/// Squared distance between the boxes [lo1,hi1] and [lo2,hi2].
double box_box_dist_sq(const double* lo1, const double* hi1, const double* lo2,
                       const double* hi2, int d);

/// Exact distance between two segments (closed-form minimization over the unit square).
double segment_distance(const Segment& s1, const Segment& s2);

/// Minimum pairwise segment distance. Once a pair closer than `early_exit` is seen
/// the search stops and that (smaller) value is returned.
double polyline_distance(std::span<const Segment> p1, std::span<const Segment> p2,
                         double early_exit = 0.0);

/// Uniform hash grid over Aabbs. Each item is stored in every cell its box overlaps.
class GridIndex {
public:
    GridIndex(int dim, double cell_size);

    void insert(std::uint32_t id, const Aabb& box);
    /// Sorted, deduplicated ids whose cells overlap `query`; never misses a stored box
    /// that intersects it.
    std::vector<std::uint32_t> candidates(const Aabb& query) const;

    double cell_size() const { return cell_size_; }
    int dim() const { return dim_; }
    std::size_t cell_count() const { return cells_.size(); }
    std::size_t item_count() const { return n_items_; }

    /// 90th percentile of the longest box edge; falls back to 1 for empty input.
    static double default_cell_size(std::span<const Aabb> boxes);

private:
    struct Key {
        std::array<std::int32_t, kMaxDim> c{};
        bool operator==(const Key& o) const { return c == o.c; }
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const;
    };

    void cell_range(const Aabb& box, Key& lo, Key& hi) const;

    int dim_;
    double cell_size_;
    std::size_t n_items_ = 0;
    std::unordered_map<Key, std::vector<std::uint32_t>, KeyHash> cells_;
};

}  // namespace wsperc
