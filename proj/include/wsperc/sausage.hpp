#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "wsperc/geometry.hpp"
#include "wsperc/stochastic.hpp"

namespace wsperc {

/// Bounding-box hierarchy over the time-ordered elements of a path. Element 0 is the start
/// point (completed at time 0); element e >= 1 is the segment from point e-1 to point e
/// (completed at time(e)). Nodes cover contiguous element ranges, so an in-order descent
/// visits elements in time order.
class ChainTree {
public:
    ChainTree() = default;
    explicit ChainTree(const BrownianPath& path, std::uint32_t leaf_size = 8);

    std::size_t element_count() const { return n_elements_; }
    /// Squared distance from x to the polyline.
    double dist_sq(const double* x) const;
    /// Squared distance from x to the root box (a lower bound of dist_sq).
    double root_box_dist_sq(const double* x) const;
    /// Squared distance between the root boxes of two trees.
    double root_box_dist_sq(const ChainTree& other) const;
    double root_diagonal() const { return root_diag_; }
    /// Points the tree at a relocated copy of the path it was built from.
    void rebind(const BrownianPath& path) { path_ = &path; }

    /// Earliest element whose distance to segment [a,b] is <= reach and whose completion
    /// time is < t_bound.
    std::optional<std::uint32_t> earliest_within(const double* a, const double* b, double reach,
                                                 double t_bound) const;

    /// Element endpoints: both pointers coincide for element 0.
    const double* elem_a(std::uint32_t e) const;
    const double* elem_b(std::uint32_t e) const;
    double elem_time(std::uint32_t e) const { return path_->time(e); }

    struct Node {
        std::uint32_t begin, end;
        std::int32_t left = -1, right = -1;
    };
    const std::vector<Node>& nodes() const { return nodes_; }
    const double* node_lo(std::size_t n) const { return lo_.data() + n * dim_; }
    const double* node_hi(std::size_t n) const { return hi_.data() + n * dim_; }

private:
    std::int32_t build(std::uint32_t begin, std::uint32_t end, std::uint32_t leaf_size);

    const BrownianPath* path_ = nullptr;
    int dim_ = 0;
    std::size_t n_elements_ = 0;
    double root_diag_ = 0.0;
    std::vector<Node> nodes_;
    std::vector<double> lo_, hi_;
};

/// Wiener sausage of a discretized path: union of the radius-r capsules around its elements.
class Sausage {
public:
    Sausage(std::uint32_t id, BrownianPath path, double radius);
    Sausage(const Sausage& o);
    Sausage& operator=(const Sausage& o);
    Sausage(Sausage&&) noexcept;
    Sausage& operator=(Sausage&&) noexcept;

    std::uint32_t id() const { return id_; }
    const BrownianPath& path() const { return path_; }
    double radius() const { return radius_; }
    int dim() const { return path_.dim(); }
    double horizon() const { return path_.horizon(); }
    /// Path bounding box inflated by the radius.
    const Aabb& aabb() const { return aabb_; }
    /// sup_s ||B_s - B_0|| + r.
    double outradius() const { return outradius_; }
    const ChainTree& tree() const { return tree_; }

    /// Signed distance from x to the tube surface (negative inside).
    double surface_distance(const double* x) const;
    /// A value <= surface_distance(x), cheap when x is far away.
    double surface_distance_lower(const double* x) const;

    /// The same path and id with the radius replaced.
    Sausage with_radius(double r) const { return Sausage(id_, path_, r); }
    Sausage truncated(double t_cut) const { return Sausage(id_, path_.truncated(t_cut), radius_); }

private:
    std::uint32_t id_;
    BrownianPath path_;
    double radius_;
    Aabb aabb_;
    double outradius_;
    ChainTree tree_;
};

}  // namespace wsperc
