#include "wsperc/sausage.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "wsperc/error.hpp"

namespace wsperc {

ChainTree::ChainTree(const BrownianPath& path, std::uint32_t leaf_size)
    : path_(&path), dim_(path.dim()), n_elements_(path.size()) {
    require(leaf_size >= 1, "ChainTree: leaf_size must be >= 1");
    nodes_.reserve(2 * (n_elements_ / leaf_size + 1));
    build(0, static_cast<std::uint32_t>(n_elements_), leaf_size);
    root_diag_ = std::sqrt(sq_dist(node_lo(0), node_hi(0), dim_));
}

const double* ChainTree::elem_a(std::uint32_t e) const {
    return path_->point(e == 0 ? 0 : e - 1).data();
}

const double* ChainTree::elem_b(std::uint32_t e) const { return path_->point(e).data(); }

std::int32_t ChainTree::build(std::uint32_t begin, std::uint32_t end, std::uint32_t leaf_size) {
    const auto idx = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(Node{begin, end});
    lo_.resize(nodes_.size() * dim_);
    hi_.resize(nodes_.size() * dim_);
    {
        double* lo = lo_.data() + idx * dim_;
        double* hi = hi_.data() + idx * dim_;
        const std::uint32_t first_pt = begin == 0 ? 0 : begin - 1;
        const auto p0 = path_->point(first_pt);
        std::copy(p0.begin(), p0.end(), lo);
        std::copy(p0.begin(), p0.end(), hi);
        for (std::uint32_t k = first_pt + 1; k < end; ++k) {
            const auto p = path_->point(k);
            for (int i = 0; i < dim_; ++i) {
                lo[i] = std::min(lo[i], p[i]);
                hi[i] = std::max(hi[i], p[i]);
            }
        }
    }
    if (end - begin > leaf_size) {
        const std::uint32_t mid = begin + (end - begin) / 2;
        const auto l = build(begin, mid, leaf_size);
        const auto r = build(mid, end, leaf_size);
        nodes_[static_cast<std::size_t>(idx)].left = l;
        nodes_[static_cast<std::size_t>(idx)].right = r;
    }
    return idx;
}

namespace {

double point_box_dist_sq(const double* x, const double* lo, const double* hi, int d) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
        double g = 0.0;
        if (x[i] < lo[i])
            g = lo[i] - x[i];
        else if (x[i] > hi[i])
            g = x[i] - hi[i];
        s += g * g;
    }
    return s;
}

}  // namespace

double ChainTree::root_box_dist_sq(const double* x) const {
    return point_box_dist_sq(x, node_lo(0), node_hi(0), dim_);
}

double ChainTree::root_box_dist_sq(const ChainTree& other) const {
    return box_box_dist_sq(node_lo(0), node_hi(0), other.node_lo(0), other.node_hi(0), dim_);
}

double ChainTree::dist_sq(const double* x) const {
    double best = std::numeric_limits<double>::infinity();
    std::array<std::int32_t, 128> stack{};
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const auto n = static_cast<std::size_t>(stack[--top]);
        const Node& node = nodes_[n];
        if (point_box_dist_sq(x, node_lo(n), node_hi(n), dim_) >= best) continue;
        if (node.left < 0) {
            for (std::uint32_t e = node.begin; e < node.end; ++e)
                best = std::min(best, point_segment_dist_sq(x, elem_a(e), elem_b(e), dim_));
            continue;
        }
        const auto l = static_cast<std::size_t>(node.left);
        const auto r = static_cast<std::size_t>(node.right);
        const double dl = point_box_dist_sq(x, node_lo(l), node_hi(l), dim_);
        const double dr = point_box_dist_sq(x, node_lo(r), node_hi(r), dim_);
        // Push the farther child first so the nearer one is expanded next.
        if (dl < dr) {
            stack[top++] = node.right;
            stack[top++] = node.left;
        } else {
            stack[top++] = node.left;
            stack[top++] = node.right;
        }
    }
    return best;
}

std::optional<std::uint32_t> ChainTree::earliest_within(const double* a, const double* b,
                                                        double reach, double t_bound) const {
    std::array<double, kMaxDim> qlo{}, qhi{};
    for (int i = 0; i < dim_; ++i) {
        qlo[i] = std::min(a[i], b[i]);
        qhi[i] = std::max(a[i], b[i]);
    }
    const double reach2 = reach * reach;
    std::array<std::int32_t, 128> stack{};
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const auto n = static_cast<std::size_t>(stack[--top]);
        const Node& node = nodes_[n];
        if (elem_time(node.begin) >= t_bound) continue;
        if (box_box_dist_sq(qlo.data(), qhi.data(), node_lo(n), node_hi(n), dim_) > reach2) continue;
        if (node.left < 0) {
            for (std::uint32_t e = node.begin; e < node.end; ++e) {
                if (elem_time(e) >= t_bound) break;
                if (segment_segment_dist_sq(a, b, elem_a(e), elem_b(e), dim_) <= reach2) return e;
            }
            continue;
        }
        stack[top++] = node.right;
        stack[top++] = node.left;
    }
    return std::nullopt;
}

// --- Sausage ------------------------------------------------------------------

Sausage::Sausage(std::uint32_t id, BrownianPath path, double radius)
    : id_(id), path_(std::move(path)), radius_(radius) {
    require(radius > 0.0 && std::isfinite(radius), "Sausage: radius must be > 0");
    aabb_ = path_.bounds().inflated(radius_);
    outradius_ = path_.max_excursion() + radius_;
    tree_ = ChainTree(path_);
}

Sausage::Sausage(const Sausage& o)
    : id_(o.id_), path_(o.path_), radius_(o.radius_), aabb_(o.aabb_), outradius_(o.outradius_),
      tree_(o.tree_) {
    tree_.rebind(path_);
}

Sausage& Sausage::operator=(const Sausage& o) {
    if (this != &o) {
        id_ = o.id_;
        path_ = o.path_;
        radius_ = o.radius_;
        aabb_ = o.aabb_;
        outradius_ = o.outradius_;
        tree_ = o.tree_;
        tree_.rebind(path_);
    }
    return *this;
}

Sausage::Sausage(Sausage&& o) noexcept
    : id_(o.id_), path_(std::move(o.path_)), radius_(o.radius_), aabb_(o.aabb_),
      outradius_(o.outradius_), tree_(std::move(o.tree_)) {
    tree_.rebind(path_);
}

Sausage& Sausage::operator=(Sausage&& o) noexcept {
    id_ = o.id_;
    path_ = std::move(o.path_);
    radius_ = o.radius_;
    aabb_ = o.aabb_;
    outradius_ = o.outradius_;
    tree_ = std::move(o.tree_);
    tree_.rebind(path_);
    return *this;
}

double Sausage::surface_distance(const double* x) const {
    return std::sqrt(tree_.dist_sq(x)) - radius_;
}

double Sausage::surface_distance_lower(const double* x) const {
    const double box = std::sqrt(tree_.root_box_dist_sq(x));
    if (box > tree_.root_diagonal()) return box - radius_;
    return surface_distance(x);
}

}  // namespace wsperc
