#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wsperc/geometry.hpp"
#include "wsperc/sausage.hpp"
#include "wsperc/stochastic.hpp"

namespace wsperc {

struct ConfigurationParams {
    int d = 5;
    double intensity = 1.0;
    double t = 1.0;
    double r = 0.1;
    double step = 0.0;    ///< 0 selects (r/4)^2
    Aabb box;             ///< crossing box; faces are x_1 = lo_1 and x_1 = hi_1
    double margin = 0.0;  ///< starting points are sampled in box inflated by margin
};

/// Poisson cloud of Wiener sausages: the occupied set O_{t,r} restricted to a sampling window.
struct Configuration {
    Aabb box;
    Aabb sample_box;
    double intensity = 0.0;
    double t = 0.0, r = 0.0, step = 0.0;
    int d = 0;
    std::uint64_t seed = 0;
    std::vector<Sausage> sausages;
};

/// Point count from stream (seed, 0, 0) by inversion, points from (seed, 0, 1), path i from
/// (seed, 1, i). Equal seeds give nested clouds when only the intensity changes.
Configuration sample_configuration(const ConfigurationParams& p, std::uint64_t seed);

/// Assembles a configuration from explicit sausages (fixtures, truncations).
Configuration make_configuration(const Aabb& box, double t, double r,
                                 std::vector<Sausage> sausages);

/// Same configuration with every sausage truncated to [0, t_cut].
Configuration truncated(const Configuration& cfg, double t_cut);

/// Earliest horizon at which the two tubes intersect; NONE if they never do.
std::optional<double> connection_time(const Sausage& s1, const Sausage& s2);

/// First time the tube reaches the half-space x_1 <= plane (side < 0) or x_1 >= plane (side > 0).
std::optional<double> face_touch_time(const Sausage& s, double plane, int side);

struct TimedEdge {
    std::uint32_t u, v;
    double tau;
};

struct TimedGraph {
    std::uint32_t n_sausages = 0;
    std::vector<TimedEdge> edges;  ///< sausage-sausage edges have u < v; face edges have v = LEFT or RIGHT

    std::uint32_t n_nodes() const { return n_sausages + 2; }
    std::uint32_t left() const { return n_sausages; }
    std::uint32_t right() const { return n_sausages + 1; }
};

TimedGraph build_timed_graph(const Configuration& cfg);

class UnionFind {
public:
    explicit UnionFind(std::size_t n);
    std::uint32_t find(std::uint32_t a);
    /// Returns true if a and b were in different sets.
    bool unite(std::uint32_t a, std::uint32_t b);
    std::size_t size() const { return parent_.size(); }

private:
    std::vector<std::uint32_t> parent_;
    std::vector<std::uint8_t> rank_;
};

/// Bottleneck value of the LEFT-RIGHT connection: min over paths of the max edge time.
std::optional<double> crossing_time(const TimedGraph& g);

/// Whether LEFT and RIGHT are connected by time `horizon`. Streams contacts of the truncated
/// configuration into a union-find without storing edges.
bool crosses_by(const Configuration& cfg, double horizon);

/// BFS layers from root using edges with tau <= horizon.
std::vector<std::vector<std::uint32_t>> explore_generations(const TimedGraph& g,
                                                            std::uint32_t root,
                                                            double horizon = 1e300);

/// Sizes of the sausage components at the given horizon (face nodes excluded), descending.
std::vector<std::size_t> component_sizes(const TimedGraph& g, double horizon);

struct GoodParams {
    double c_b = 1.0;
    double cap_threshold = 0.0;
    std::size_t n_walks = 1000;
    std::uint64_t seed = 1;
};

/// Good flag: the half-horizon sausage is confined to B(x, c_B sqrt(t/2)) and its hitting
/// capacity estimate is at least cap_threshold.
std::vector<bool> classify_good(const Configuration& cfg, const GoodParams& p);

// --- coarse graining ------------------------------------------------------------------------

using Site = std::array<int, 2>;

/// Good points assigned to lattice boxes, with the sausage adjacency among them.
struct GoodPointGraph {
    std::vector<PointD> points;
    std::vector<Site> site;  ///< box of each point
    std::vector<std::vector<std::uint32_t>> neighbours;
    /// Centre of box 0; norms in the initial choice are taken relative to it.
    PointD origin;
};

/// Good points of cfg that start inside some ball B(centre + 2 z c_B sqrt(t), c_B sqrt(t)),
/// z in the window |z|_inf <= window; adjacency from the full-horizon sausages.
GoodPointGraph good_point_graph(const Configuration& cfg, const TimedGraph& g,
                                const std::vector<bool>& good, double c_b, int window);

enum class StepCase { init, stop, case2a, case2b };
std::string to_string(StepCase c);

struct CoarseGrainStep {
    int n = 0;
    StepCase kind = StepCase::init;
    std::vector<Site> c;   ///< C_n after the step, in insertion order
    std::vector<Site> dismissed;  ///< D_n after the step, sorted
    int i_n = -1;
    std::vector<std::uint32_t> e;  ///< chosen point ids e_0..e_n
};

struct CoarseGrainResult {
    std::vector<CoarseGrainStep> trace;
    bool certificate = false;  ///< cluster reached the window boundary
    std::vector<Site> cluster;
    std::vector<std::uint32_t> chosen;
};

CoarseGrainResult coarse_grain_explore(const GoodPointGraph& g, int window);

/// Number of *-contours with N distinct vertices that surround the origin.
std::uint64_t count_star_contours(int n);
/// Independent enumerator: every start vertex and direction, divided by 2N.
std::uint64_t count_star_contours_bruteforce(int n);

}  // namespace wsperc
