#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wsperc/rng.hpp"

namespace wsperc {

/// Capacity classes of Poisson points. For d >= 5 the type of a sausage is
/// floor(cap(W^{3r}) / (t r^{d-4})). For d = 4 it is the pair
/// (floor(cap(W^{3r}) / (t/|log r|)), floor(M(W^{2r}) / t)), flattened as j1 * out_bins + j2
/// with j2 clamped to out_bins - 1.
struct ClassIndex {
    int d = 5;
    double t = 1.0, r = 0.1;
    int out_bins = 4;

    double cap_scale() const;
    std::uint32_t of(double cap3r, double outradius2r) const;
    /// Inverse of the d = 4 flattening; (type, 0) for d >= 5.
    std::pair<std::uint32_t, std::uint32_t> split(std::uint32_t type) const;
};

/// Mean offspring matrix K(i,j) over types 0..J, plus the analytic tail
/// K(i, j) ~ A i^alpha exp(-decay j) for j > J.
struct OffspringKernel {
    int d = 0;
    double t = 0.0, r = 0.0, lambda = 0.0, q = 0.0;
    std::uint32_t n_types = 0;      ///< J + 1
    std::vector<double> k;          ///< row-major n_types x n_types, quantile entries
    std::vector<double> mean;       ///< mean over outer samples of the conditional estimate
    std::vector<double> std_error;  ///< standard error of `mean`
    std::vector<std::uint64_t> n_outer;  ///< outer samples per row
    std::vector<std::uint8_t> reliable;  ///< per entry
    double tail_a = 0.0, tail_alpha = 0.0, tail_decay = 1.0;

    double at(std::uint32_t i, std::uint32_t j) const { return k[std::size_t(i) * n_types + j]; }
    /// Expected offspring of type i in all types j > J.
    double tail_mass(std::uint32_t i) const;
    /// Truncated matrix with one extra aggregated tail type appended (size n_types + 1).
    std::vector<double> extended() const;

    static OffspringKernel from_matrix(std::uint32_t n, std::vector<double> entries);
};

struct KernelParams {
    int d = 5;
    double t = 1.0, r = 0.1, lambda = 1.0;
    double q = 0.95;
    std::size_t n_outer = 100;
    std::size_t n_inner = 200;       ///< neighbour draws per outer sample
    std::size_t n_walks = 300;       ///< walks per class capacity estimate
    std::uint32_t max_types = 0;     ///< 0: largest observed class + 1
    std::size_t min_outer = 10;      ///< rows with fewer outer samples are flagged
    int out_bins = 4;
    double step = 0.0;               ///< 0 selects (r/4)^2
    bool frozen = false;             ///< static balls (t = 0 limit fixture)
    std::uint64_t seed = 1;
    unsigned workers = 1;
};

/// Empirical offspring kernel. Outer sample k draws B^0 and its class i; the conditional mean
/// of the number of class-j neighbours is estimated by drawing neighbour paths and starting
/// points uniformly in the box of possible starts, weighted by lambda times that box volume.
/// K(i, j) is the q-quantile over outer samples of class i.
OffspringKernel estimate_kernel(const KernelParams& p);

void write_kernel_csv(std::ostream& out, const OffspringKernel& k);
OffspringKernel read_kernel_csv(std::istream& in);

struct GwResult {
    std::vector<std::uint64_t> totals;  ///< Z_n summed over types, n = 0..last
    std::optional<std::uint32_t> extinction_time;
    std::uint32_t generations = 0;
    bool escaped = false;  ///< population passed escape_population; counted as survival
};

/// Poisson multitype Galton-Watson process started from one individual of root_type; the
/// aggregated tail type is included. Stops once the population exceeds escape_population.
/// Throws ExplosionError past 1e9 expected offspring.
GwResult simulate_gw(const OffspringKernel& kernel, std::uint32_t root_type,
                     std::uint32_t max_gen, RngStream& rng,
                     std::uint64_t escape_population = 1000000);

enum class SeriesVerdict { convergent, divergent, inconclusive };
std::string to_string(SeriesVerdict v);

struct SeriesResult {
    SeriesVerdict verdict = SeriesVerdict::inconclusive;
    std::vector<double> terms;         ///< (K^k 1)(i), k = 0..
    std::vector<double> partial_sums;
    double ratio = 0.0;                ///< fitted geometric ratio over the last terms
};

/// Partial sums of (K^k 1)(i) on the extended matrix. Stops early as divergent once a partial
/// sum exceeds `budget`.
SeriesResult series_check(const OffspringKernel& kernel, std::uint32_t i, std::uint32_t k_max,
                          double budget = 1e12);

}  // namespace wsperc
