#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

namespace wsperc {

/// Philox4x32-10 block function (Salmon et al. counter-based generator).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// SplitMix64 finalizer; used to derive stream ids.
std::uint64_t mix64(std::uint64_t x);

/// Stream id for (experiment seed, trial, entity ...). Order-sensitive.
std::uint64_t derive_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

/// Smallest k with P(Poisson(mean) <= k) >= u. Non-decreasing in mean for fixed u, so one
/// uniform couples counts across intensities.
std::uint64_t poisson_quantile(double mean, double u);

/// Counter-based random stream. The key is the seed, the upper half of the counter is the
/// stream id, the lower half counts blocks; (seed, stream_id) fixes the whole sequence on
/// every platform. Not shared between threads.
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_; }

    std::uint64_t next_u64();
    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    /// Uniform in (0, 1); safe for logarithms.
    double uniform_open();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);
    /// Standard normal, Marsaglia polar method.
    double normal();
    /// Poisson variate: multiplication method below mean 10, PTRS (Hoermann 1993) above.
    std::uint64_t poisson(double mean);

    /// A fresh, independent stream keyed on the same seed.
    RngStream split(std::uint64_t child) const;

    // UniformRandomBitGenerator
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }
    result_type operator()() { return next_u64(); }

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace wsperc
