#include "wsperc/rng.hpp"

#include <algorithm>
#include <cmath>

#include "wsperc/error.hpp"

namespace wsperc {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = std::uint64_t{a} * std::uint64_t{b};
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

double log_factorial(double k) { return std::lgamma(k + 1.0); }

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> c,
                                           std::array<std::uint32_t, 2> k) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            k[0] += kWeyl0;
            k[1] += kWeyl1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, c[0], hi0, lo0);
        mulhilo(kMul1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
    return c;
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = mix64(seed);
    for (auto p : path) h = mix64(h ^ mix64(p + 0x632BE59BD9B4E019ULL));
    return h;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_(stream_id) {}

void RngStream::refill() {
    const std::array<std::uint32_t, 4> ctr{
        static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
        static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
    const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(seed_),
                                           static_cast<std::uint32_t>(seed_ >> 32)};
    buf_ = philox4x32_10(ctr, key);
    ++block_;
    pos_ = 0;
}

std::uint64_t RngStream::next_u64() {
    if (pos_ >= 4) refill();
    const std::uint64_t lo = buf_[static_cast<std::size_t>(pos_)];
    const std::uint64_t hi = buf_[static_cast<std::size_t>(pos_ + 1)];
    pos_ += 2;
    return (hi << 32) | lo;
}

double RngStream::uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

double RngStream::uniform_open() { return (double(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

std::uint64_t RngStream::below(std::uint64_t n) {
    require(n > 0, "RngStream::below: n must be positive");
    // Lemire-style rejection keeps the result exactly uniform.
    const std::uint64_t threshold = (0 - n) % n;
    while (true) {
        const std::uint64_t x = next_u64();
        if (x >= threshold) return x % n;
    }
}

double RngStream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
}

std::uint64_t RngStream::poisson(double mean) {
    require(mean >= 0.0 && std::isfinite(mean), "poisson: mean must be finite and >= 0");
    if (mean == 0.0) return 0;
    if (mean < 10.0) {
        const double limit = std::exp(-mean);
        double prod = uniform_open();
        std::uint64_t k = 0;
        while (prod > limit) {
            prod *= uniform_open();
            ++k;
        }
        return k;
    }
    // PTRS: transformed rejection with squeeze.
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    while (true) {
        const double u = uniform() - 0.5;
        const double v = uniform_open();
        const double us = 0.5 - std::fabs(u);
        const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
        if (k < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
            -mean + k * loglam - log_factorial(k))
            return static_cast<std::uint64_t>(k);
    }
}

std::uint64_t poisson_quantile(double mean, double u) {
    require(mean >= 0.0 && std::isfinite(mean), "poisson_quantile: mean must be finite and >= 0");
    require(u >= 0.0 && u < 1.0, "poisson_quantile: u must be in [0, 1)");
    if (mean == 0.0) return 0;
    // Mass below 12 standard deviations under the mean is far below double resolution.
    const double lo = std::max(0.0, std::floor(mean - 12.0 * std::sqrt(mean) - 12.0));
    double k = lo;
    double pmf = std::exp(-mean + k * std::log(mean) - log_factorial(k));
    double cdf = pmf;
    while (cdf < u && pmf > 0.0) {
        k += 1.0;
        pmf *= mean / k;
        cdf += pmf;
    }
    return static_cast<std::uint64_t>(k);
}

RngStream RngStream::split(std::uint64_t child) const {
    return RngStream(seed_, derive_stream(stream_, {child}));
}

}  // namespace wsperc
