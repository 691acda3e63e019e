#include "snails/rng.hpp"

#include <cmath>
#include <limits>

namespace snails {

namespace {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix(std::uint64_t x) {
    std::uint64_t s = x;
    return splitmix64(s);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace

Box::Box(std::vector<double> lo_, std::vector<double> hi_)
    : lo(std::move(lo_)), hi(std::move(hi_)) {
    validate();
}

Box Box::centered(double half_width, int d) {
    if (!(half_width > 0.0) || d < 1) {
        throw InvalidParameter("Box::centered: half_width must be > 0 and d >= 1");
    }
    return Box(std::vector<double>(d, -half_width), std::vector<double>(d, half_width));
}

double Box::volume() const {
    double v = 1.0;
    for (int k = 0; k < dim(); ++k) v *= hi[k] - lo[k];
    return v;
}

bool Box::contains(const double* x) const {
    for (int k = 0; k < dim(); ++k) {
        if (x[k] < lo[k] || x[k] > hi[k]) return false;
    }
    return true;
}

bool Box::contains_origin_with_margin(double margin) const {
    for (int k = 0; k < dim(); ++k) {
        if (lo[k] > -margin || hi[k] < margin) return false;
    }
    return true;
}

void Box::validate() const {
    if (lo.empty() || lo.size() != hi.size()) {
        throw InvalidParameter("Box: lo/hi must be non-empty and the same length");
    }
    for (std::size_t k = 0; k < lo.size(); ++k) {
        if (!std::isfinite(lo[k]) || !std::isfinite(hi[k]) || !(lo[k] < hi[k])) {
            throw InvalidParameter("Box: requires finite lo < hi componentwise");
        }
    }
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
    : master_seed_(master_seed), stream_id_(stream_id) {
    std::uint64_t sm = mix(master_seed) ^ mix(stream_id ^ 0xA3C59AC2ED9B8B6FULL);
    for (auto& word : s_) word = splitmix64(sm);
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;  // all-zero state is invalid
}

std::uint64_t RngStream::next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5ULL, 7) * 9ULL;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double RngStream::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform01() - 1.0;
        v = 2.0 * uniform01() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
}

double RngStream::exponential(double rate) {
    if (!(rate > 0.0) || !std::isfinite(rate)) {
        throw InvalidParameter("exponential: rate must be positive and finite");
    }
    // 1 - u is in (2^-53, 1], so the log argument never vanishes.
    return -std::log1p(-uniform01()) / rate;
}

std::uint64_t RngStream::poisson(double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) {
        throw InvalidParameter("poisson: mean must be nonnegative and finite");
    }
    if (mean == 0.0) return 0;
    if (mean < 10.0) {
        // Sequential-search inversion of the CDF.
        const double u = uniform01();
        double p = std::exp(-mean);
        double s = p;
        std::uint64_t k = 0;
        const std::uint64_t k_cap = static_cast<std::uint64_t>(mean + 12.0 * std::sqrt(mean) + 24.0);
        while (u > s && k < k_cap) {
            ++k;
            p *= mean / static_cast<double>(k);
            s += p;
        }
        return k;
    }
    // PTRS transformed rejection (Hoermann 1993), valid for mean >= 10.
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mean = std::log(mean);
    for (;;) {
        const double u = uniform01() - 0.5;
        const double v = uniform01();
        const double us = 0.5 - std::fabs(u);
        const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
            kf * log_mean - mean - std::lgamma(kf + 1.0)) {
            return static_cast<std::uint64_t>(kf);
        }
    }
}

RngStream RngStream::derived(std::uint64_t tag, std::uint64_t a, std::uint64_t b) const {
    std::uint64_t h = mix(stream_id_ ^ 0x6A09E667F3BCC909ULL);
    h = mix(h ^ tag);
    h = mix(h ^ a);
    h = mix(h ^ b);
    return RngStream(master_seed_, h);
}

std::vector<double> sample_poisson_points(RngStream& rng, double intensity, const Box& region) {
    if (!(intensity >= 0.0) || !std::isfinite(intensity)) {
        throw InvalidParameter("sample_poisson_points: intensity must be nonnegative and finite");
    }
    region.validate();
    const int d = region.dim();
    const std::uint64_t n = rng.poisson(intensity * region.volume());
    std::vector<double> points(n * static_cast<std::uint64_t>(d));
    for (std::uint64_t i = 0; i < n; ++i) {
        for (int k = 0; k < d; ++k) {
            points[i * d + k] = region.lo[k] + rng.uniform01() * (region.hi[k] - region.lo[k]);
        }
    }
    return points;
}

std::vector<double> sample_gaussian_increment(RngStream& rng, double dt, double diffusion, int d) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw InvalidParameter("sample_gaussian_increment: dt must be positive and finite");
    }
    if (!(diffusion > 0.0) || !std::isfinite(diffusion)) {
        throw InvalidParameter("sample_gaussian_increment: diffusion must be positive and finite");
    }
    if (d < 1) throw InvalidParameter("sample_gaussian_increment: d must be >= 1");
    const double sigma = std::sqrt(diffusion * dt);
    std::vector<double> dx(d);
    for (int k = 0; k < d; ++k) dx[k] = sigma * rng.normal();
    return dx;
}

double sample_exponential(RngStream& rng, double rate) {
    return rng.exponential(rate);
}

double bridge_crossing_probability(double x0, double x1, double level, double dt, double diffusion) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw InvalidParameter("bridge_crossing_probability: dt must be positive and finite");
    }
    if (!(diffusion > 0.0) || !std::isfinite(diffusion)) {
        throw InvalidParameter("bridge_crossing_probability: diffusion must be positive and finite");
    }
    if (!(x0 > level) || !(x1 > level)) {
        throw InvalidParameter(
            "bridge_crossing_probability: endpoints must be strictly above the level "
            "(crossing is certain otherwise and must be handled by the caller)");
    }
    return std::exp(-2.0 * (x0 - level) * (x1 - level) / (diffusion * dt));
}

}  // namespace snails
