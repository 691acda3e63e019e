#pragma once
#include <array>
#include <cstdint>
#include <vector>

#include "snails/errors.hpp"

namespace snails {

// Axis-aligned box in d dimensions, lo < hi componentwise.
struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    Box() = default;
    Box(std::vector<double> lo_, std::vector<double> hi_);

    // [-half_width, half_width]^d
    static Box centered(double half_width, int d);

    int dim() const { return static_cast<int>(lo.size()); }
    double volume() const;
    bool contains(const double* x) const;
    // Origin inside with at least `margin` to every face.
    bool contains_origin_with_margin(double margin) const;

    void validate() const;  // throws InvalidParameter on degenerate/non-finite bounds
};

// Deterministic random stream: xoshiro256** seeded from (master_seed, stream_id)
// through a SplitMix64 finalizer chain. Streams with distinct ids are
// statistically independent; `derived` builds substreams in O(1) from the seed
// pair alone (pure, does not touch the mutable generator state), so substream
// layouts are stable no matter how much the parent stream has been consumed.
class RngStream {
public:
    RngStream() : RngStream(0, 0) {}
    RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

    std::uint64_t master_seed() const { return master_seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    std::uint64_t next_u64();

    // Uniform on [0, 1), 53-bit resolution.
    double uniform01();

    // Standard normal via the polar method (second draw cached).
    double normal();

    // Exponential with the given rate; mean 1/rate. Throws on rate <= 0.
    double exponential(double rate);

    // Poisson count with the given mean: sequential-search inversion for small
    // means, PTRS transformed rejection for large ones.
    std::uint64_t poisson(double mean);

    // Substream keyed by up to three words; pure function of (master_seed,
    // stream_id, tag, a, b). Safe to call concurrently.
    RngStream derived(std::uint64_t tag, std::uint64_t a = 0, std::uint64_t b = 0) const;

private:
    std::array<std::uint64_t, 4> s_{};
    std::uint64_t master_seed_ = 0;
    std::uint64_t stream_id_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Count ~ Poisson(intensity * volume(region)), positions i.i.d. uniform on the
// region. Returned flat, stride region.dim(). Throws InvalidParameter on
// non-finite/negative intensity or a degenerate region.
std::vector<double> sample_poisson_points(RngStream& rng, double intensity, const Box& region);

// d independent coordinates, each Normal(0, diffusion * dt).
std::vector<double> sample_gaussian_increment(RngStream& rng, double dt, double diffusion, int d);

double sample_exponential(RngStream& rng, double rate);

// Probability that a Brownian bridge from (0, x0) to (dt, x1) with the given
// diffusion coefficient reaches `level`, both endpoints strictly above it:
//   exp(-2 (x0-level)(x1-level) / (diffusion dt)).
// An endpoint at or below the level means the crossing is certain; callers
// must handle that case themselves, so it is rejected here.
double bridge_crossing_probability(double x0, double x1, double level, double dt, double diffusion);

}  // namespace snails
