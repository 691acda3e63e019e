// Test-only oracles: brute-force and fine-discretization reference
// computations kept independent of the library implementation paths they
// check.
#pragma once
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <vector>

#include "snails/rng.hpp"

namespace snails::oracle {

// O(n^2) BFS over the pairwise-distance graph at threshold radius.
inline std::vector<std::int64_t> bfs_cluster(const std::vector<double>& pos, int d,
                                             double radius, std::int64_t seed) {
    const std::int64_t n = static_cast<std::int64_t>(pos.size()) / d;
    std::vector<char> visited(n, 0);
    std::deque<std::int64_t> queue{seed};
    visited[seed] = 1;
    std::vector<std::int64_t> members{seed};
    const double r2 = radius * radius;
    while (!queue.empty()) {
        const std::int64_t cur = queue.front();
        queue.pop_front();
        for (std::int64_t j = 0; j < n; ++j) {
            if (visited[j]) continue;
            double s = 0.0;
            for (int k = 0; k < d; ++k) {
                const double diff = pos[cur * d + k] - pos[j * d + k];
                s += diff * diff;
            }
            if (s <= r2) {
                visited[j] = 1;
                queue.push_back(j);
                members.push_back(j);
            }
        }
    }
    std::sort(members.begin(), members.end());
    return members;
}

// Probability that a Brownian bridge from x0 to x1 over [0, dt] with the given
// diffusion dips to `level`, estimated by simulating the bridge on a fine grid
// of `substeps` points. Discrete monitoring misses excursions between grid
// points (bias ~ 1/sqrt(substeps)); one Richardson step against the
// 4x-coarser subsample of the same paths cancels that leading term.
inline double bridge_crossing_mc(double x0, double x1, double level, double dt,
                                 double diffusion, std::int64_t n_paths, int substeps,
                                 RngStream rng) {
    const int m = substeps - substeps % 4;  // divisible by 4 for the coarse subsample
    const double h = dt / m;
    std::int64_t hit_fine = 0, hit_coarse = 0;
    for (std::int64_t p = 0; p < n_paths; ++p) {
        double b = x0;
        bool fine = b <= level, coarse = fine;
        for (int k = 1; k < m; ++k) {
            const double remain = dt - (k - 1) * h;
            const double mean = b + (x1 - b) * h / remain;
            const double var = diffusion * h * (remain - h) / remain;
            b = mean + std::sqrt(var) * rng.normal();
            if (b <= level) {
                fine = true;
                if (k % 4 == 0) coarse = true;
            }
        }
        if (x1 <= level) fine = coarse = true;
        hit_fine += fine ? 1 : 0;
        hit_coarse += coarse ? 1 : 0;
    }
    const double p_fine = static_cast<double>(hit_fine) / static_cast<double>(n_paths);
    const double p_coarse = static_cast<double>(hit_coarse) / static_cast<double>(n_paths);
    return 2.0 * p_fine - p_coarse;
}

// Same construction for two particles: both trajectories are simulated as
// bridges given their endpoints and a contact is a grid instant at which they
// are within `radius`. Used against the pair detector in d = 1.
inline double pair_contact_mc(double inf0, double inf1, double sus0, double sus1, double radius,
                              double dt, double diffusion, std::int64_t n_paths, int substeps,
                              RngStream rng) {
    const int m = substeps - substeps % 4;
    const double h = dt / m;
    std::int64_t hit_fine = 0, hit_coarse = 0;
    for (std::int64_t p = 0; p < n_paths; ++p) {
        double a = inf0, b = sus0;
        bool fine = std::fabs(b - a) <= radius, coarse = fine;
        for (int k = 1; k < m; ++k) {
            const double remain = dt - (k - 1) * h;
            const double var = diffusion * h * (remain - h) / remain;
            const double sd = std::sqrt(var);
            a = a + (inf1 - a) * h / remain + sd * rng.normal();
            b = b + (sus1 - b) * h / remain + sd * rng.normal();
            if (std::fabs(b - a) <= radius) {
                fine = true;
                if (k % 4 == 0) coarse = true;
            }
        }
        if (std::fabs(sus1 - inf1) <= radius) fine = coarse = true;
        hit_fine += fine ? 1 : 0;
        hit_coarse += coarse ? 1 : 0;
    }
    const double p_fine = static_cast<double>(hit_fine) / static_cast<double>(n_paths);
    const double p_coarse = static_cast<double>(hit_coarse) / static_cast<double>(n_paths);
    return 2.0 * p_fine - p_coarse;
}

// Origin-cluster size on the line sampled directly from the gap sequence: the
// cluster extends while consecutive Exp(lambda) gaps stay within the radius.
inline double gap_sequence_cluster_size(double lambda, double radius, RngStream& rng) {
    double size = 1.0;
    for (int side = 0; side < 2; ++side) {
        for (;;) {
            const double gap = rng.exponential(lambda);
            if (gap > radius) break;
            size += 1.0;
        }
    }
    return size;
}

}  // namespace snails::oracle
