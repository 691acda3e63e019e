#pragma once
#include <cstdint>
#include <vector>

#include "snails/rng.hpp"

namespace snails {

// Fixed-radius neighbor index over distinct particle ids.
// d = 1: a position-sorted sequence. d >= 2: a uniform grid with cell side
// exactly equal to the query radius, so candidates live in the 3^d adjacent
// cells. Immutable after build; concurrent read-only queries are safe.
class NeighborIndex {
public:
    NeighborIndex(std::vector<std::int64_t> ids, std::vector<double> positions, int d, double radius);

    int dim() const { return d_; }
    double radius() const { return radius_; }
    std::int64_t size() const { return static_cast<std::int64_t>(ids_.size()); }

    // Ids at Euclidean distance <= radius from the query point (ties count).
    std::vector<std::int64_t> query(const double* point) const;
    void query_into(const double* point, std::vector<std::int64_t>& out) const;

    bool has_id(std::int64_t id) const;
    const double* position_of(std::int64_t id) const;

private:
    int d_ = 1;
    double radius_ = 1.0;
    std::vector<std::int64_t> ids_;
    std::vector<double> pos_;               // stride d, parallel to ids_
    // d = 1: entry indices sorted by position.
    std::vector<std::int32_t> sorted_;
    // d >= 2: dense grid over the bounding box.
    std::vector<double> grid_lo_;
    std::vector<std::int64_t> grid_dims_;
    std::vector<std::vector<std::int32_t>> cells_;
    std::vector<std::int32_t> id_to_entry_;  // dense map for small nonnegative ids
    std::int64_t id_offset_ = 0;

    std::int64_t cell_of(const double* x) const;
    std::int32_t entry_of(std::int64_t id) const;  // -1 if absent
};

NeighborIndex build_index(const std::vector<std::int64_t>& ids,
                          const std::vector<double>& positions, int d, double radius);

struct ClusterResult {
    std::vector<std::int64_t> members;  // sorted ascending, seed included
    bool touches_boundary = false;
};

// All ids chain-connected to the seed at threshold `radius` (BFS over the
// radius graph). Throws InvalidParameter if the seed is absent.
ClusterResult gilbert_cluster(const NeighborIndex& index, std::int64_t seed);

// True when any member position is within `radius` of a face of `region`.
bool cluster_touches_boundary(const NeighborIndex& index,
                              const std::vector<std::int64_t>& members, const Box& region);

struct PercolationRow {
    double lambda = 0.0;
    double box_size = 0.0;
    double mean_cluster_size = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double boundary_touch_freq = 0.0;
    std::int64_t n_samples = 0;
};

// Monte Carlo cluster statistics of the origin-seeded Gilbert cluster for a
// Poisson field of each intensity on centered boxes of each linear size.
std::vector<PercolationRow> percolation_scan(const std::vector<double>& lambda_grid,
                                             const std::vector<double>& box_sizes, int d,
                                             double radius, std::int64_t n_samples,
                                             const RngStream& base, int workers = 1);

}  // namespace snails
