#include "snails/neighbor.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_set>

#include "snails/parallel.hpp"
#include "snails/stats.hpp"

namespace snails {

namespace {

double dist2(const double* a, const double* b, int d) {
    double s = 0.0;
    for (int k = 0; k < d; ++k) {
        const double diff = a[k] - b[k];
        s += diff * diff;
    }
    return s;
}

}  // namespace

NeighborIndex::NeighborIndex(std::vector<std::int64_t> ids, std::vector<double> positions, int d,
                             double radius)
    : d_(d), radius_(radius), ids_(std::move(ids)), pos_(std::move(positions)) {
    if (d_ < 1) throw InvalidParameter("NeighborIndex: d must be >= 1");
    if (!(radius_ > 0.0) || !std::isfinite(radius_)) {
        throw InvalidParameter("NeighborIndex: radius must be positive and finite");
    }
    if (pos_.size() != ids_.size() * static_cast<std::size_t>(d_)) {
        throw InvalidParameter("NeighborIndex: positions size must be ids size * d");
    }
    {
        std::unordered_set<std::int64_t> seen;
        seen.reserve(ids_.size() * 2);
        for (auto id : ids_) {
            if (!seen.insert(id).second) {
                throw InvalidParameter("NeighborIndex: duplicate particle id");
            }
        }
    }
    // Dense id -> entry map when ids are small nonnegative integers (the
    // common case: ids are particle indices); falls back to linear probe via
    // the same table with an offset.
    std::int64_t id_min = 0, id_max = -1;
    if (!ids_.empty()) {
        id_min = *std::min_element(ids_.begin(), ids_.end());
        id_max = *std::max_element(ids_.begin(), ids_.end());
    }
    id_offset_ = id_min;
    const std::int64_t span = ids_.empty() ? 0 : id_max - id_min + 1;
    if (span <= static_cast<std::int64_t>(ids_.size()) * 8 + 64) {
        id_to_entry_.assign(span, -1);
        for (std::size_t e = 0; e < ids_.size(); ++e) {
            id_to_entry_[ids_[e] - id_offset_] = static_cast<std::int32_t>(e);
        }
    }

    if (d_ == 1) {
        sorted_.resize(ids_.size());
        for (std::size_t e = 0; e < ids_.size(); ++e) sorted_[e] = static_cast<std::int32_t>(e);
        std::sort(sorted_.begin(), sorted_.end(), [&](std::int32_t a, std::int32_t b) {
            if (pos_[a] != pos_[b]) return pos_[a] < pos_[b];
            return ids_[a] < ids_[b];
        });
        return;
    }

    // Uniform grid, cell side = radius.
    grid_lo_.assign(d_, 0.0);
    grid_dims_.assign(d_, 1);
    if (!ids_.empty()) {
        std::vector<double> hi(d_, 0.0);
        for (int k = 0; k < d_; ++k) {
            grid_lo_[k] = pos_[k];
            hi[k] = pos_[k];
        }
        for (std::size_t e = 1; e < ids_.size(); ++e) {
            for (int k = 0; k < d_; ++k) {
                grid_lo_[k] = std::min(grid_lo_[k], pos_[e * d_ + k]);
                hi[k] = std::max(hi[k], pos_[e * d_ + k]);
            }
        }
        std::int64_t n_cells = 1;
        for (int k = 0; k < d_; ++k) {
            grid_dims_[k] = static_cast<std::int64_t>(std::floor((hi[k] - grid_lo_[k]) / radius_)) + 1;
            n_cells *= grid_dims_[k];
        }
        cells_.assign(n_cells, {});
        for (std::size_t e = 0; e < ids_.size(); ++e) {
            cells_[cell_of(&pos_[e * d_])].push_back(static_cast<std::int32_t>(e));
        }
    }
}

std::int64_t NeighborIndex::cell_of(const double* x) const {
    std::int64_t idx = 0;
    for (int k = 0; k < d_; ++k) {
        std::int64_t c = static_cast<std::int64_t>(std::floor((x[k] - grid_lo_[k]) / radius_));
        c = std::clamp<std::int64_t>(c, 0, grid_dims_[k] - 1);
        idx = idx * grid_dims_[k] + c;
    }
    return idx;
}

std::int32_t NeighborIndex::entry_of(std::int64_t id) const {
    const std::int64_t slot = id - id_offset_;
    if (!id_to_entry_.empty()) {
        if (slot < 0 || slot >= static_cast<std::int64_t>(id_to_entry_.size())) return -1;
        return id_to_entry_[slot];
    }
    for (std::size_t e = 0; e < ids_.size(); ++e) {
        if (ids_[e] == id) return static_cast<std::int32_t>(e);
    }
    return -1;
}

bool NeighborIndex::has_id(std::int64_t id) const { return entry_of(id) >= 0; }

const double* NeighborIndex::position_of(std::int64_t id) const {
    const std::int32_t e = entry_of(id);
    if (e < 0) throw InvalidParameter("NeighborIndex: unknown id");
    return &pos_[static_cast<std::size_t>(e) * d_];
}

std::vector<std::int64_t> NeighborIndex::query(const double* point) const {
    std::vector<std::int64_t> out;
    query_into(point, out);
    return out;
}

void NeighborIndex::query_into(const double* point, std::vector<std::int64_t>& out) const {
    out.clear();
    if (ids_.empty()) return;
    const double r2 = radius_ * radius_;

    if (d_ == 1) {
        const double x = point[0];
        // First sorted entry with position >= x - radius.
        auto it = std::lower_bound(sorted_.begin(), sorted_.end(), x - radius_,
                                   [&](std::int32_t e, double v) { return pos_[e] < v; });
        for (; it != sorted_.end() && pos_[*it] <= x + radius_; ++it) {
            out.push_back(ids_[*it]);
        }
        return;
    }

    // 3^d neighborhood of the cell containing the query point, odometer walk.
    std::vector<std::int64_t> base(d_), offs(d_, -1);
    for (int k = 0; k < d_; ++k) {
        base[k] = static_cast<std::int64_t>(std::floor((point[k] - grid_lo_[k]) / radius_));
    }
    for (;;) {
        bool in_range = true;
        std::int64_t idx = 0;
        for (int k = 0; k < d_ && in_range; ++k) {
            const std::int64_t c = base[k] + offs[k];
            if (c < 0 || c >= grid_dims_[k]) in_range = false;
            idx = idx * grid_dims_[k] + c;
        }
        if (in_range) {
            for (std::int32_t e : cells_[idx]) {
                if (dist2(point, &pos_[static_cast<std::size_t>(e) * d_], d_) <= r2) {
                    out.push_back(ids_[e]);
                }
            }
        }
        int k = d_ - 1;
        while (k >= 0 && offs[k] == 1) offs[k--] = -1;
        if (k < 0) break;
        ++offs[k];
    }
}

NeighborIndex build_index(const std::vector<std::int64_t>& ids,
                          const std::vector<double>& positions, int d, double radius) {
    return NeighborIndex(ids, positions, d, radius);
}

ClusterResult gilbert_cluster(const NeighborIndex& index, std::int64_t seed) {
    if (!index.has_id(seed)) throw InvalidParameter("gilbert_cluster: unknown seed id");
    std::unordered_set<std::int64_t> visited{seed};
    std::deque<std::int64_t> frontier{seed};
    std::vector<std::int64_t> scratch;
    ClusterResult result;
    result.members.push_back(seed);
    while (!frontier.empty()) {
        const std::int64_t cur = frontier.front();
        frontier.pop_front();
        index.query_into(index.position_of(cur), scratch);
        for (std::int64_t nb : scratch) {
            if (visited.insert(nb).second) {
                result.members.push_back(nb);
                frontier.push_back(nb);
            }
        }
    }
    std::sort(result.members.begin(), result.members.end());
    return result;
}

bool cluster_touches_boundary(const NeighborIndex& index,
                              const std::vector<std::int64_t>& members, const Box& region) {
    const int d = index.dim();
    const double r = index.radius();
    for (std::int64_t id : members) {
        const double* x = index.position_of(id);
        for (int k = 0; k < d; ++k) {
            if (x[k] - region.lo[k] <= r || region.hi[k] - x[k] <= r) return true;
        }
    }
    return false;
}

std::vector<PercolationRow> percolation_scan(const std::vector<double>& lambda_grid,
                                             const std::vector<double>& box_sizes, int d,
                                             double radius, std::int64_t n_samples,
                                             const RngStream& base, int workers) {
    if (d < 1) throw InvalidParameter("percolation_scan: d must be >= 1");
    if (n_samples < 1) throw InvalidParameter("percolation_scan: n_samples must be >= 1");
    std::vector<PercolationRow> rows;
    std::uint64_t combo = 0;
    for (double lambda : lambda_grid) {
        for (double box_size : box_sizes) {
            if (!(box_size > 4.0 * radius)) {
                throw InvalidParameter("percolation_scan: box size must exceed 4*radius");
            }
            const Box region = Box::centered(box_size / 2.0, d);
            std::vector<double> sizes(n_samples, 0.0);
            std::vector<char> touches(n_samples, 0);
            parallel_for(n_samples, workers, [&](std::int64_t i) {
                RngStream rng = base.derived(0x9C, combo, static_cast<std::uint64_t>(i));
                std::vector<double> pts = sample_poisson_points(rng, lambda, region);
                const std::int64_t n = static_cast<std::int64_t>(pts.size()) / d;
                std::vector<std::int64_t> ids(n + 1);
                std::vector<double> pos(pts.size() + d, 0.0);  // id 0 = origin point
                ids[0] = 0;
                for (std::int64_t j = 0; j < n; ++j) {
                    ids[j + 1] = j + 1;
                    for (int k = 0; k < d; ++k) pos[(j + 1) * d + k] = pts[j * d + k];
                }
                NeighborIndex index(std::move(ids), std::move(pos), d, radius);
                ClusterResult cluster = gilbert_cluster(index, 0);
                sizes[i] = static_cast<double>(cluster.members.size());
                touches[i] = cluster_touches_boundary(index, cluster.members, region) ? 1 : 0;
            });
            MeanVar acc;
            std::int64_t touched = 0;
            for (std::int64_t i = 0; i < n_samples; ++i) {
                acc.add(sizes[i]);
                touched += touches[i];
            }
            PercolationRow row;
            row.lambda = lambda;
            row.box_size = box_size;
            row.mean_cluster_size = acc.mean();
            row.ci_low = acc.mean() - 1.96 * acc.se_mean();
            row.ci_high = acc.mean() + 1.96 * acc.se_mean();
            row.boundary_touch_freq = static_cast<double>(touched) / static_cast<double>(n_samples);
            row.n_samples = n_samples;
            rows.push_back(row);
            ++combo;
        }
    }
    return rows;
}

}  // namespace snails
