#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "snails/neighbor.hpp"
#include "snails/stats.hpp"

using namespace snails;

namespace {

std::vector<std::int64_t> linear_scan(const std::vector<double>& pos, int d, double radius,
                                      const double* q) {
    std::vector<std::int64_t> out;
    const double r2 = radius * radius;
    const std::int64_t n = static_cast<std::int64_t>(pos.size()) / d;
    for (std::int64_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (int k = 0; k < d; ++k) {
            const double diff = pos[i * d + k] - q[k];
            s += diff * diff;
        }
        if (s <= r2) out.push_back(i);
    }
    return out;
}

std::vector<std::int64_t> iota_ids(std::int64_t n) {
    std::vector<std::int64_t> ids(n);
    for (std::int64_t i = 0; i < n; ++i) ids[i] = i;
    return ids;
}

}  // namespace

TEST_CASE("empty index answers empty queries") {
    NeighborIndex idx({}, {}, 1, 1.0);
    const double q = 0.0;
    CHECK(idx.query(&q).empty());
}

TEST_CASE("hand-checkable 1d query") {
    NeighborIndex idx({0, 1, 2}, {0.0, 0.5, 2.0}, 1, 1.0);
    const double q = 0.0;
    auto hits = idx.query(&q);
    std::sort(hits.begin(), hits.end());
    CHECK(hits == std::vector<std::int64_t>{0, 1});
}

TEST_CASE("grid queries match a linear scan in d=2") {
    RngStream rng(21, 0);
    const Box region(std::vector<double>{0.0, 0.0}, std::vector<double>{100.0, 100.0});
    std::vector<double> pos;
    for (int i = 0; i < 1000; ++i) {
        pos.push_back(100.0 * rng.uniform01());
        pos.push_back(100.0 * rng.uniform01());
    }
    NeighborIndex idx(iota_ids(1000), pos, 2, 1.0);
    for (int rep = 0; rep < 1000; ++rep) {
        const double q[2] = {100.0 * rng.uniform01(), 100.0 * rng.uniform01()};
        auto hits = idx.query(q);
        std::sort(hits.begin(), hits.end());
        CHECK(hits == linear_scan(pos, 2, 1.0, q));
    }
}

TEST_CASE("duplicate ids and unknown seeds are rejected") {
    CHECK_THROWS_AS(NeighborIndex({0, 0}, {0.0, 1.0}, 1, 1.0), InvalidParameter);
    NeighborIndex idx({0, 1}, {0.0, 1.0}, 1, 1.0);
    CHECK_THROWS_AS(gilbert_cluster(idx, 5), InvalidParameter);
}

TEST_CASE("hand-checkable cluster on the line") {
    NeighborIndex idx({0, 1, 2, 3}, {0.0, 0.8, 1.7, 3.0}, 1, 1.0);
    CHECK(gilbert_cluster(idx, 0).members == std::vector<std::int64_t>{0, 1, 2});
}

TEST_CASE("singleton point set clusters to itself") {
    NeighborIndex idx({4}, {2.5}, 1, 1.0);
    CHECK(gilbert_cluster(idx, 4).members == std::vector<std::int64_t>{4});
}

TEST_CASE("clusters equal the brute-force BFS oracle on random fields") {
    RngStream rng(22, 0);
    const Box region(std::vector<double>{0.0}, std::vector<double>{40.0});
    for (int rep = 0; rep < 500; ++rep) {
        auto pos = sample_poisson_points(rng, 0.5, region);
        if (pos.empty()) continue;
        const std::int64_t n = static_cast<std::int64_t>(pos.size());
        NeighborIndex idx(iota_ids(n), pos, 1, 1.0);
        const std::int64_t seed = static_cast<std::int64_t>(rng.uniform01() * n);
        CHECK(gilbert_cluster(idx, seed).members == oracle::bfs_cluster(pos, 1, 1.0, seed));
    }
}

TEST_CASE("cluster membership is symmetric in the seed") {
    RngStream rng(23, 0);
    const Box region(std::vector<double>{0.0, 0.0}, std::vector<double>{15.0, 15.0});
    for (int rep = 0; rep < 100; ++rep) {
        auto pos = sample_poisson_points(rng, 0.8, region);
        const std::int64_t n = static_cast<std::int64_t>(pos.size()) / 2;
        if (n == 0) continue;
        NeighborIndex idx(iota_ids(n), pos, 2, 1.0);
        const std::int64_t seed = static_cast<std::int64_t>(rng.uniform01() * n);
        const auto cluster = gilbert_cluster(idx, seed);
        for (std::int64_t other : cluster.members) {
            CHECK(gilbert_cluster(idx, other).members == cluster.members);
        }
    }
}

TEST_CASE("query results are translation invariant") {
    RngStream rng(24, 0);
    std::vector<double> pos;
    for (int i = 0; i < 300; ++i) pos.push_back(20.0 * rng.uniform01());
    std::vector<double> shifted = pos;
    const double shift = 137.25;
    for (double& x : shifted) x += shift;
    NeighborIndex a(iota_ids(300), pos, 1, 1.0);
    NeighborIndex b(iota_ids(300), shifted, 1, 1.0);
    for (int rep = 0; rep < 200; ++rep) {
        const double q = 20.0 * rng.uniform01();
        const double qs = q + shift;
        auto ha = a.query(&q);
        auto hb = b.query(&qs);
        std::sort(ha.begin(), ha.end());
        std::sort(hb.begin(), hb.end());
        CHECK(ha == hb);
    }
}

TEST_CASE("percolation scan: zero intensity gives singleton clusters") {
    const auto rows = percolation_scan({0.0}, {50.0}, 1, 1.0, 200, RngStream(25, 0), 2);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].mean_cluster_size == doctest::Approx(1.0));
    CHECK(rows[0].boundary_touch_freq == doctest::Approx(0.0));
}

TEST_CASE("percolation scan: d=1 boundary-touch frequency decays with box size") {
    const auto rows = percolation_scan({2.0}, {50.0, 100.0, 200.0}, 1, 1.0, 1000,
                                       RngStream(26, 0), 2);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].boundary_touch_freq > rows[1].boundary_touch_freq);
    CHECK(rows[1].boundary_touch_freq > rows[2].boundary_touch_freq);
}

TEST_CASE("percolation scan: origin cluster size matches the gap-sequence oracle") {
    const auto rows = percolation_scan({1.0}, {80.0}, 1, 1.0, 4000, RngStream(27, 0), 2);
    REQUIRE(rows.size() == 1);
    RngStream rng(28, 0);
    MeanVar oracle_acc;
    for (int i = 0; i < 20000; ++i) {
        oracle_acc.add(oracle::gap_sequence_cluster_size(1.0, 1.0, rng));
    }
    const double se = std::sqrt(std::pow((rows[0].ci_high - rows[0].mean_cluster_size) / 1.96, 2) +
                                std::pow(oracle_acc.se_mean(), 2));
    CHECK(std::fabs(rows[0].mean_cluster_size - oracle_acc.mean()) < 4.0 * se);
}
