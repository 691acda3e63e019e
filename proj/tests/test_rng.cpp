#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "snails/rng.hpp"
#include "snails/stats.hpp"

using namespace snails;

TEST_CASE("identical (master_seed, stream_id) reproduce identical sequences") {
    RngStream a(123, 7), b(123, 7);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
    RngStream c(123, 8);
    bool differs = false;
    RngStream a2(123, 7);
    for (int i = 0; i < 16 && !differs; ++i) differs = a2.next_u64() != c.next_u64();
    CHECK(differs);
}

TEST_CASE("derived substreams are pure functions of the seed pair") {
    RngStream a(5, 99);
    RngStream d1 = a.derived(1, 2, 3);
    a.next_u64();  // consuming the parent must not change derivation
    RngStream d2 = a.derived(1, 2, 3);
    for (int i = 0; i < 100; ++i) CHECK(d1.next_u64() == d2.next_u64());
    RngStream other = a.derived(1, 2, 4);
    CHECK(other.next_u64() != a.derived(1, 2, 3).next_u64());
}

TEST_CASE("zero intensity yields an empty point set") {
    RngStream rng(1, 0);
    CHECK(sample_poisson_points(rng, 0.0, Box::centered(5.0, 1)).empty());
}

TEST_CASE("poisson count moments on [0,5] at intensity 2") {
    RngStream rng(2, 0);
    const Box region(std::vector<double>{0.0}, std::vector<double>{5.0});
    MeanVar acc;
    for (int i = 0; i < 20000; ++i) {
        acc.add(static_cast<double>(sample_poisson_points(rng, 2.0, region).size()));
    }
    // mean 10, variance 10
    CHECK(std::fabs(acc.mean() - 10.0) < 4.0 * acc.se_mean());
    const double se_var = 10.0 * std::sqrt(2.0 / acc.n);
    CHECK(std::fabs(acc.variance() - 10.0) < 5.0 * se_var);
}

TEST_CASE("poisson count mean on [-50,50] over 1e4 repetitions") {
    RngStream rng(3, 0);
    const Box region = Box::centered(50.0, 1);
    MeanVar acc;
    for (int i = 0; i < 10000; ++i) {
        acc.add(static_cast<double>(sample_poisson_points(rng, 1.0, region).size()));
    }
    CHECK(std::fabs(acc.mean() - 100.0) < 3.0 * acc.se_mean());
    // Poisson signature: empirical mean and variance agree within 4 s.e.
    const double se = acc.mean() * std::sqrt(2.0 / acc.n);
    CHECK(std::fabs(acc.variance() - acc.mean()) < 4.0 * se);
}

TEST_CASE("poisson sampler covers inversion and rejection regimes") {
    for (double mean : {0.5, 4.0, 9.5, 30.0, 400.0}) {
        RngStream rng(4, static_cast<std::uint64_t>(mean * 10));
        MeanVar acc;
        const int n = 20000;
        for (int i = 0; i < n; ++i) acc.add(static_cast<double>(rng.poisson(mean)));
        CHECK(std::fabs(acc.mean() - mean) < 4.0 * std::sqrt(mean / n));
        const double se_var = std::sqrt((mean + 2.0 * mean * mean) / n);
        CHECK(std::fabs(acc.variance() - mean) < 5.0 * se_var);
    }
}

TEST_CASE("gaussian increment variance at dt=1, diffusion=1") {
    RngStream rng(5, 0);
    MeanVar acc;
    for (int i = 0; i < 100000; ++i) acc.add(sample_gaussian_increment(rng, 1.0, 1.0, 1)[0]);
    CHECK(std::fabs(acc.mean()) < 4.0 * acc.se_mean());
    CHECK(acc.variance() == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("gaussian increment magnitude scales like sqrt(dt)") {
    RngStream rng(6, 0);
    const double dt = 1e-8;
    MeanVar acc;
    for (int i = 0; i < 20000; ++i) {
        acc.add(std::fabs(sample_gaussian_increment(rng, dt, 1.0, 1)[0]));
    }
    // E|N(0, dt)| = sqrt(2 dt / pi)
    const double expected = std::sqrt(2.0 * dt / M_PI);
    CHECK(acc.mean() == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("gaussian increment per-coordinate variance at dt=0.25, diffusion=4, d=2") {
    RngStream rng(7, 0);
    MeanVar acc0, acc1;
    for (int i = 0; i < 50000; ++i) {
        const auto dx = sample_gaussian_increment(rng, 0.25, 4.0, 2);
        acc0.add(dx[0]);
        acc1.add(dx[1]);
    }
    CHECK(acc0.variance() == doctest::Approx(1.0).epsilon(0.05));
    CHECK(acc1.variance() == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("exponential moments and tail") {
    RngStream rng(8, 0);
    MeanVar acc1, acc4;
    std::int64_t over2 = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        acc1.add(sample_exponential(rng, 1.0));
        acc4.add(sample_exponential(rng, 4.0));
        if (sample_exponential(rng, 0.5) > 2.0) ++over2;
    }
    CHECK(std::fabs(acc1.mean() - 1.0) < 3.0 * acc1.se_mean());
    CHECK(std::fabs(acc4.mean() - 0.25) < 3.0 * acc4.se_mean());
    const double p = static_cast<double>(over2) / n;
    CHECK(p == doctest::Approx(std::exp(-1.0)).epsilon(0.02));
}

TEST_CASE("bridge crossing closed-form values") {
    CHECK(bridge_crossing_probability(2.0, 2.0, 1.0, 0.1, 2.0) ==
          doctest::Approx(std::exp(-10.0)).epsilon(1e-12));
    CHECK(bridge_crossing_probability(1.0 + 1e-9, 1.0 + 1e-9, 1.0, 1.0, 2.0) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("bridge crossing matches the fine-grid bridge oracle") {
    // Endpoints 1.2 and 1.3 against level 1, dt = 0.05, diffusion 2.
    const double p = bridge_crossing_probability(1.2, 1.3, 1.0, 0.05, 2.0);
    RngStream rng(9, 0);
    const double p_mc = oracle::bridge_crossing_mc(1.2, 1.3, 1.0, 0.05, 2.0, 150000, 2048, rng);
    CHECK(p == doctest::Approx(p_mc).epsilon(0.02));
}

TEST_CASE("bridge crossing bounds and monotonicity") {
    RngStream rng(10, 0);
    for (int i = 0; i < 2000; ++i) {
        const double level = 4.0 * rng.uniform01() - 2.0;
        const double g0 = 1e-3 + 3.0 * rng.uniform01();
        const double g1 = 1e-3 + 3.0 * rng.uniform01();
        const double dt = 1e-3 + rng.uniform01();
        const double diffusion = 0.1 + 4.0 * rng.uniform01();
        const double p = bridge_crossing_probability(level + g0, level + g1, level, dt, diffusion);
        CHECK(p > 0.0);
        CHECK(p <= 1.0);
        // Decreasing in the gap product, increasing in dt.
        const double p_wider = bridge_crossing_probability(level + 1.5 * g0, level + g1, level,
                                                           dt, diffusion);
        CHECK(p_wider <= p);
        const double p_longer = bridge_crossing_probability(level + g0, level + g1, level,
                                                            1.5 * dt, diffusion);
        CHECK(p_longer >= p);
    }
}

TEST_CASE("samplers reject invalid parameters") {
    RngStream rng(11, 0);
    CHECK_THROWS_AS(sample_exponential(rng, 0.0), InvalidParameter);
    CHECK_THROWS_AS(sample_exponential(rng, -1.0), InvalidParameter);
    CHECK_THROWS_AS(sample_gaussian_increment(rng, 0.0, 1.0, 1), InvalidParameter);
    CHECK_THROWS_AS(sample_gaussian_increment(rng, -0.1, 1.0, 1), InvalidParameter);
    CHECK_THROWS_AS(sample_poisson_points(rng, -1.0, Box::centered(1.0, 1)), InvalidParameter);
    const double inf = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(sample_poisson_points(rng, inf, Box::centered(1.0, 1)), InvalidParameter);
    CHECK_THROWS_AS(Box(std::vector<double>{1.0}, std::vector<double>{1.0}), InvalidParameter);
    CHECK_THROWS_AS(bridge_crossing_probability(1.0, 2.0, 1.0, 0.1, 1.0), InvalidParameter);
    CHECK_THROWS_AS(bridge_crossing_probability(0.5, 2.0, 1.0, 0.1, 1.0), InvalidParameter);
    CHECK_THROWS_AS(bridge_crossing_probability(2.0, 2.0, 1.0, 0.0, 1.0), InvalidParameter);
}

TEST_CASE("poisson points are uniform over the region") {
    RngStream rng(12, 0);
    const Box region(std::vector<double>{-2.0, 1.0}, std::vector<double>{4.0, 3.0});
    MeanVar x0, x1;
    for (int rep = 0; rep < 200; ++rep) {
        const auto pts = sample_poisson_points(rng, 3.0, region);
        for (std::size_t i = 0; i + 1 < pts.size(); i += 2) {
            CHECK(region.contains(&pts[i]));
            x0.add(pts[i]);
            x1.add(pts[i + 1]);
        }
    }
    CHECK(std::fabs(x0.mean() - 1.0) < 4.0 * x0.se_mean());
    CHECK(std::fabs(x1.mean() - 2.0) < 4.0 * x1.se_mean());
}
