#pragma once
#include <cstdint>
#include <vector>

namespace snails {

// Streaming mean/variance (Welford).
struct MeanVar {
    std::int64_t n = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;

    void add(double x) {
        ++n;
        const double d1 = x - mean_;
        mean_ += d1 / static_cast<double>(n);
        m2_ += d1 * (x - mean_);
    }
    double mean() const { return mean_; }
    double variance() const { return n > 1 ? m2_ / static_cast<double>(n - 1) : 0.0; }
    double se_mean() const;
};

struct WilsonInterval {
    double low = 0.0;
    double high = 1.0;
};

// Wilson score interval for a binomial proportion; valid near 0 and 1.
WilsonInterval wilson_interval(std::int64_t successes, std::int64_t n, double z = 1.959963984540054);

struct WlsFit {
    double slope = 0.0;
    double intercept = 0.0;
    double var_slope = 0.0;
    double var_intercept = 0.0;
    double cov_slope_intercept = 0.0;
    double chi2 = 0.0;  // weighted SSE
    int dof = 0;

    double predict(double x) const { return intercept + slope * x; }
    // Standard error of the fitted line at x.
    double se_predict(double x) const;
};

// Weighted least squares of y against x with weights w (= 1/variance).
// Requires at least two points with positive weight.
WlsFit weighted_least_squares(const std::vector<double>& x, const std::vector<double>& y,
                              const std::vector<double>& w);

// q-quantile with linear interpolation over the order statistics; data is
// copied and sorted internally.
double quantile(std::vector<double> data, double q);

// Kolmogorov-Smirnov distance between the sample and Exp(rate). Censored
// observations (known only to exceed their value) may be passed separately;
// they enter the denominator but contribute no jump.
double ks_distance_exponential(std::vector<double> samples, double rate,
                               std::int64_t n_censored = 0);

}  // namespace snails
