#include "snails/stats.hpp"

#include <algorithm>
#include <cmath>

#include "snails/errors.hpp"

namespace snails {

double MeanVar::se_mean() const {
    return n > 1 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
}

WilsonInterval wilson_interval(std::int64_t successes, std::int64_t n, double z) {
    if (n <= 0 || successes < 0 || successes > n) {
        throw InvalidParameter("wilson_interval: need 0 <= successes <= n, n > 0");
    }
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

WlsFit weighted_least_squares(const std::vector<double>& x, const std::vector<double>& y,
                              const std::vector<double>& w) {
    if (x.size() != y.size() || x.size() != w.size()) {
        throw InvalidParameter("weighted_least_squares: size mismatch");
    }
    double sw = 0.0, swx = 0.0, swy = 0.0;
    int used = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(w[i] > 0.0)) continue;
        sw += w[i];
        swx += w[i] * x[i];
        swy += w[i] * y[i];
        ++used;
    }
    if (used < 2) throw InvalidParameter("weighted_least_squares: need >= 2 weighted points");
    const double xbar = swx / sw;
    const double ybar = swy / sw;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(w[i] > 0.0)) continue;
        sxx += w[i] * (x[i] - xbar) * (x[i] - xbar);
        sxy += w[i] * (x[i] - xbar) * (y[i] - ybar);
    }
    if (!(sxx > 0.0)) throw InvalidParameter("weighted_least_squares: degenerate abscissae");
    WlsFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = ybar - fit.slope * xbar;
    fit.var_slope = 1.0 / sxx;
    fit.var_intercept = 1.0 / sw + xbar * xbar / sxx;
    fit.cov_slope_intercept = -xbar / sxx;
    fit.dof = used - 2;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(w[i] > 0.0)) continue;
        const double r = y[i] - fit.predict(x[i]);
        fit.chi2 += w[i] * r * r;
    }
    return fit;
}

double WlsFit::se_predict(double x) const {
    const double v = var_intercept + x * x * var_slope + 2.0 * x * cov_slope_intercept;
    return v > 0.0 ? std::sqrt(v) : 0.0;
}

double quantile(std::vector<double> data, double q) {
    if (data.empty()) throw InvalidParameter("quantile: empty data");
    if (!(q >= 0.0 && q <= 1.0)) throw InvalidParameter("quantile: q must be in [0,1]");
    std::sort(data.begin(), data.end());
    const double h = q * static_cast<double>(data.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, data.size() - 1);
    const double frac = h - static_cast<double>(lo);
    return data[lo] + frac * (data[hi] - data[lo]);
}

double ks_distance_exponential(std::vector<double> samples, double rate, std::int64_t n_censored) {
    if (samples.empty()) throw InvalidParameter("ks_distance_exponential: empty sample");
    if (!(rate > 0.0)) throw InvalidParameter("ks_distance_exponential: rate must be > 0");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size() + n_censored);
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = 1.0 - std::exp(-rate * samples[i]);
        d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
        d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
    }
    return d;
}

}  // namespace snails
