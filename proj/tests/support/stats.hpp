#pragma once

// Small statistical helpers shared by the sampling tests.

#include <cmath>
#include <cstddef>
#include <vector>

namespace teststat {

// Pearson chi-square statistic for observed counts against expected
// probabilities (expected counts = p * total).  Bins with negligible
// expectation are pooled into their neighbor to keep the statistic sane.
inline double chi_square(const std::vector<std::size_t>& observed,
                         const std::vector<double>& prob) {
    double total = 0.0;
    for (std::size_t c : observed) total += static_cast<double>(c);
    double stat = 0.0;
    double pool_obs = 0.0, pool_exp = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double e = prob[i] * total;
        pool_obs += static_cast<double>(observed[i]);
        pool_exp += e;
        if (pool_exp >= 5.0) {
            const double d = pool_obs - pool_exp;
            stat += d * d / pool_exp;
            pool_obs = pool_exp = 0.0;
        }
    }
    if (pool_exp > 0.0) {
        const double d = pool_obs - pool_exp;
        stat += d * d / pool_exp;
    }
    return stat;
}

// Standard error of a sample mean.
inline double standard_error(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= (n - 1.0);
    return std::sqrt(var / n);
}

inline double mean_of(const std::vector<double>& xs) {
    double m = 0.0;
    for (double x : xs) m += x;
    return m / static_cast<double>(xs.size());
}

}  // namespace teststat
