#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "strmc/errors.hpp"
#include "strmc/point.hpp"
#include "strmc/rng.hpp"
#include "strmc/strata.hpp"

namespace strmc {

// Weighted point cloud representing a probability measure on one stratum.
// Weights are kept unnormalized internally; draws and normalized() divide by
// the running total.
class EmpiricalMeasure {
public:
    EmpiricalMeasure() = default;

    void add(const Point& x, double w = 1.0) {
        if (!(w >= 0.0) || !std::isfinite(w))
            throw Error("EmpiricalMeasure: weight must be finite and >= 0");
        if (w == 0.0) return;
        points_.push_back(x);
        weights_.push_back(w);
        total_ += w;
    }

    std::size_t size() const { return points_.size(); }
    bool empty() const { return points_.empty(); }
    double total_weight() const { return total_; }
    const std::vector<Point>& points() const { return points_; }
    const std::vector<double>& weights() const { return weights_; }
    const Point& point(std::size_t i) const { return points_[i]; }
    double weight(std::size_t i) const { return weights_[i]; }

    void scale(double c) {
        if (!(c >= 0.0) || !std::isfinite(c))
            throw Error("EmpiricalMeasure: scale factor must be finite and >= 0");
        for (double& w : weights_) w *= c;
        total_ *= c;
    }

    EmpiricalMeasure normalized() const {
        if (!(total_ > 0.0))
            throw VanishingWeightError("EmpiricalMeasure: total weight is zero");
        EmpiricalMeasure m = *this;
        m.scale(1.0 / total_);
        return m;
    }

    // One draw proportional to weight (inverse-CDF over the stored order).
    const Point& draw(RngStream& rng) const {
        if (empty()) throw VanishingWeightError("EmpiricalMeasure: draw from empty measure");
        const double u = rng.uniform() * total_;
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
            acc += weights_[i];
            if (u < acc) return points_[i];
        }
        return points_.back();
    }

    // Every atom must sit where the stratum's membership weight is positive
    // (strictly inside the region, i.e. quadratic form below 1).
    void validate_support(const StrataDef& strata, int j) const {
        for (const Point& x : points_)
            if (!(strata.quad(j, x) < 1.0))
                throw Error("EmpiricalMeasure: atom outside stratum " + std::to_string(j));
    }

private:
    std::vector<Point> points_;
    std::vector<double> weights_;
    double total_ = 0.0;
};

// M independent draws (multinomial resampling, with replacement).  Prefix
// sums + binary search keep this O(n + M log n).
inline std::vector<Point> resample(const EmpiricalMeasure& m, std::size_t count, RngStream& rng) {
    if (count == 0) throw Error("resample: draw count must be positive");
    if (m.empty()) throw VanishingWeightError("resample: empty measure");
    std::vector<double> cdf(m.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        acc += m.weight(i);
        cdf[i] = acc;
    }
    std::vector<Point> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double u = rng.uniform() * acc;
        const std::size_t k = std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
        out.push_back(m.point(std::min(k, m.size() - 1)));
    }
    return out;
}

}  // namespace strmc
