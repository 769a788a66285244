#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "strmc/errors.hpp"
#include "strmc/histogram.hpp"
#include "strmc/injection.hpp"
#include "strmc/measure.hpp"
#include "strmc/trajectory.hpp"

namespace strmc {

// Occupation estimate from one sweep: stratum j's trajectories enter with
// coefficient w_j / M_j, i.e. every visited state (exit state excluded)
// counts toward the unnormalized occupation measure.  With `normalize` the
// result is scaled to total mass one, which is the stationary-law estimate.
inline WeightedHistogram occupation_histogram(const SweepBatches& sweep,
                                              const std::vector<double>& weights,
                                              const GridSpec& grid, bool normalize = true) {
    WeightedHistogram h(grid);
    for (std::size_t j = 0; j < sweep.strata_count(); ++j) {
        const auto& batch = sweep.per_stratum[j];
        if (batch.empty()) continue;
        const double c = weights[j] / static_cast<double>(batch.size());
        if (c == 0.0) continue;
        for (const ExitRecord& r : batch) {
            for (const Point& x : r.visited) h.add(x, c);
            for (const BinCount& b : r.visited_bins) h.add_bin(b.bin, c * b.count);
        }
    }
    if (normalize) return h.normalized();
    return h;
}

// Injection measures pooled across strata with their weights, binned.
inline WeightedHistogram injection_histogram(const InjectionState& state, const GridSpec& grid) {
    WeightedHistogram h(grid);
    for (std::size_t j = 0; j < state.nu.size(); ++j) {
        const EmpiricalMeasure& nu = state.nu[j];
        const double scale = state.weights[j] / nu.total_weight();
        for (std::size_t i = 0; i < nu.size(); ++i) h.add(nu.point(i), scale * nu.weight(i));
    }
    return h;
}

// Half the L1 distance between two weight vectors of equal length.
inline double weight_error(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw Error("weight_error: vectors differ in length");
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
    return 0.5 * d;
}

// Step-to-step movement of the injection ensemble: total variation between
// consecutive pooled injection histograms (second-axis marginal in 2-D, so
// the measure of "settled" is insensitive to the stratum layout itself).
inline double injection_fluctuation(const WeightedHistogram& prev, const WeightedHistogram& cur) {
    if (prev.grid().dims == 2) return tv_distance(marginal(prev, 1), marginal(cur, 1));
    return tv_distance(prev, cur);
}

// Mean exit time per stratum in one sweep.
inline std::vector<double> mean_exit_times(const SweepBatches& sweep) {
    std::vector<double> out(sweep.strata_count(), 0.0);
    for (std::size_t j = 0; j < sweep.strata_count(); ++j) {
        const auto& batch = sweep.per_stratum[j];
        if (batch.empty()) throw StarvedStratumError("mean_exit_times: empty stratum batch");
        long long s = 0;
        for (const ExitRecord& r : batch) s += r.tau;
        out[j] = static_cast<double>(s) / static_cast<double>(batch.size());
    }
    return out;
}

// Running average of normalized histograms, used for the error-vs-cost
// curves: the estimate after n sweeps is the mean of the n per-sweep
// normalized occupation histograms.
class RunningAverageHistogram {
public:
    void add(const WeightedHistogram& h) {
        WeightedHistogram n = h.normalized();
        if (count_ == 0)
            sum_ = n;
        else
            sum_.accumulate(n);
        ++count_;
    }

    int count() const { return count_; }

    WeightedHistogram average() const {
        if (count_ == 0) throw Error("RunningAverageHistogram: no histograms added");
        return sum_.normalized();
    }

private:
    WeightedHistogram sum_;
    int count_ = 0;
};

}  // namespace strmc
