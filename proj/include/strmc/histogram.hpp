#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "strmc/errors.hpp"
#include "strmc/point.hpp"

namespace strmc {

// Uniform binning over an interval (1-D) or a rectangle (2-D).
struct GridSpec {
    int dims = 1;
    double min0 = 0.0, max0 = 1.0;
    int n0 = 1;
    double min1 = 0.0, max1 = 1.0;
    int n1 = 1;

    static GridSpec line(double lo, double hi, int n) { return GridSpec{1, lo, hi, n, 0, 1, 1}; }
    static GridSpec rect(double lo0, double hi0, int n0, double lo1, double hi1, int n1) {
        return GridSpec{2, lo0, hi0, n0, lo1, hi1, n1};
    }
    // One bin per chain state.
    static GridSpec states(int n) { return line(-0.5, n - 0.5, n); }

    int bins() const { return dims == 1 ? n0 : n0 * n1; }

    // Out-of-range values are clamped into the edge bins so no mass is lost.
    int axis_bin(double x, double lo, double hi, int n) const {
        const int i = static_cast<int>(std::floor((x - lo) / (hi - lo) * n));
        return std::clamp(i, 0, n - 1);
    }
    int bin_of(const Point& x) const {
        const int i0 = axis_bin(x[0], min0, max0, n0);
        if (dims == 1) return i0;
        return i0 * n1 + axis_bin(x[1], min1, max1, n1);
    }

    double center0(int i) const { return min0 + (i + 0.5) * (max0 - min0) / n0; }
    double center1(int i) const { return min1 + (i + 0.5) * (max1 - min1) / n1; }

    friend bool operator==(const GridSpec& a, const GridSpec& b) {
        return a.dims == b.dims && a.min0 == b.min0 && a.max0 == b.max0 && a.n0 == b.n0 &&
               (a.dims == 1 || (a.min1 == b.min1 && a.max1 == b.max1 && a.n1 == b.n1));
    }

    std::string describe() const {
        char buf[160];
        if (dims == 1)
            std::snprintf(buf, sizeof buf, "axis0=%.17g:%.17g:%d", min0, max0, n0);
        else
            std::snprintf(buf, sizeof buf, "axis0=%.17g:%.17g:%d axis1=%.17g:%.17g:%d",
                          min0, max0, n0, min1, max1, n1);
        return buf;
    }
};

class WeightedHistogram {
public:
    WeightedHistogram() = default;
    explicit WeightedHistogram(const GridSpec& g) : grid_(g), mass_(g.bins(), 0.0) {}

    const GridSpec& grid() const { return grid_; }
    const std::vector<double>& mass() const { return mass_; }
    double total() const { return total_; }

    void add(const Point& x, double w = 1.0) { add_bin(grid_.bin_of(x), w); }
    void add_bin(int bin, double w) {
        if (w < 0.0) throw Error("WeightedHistogram: negative weight");
        mass_[bin] += w;
        total_ += w;
    }

    // h += c * other (same grid required).
    void accumulate(const WeightedHistogram& other, double c = 1.0) {
        if (!(grid_ == other.grid_))
            throw GridMismatchError("WeightedHistogram::accumulate: grid mismatch");
        for (std::size_t i = 0; i < mass_.size(); ++i) mass_[i] += c * other.mass_[i];
        total_ += c * other.total_;
    }

    void scale(double c) {
        for (double& m : mass_) m *= c;
        total_ *= c;
    }

    WeightedHistogram normalized() const {
        if (!(total_ > 0.0)) throw Error("WeightedHistogram: cannot normalize empty histogram");
        WeightedHistogram h = *this;
        h.scale(1.0 / total_);
        return h;
    }

private:
    GridSpec grid_;
    std::vector<double> mass_;
    double total_ = 0.0;
};

// Total-variation distance between the mass-normalized histograms: half the
// L1 distance, in [0, 1].
inline double tv_distance(const WeightedHistogram& a, const WeightedHistogram& b) {
    if (!(a.grid() == b.grid())) throw GridMismatchError("tv_distance: grid mismatch");
    if (!(a.total() > 0.0) || !(b.total() > 0.0))
        throw Error("tv_distance: empty histogram");
    double d = 0.0;
    for (std::size_t i = 0; i < a.mass().size(); ++i)
        d += std::abs(a.mass()[i] / a.total() - b.mass()[i] / b.total());
    return 0.5 * d;
}

// Sum a 2-D histogram over the other axis.  axis = 0 keeps axis0.
inline WeightedHistogram marginal(const WeightedHistogram& h, int axis) {
    const GridSpec& g = h.grid();
    if (g.dims != 2) throw Error("marginal: histogram is not 2-D");
    GridSpec m = axis == 0 ? GridSpec::line(g.min0, g.max0, g.n0)
                           : GridSpec::line(g.min1, g.max1, g.n1);
    WeightedHistogram out(m);
    for (int i = 0; i < g.n0; ++i)
        for (int j = 0; j < g.n1; ++j) {
            const double w = h.mass()[i * g.n1 + j];
            if (w != 0.0) out.add_bin(axis == 0 ? i : j, w);
        }
    return out;
}

}  // namespace strmc
