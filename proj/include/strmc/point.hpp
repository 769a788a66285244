#pragma once

#include <cassert>
#include <cstdint>
#include <initializer_list>

namespace strmc {

// State of the underlying process: either a continuous point (SDE, dim >= 1)
// or a discrete state index stored in coord[0] with dim == 1.
// Fixed capacity keeps trajectories allocation-free.
struct Point {
    static constexpr int kMaxDim = 4;

    double coord[kMaxDim] = {0, 0, 0, 0};
    int dim = 0;

    Point() = default;
    Point(std::initializer_list<double> cs) {
        assert(static_cast<int>(cs.size()) <= kMaxDim);
        for (double c : cs) coord[dim++] = c;
    }
    static Point scalar(double x) { return Point{x}; }
    static Point of_state(int s) { return Point{static_cast<double>(s)}; }

    double operator[](int i) const { return coord[i]; }
    double& operator[](int i) { return coord[i]; }

    int state() const { return static_cast<int>(coord[0]); }

    friend bool operator==(const Point& a, const Point& b) {
        if (a.dim != b.dim) return false;
        for (int i = 0; i < a.dim; ++i)
            if (a.coord[i] != b.coord[i]) return false;
        return true;
    }
};

}  // namespace strmc
