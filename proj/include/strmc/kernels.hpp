#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "strmc/errors.hpp"
#include "strmc/point.hpp"
#include "strmc/rng.hpp"

namespace strmc {

// ============================================================================
// Finite-state Markov chains
// ============================================================================

class DiscreteChain {
public:
    DiscreteChain() = default;

    // Row-major transition matrix, rows[i*n + j] = P(i -> j).
    DiscreteChain(int n, std::vector<double> rows) : n_(n), p_(std::move(rows)) {
        if (n_ <= 0 || p_.size() != static_cast<std::size_t>(n_) * n_)
            throw ConfigError("DiscreteChain: matrix shape mismatch");
        for (int i = 0; i < n_; ++i) {
            double rowsum = 0.0;
            for (int j = 0; j < n_; ++j) {
                const double v = p(i, j);
                if (!(v >= 0.0))
                    throw ConfigError("DiscreteChain: negative entry in row " + std::to_string(i));
                rowsum += v;
            }
            if (std::abs(rowsum - 1.0) > 1e-9)
                throw ConfigError("DiscreteChain: row " + std::to_string(i) +
                                  " sums to " + std::to_string(rowsum));
            // Remove the residual drift so cumulative sampling is exact.
            for (int j = 0; j < n_; ++j) p_[i * n_ + j] /= rowsum;
        }
    }

    int size() const { return n_; }
    double p(int i, int j) const { return p_[i * n_ + j]; }
    const std::vector<double>& rows() const { return p_; }

    Point step(const Point& x, RngStream& rng) const {
        const int i = x.state();
        if (i < 0 || i >= n_) throw Error("DiscreteChain::step: state out of range");
        const double u = rng.uniform();
        double acc = 0.0;
        for (int j = 0; j < n_; ++j) {
            acc += p(i, j);
            if (u < acc) return Point::of_state(j);
        }
        return Point::of_state(n_ - 1);  // u landed in rounding slack
    }

    // Is the directed graph of positive entries strongly connected?
    bool irreducible() const {
        auto reach = [&](bool transpose) {
            std::vector<char> seen(n_, 0);
            std::vector<int> stack{0};
            seen[0] = 1;
            while (!stack.empty()) {
                const int i = stack.back();
                stack.pop_back();
                for (int j = 0; j < n_; ++j) {
                    const double v = transpose ? p(j, i) : p(i, j);
                    if (v > 0.0 && !seen[j]) {
                        seen[j] = 1;
                        stack.push_back(j);
                    }
                }
            }
            for (char c : seen)
                if (!c) return false;
            return true;
        };
        return reach(false) && reach(true);
    }

private:
    int n_ = 0;
    std::vector<double> p_;
};

// Invariant distribution by power iteration.  Iterates x <- x * (P+I)/2 so
// periodic chains converge too; the fixed point is unchanged.  The residual
// is checked against the original P.
inline std::vector<double> stationary_distribution(const DiscreteChain& chain,
                                                   double tol = 1e-12,
                                                   int max_iters = 200000) {
    const int n = chain.size();
    if (!chain.irreducible())
        throw SolverError("stationary_distribution: chain is reducible");
    std::vector<double> x(n, 1.0 / n), y(n);
    for (int it = 0; it < max_iters; ++it) {
        double residual = 0.0;
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += x[i] * chain.p(i, j);
            y[j] = 0.5 * (s + x[j]);
            residual += std::abs(s - x[j]);
        }
        double mass = 0.0;
        for (double v : y) mass += v;
        for (int j = 0; j < n; ++j) x[j] = y[j] / mass;
        if (residual < tol) return x;
    }
    throw SolverError("stationary_distribution: no convergence within iteration cap");
}

// ============================================================================
// Euler–Maruyama SDE kernels
// ============================================================================

// One explicit Euler–Maruyama step of dX = drift(X) dt + noise_scale dW.
// Drift is any callable Point -> Point.
template <class Drift>
class SdeKernel {
public:
    SdeKernel(Drift drift, int dim, double h, double noise_scale)
        : drift_(std::move(drift)), dim_(dim), h_(h), sqrt_h_(std::sqrt(h)),
          noise_scale_(noise_scale) {
        if (!(h > 0.0)) throw ConfigError("SdeKernel: step size must be positive");
    }

    int dim() const { return dim_; }
    double step_size() const { return h_; }

    Point step(const Point& x, RngStream& rng) const {
        const Point b = drift_(x);
        Point y = x;
        for (int i = 0; i < dim_; ++i) {
            const double bi = b[i];
            if (!std::isfinite(bi)) throw Error("SdeKernel::step: non-finite drift");
            y[i] = x[i] + h_ * bi + noise_scale_ * sqrt_h_ * rng.normal();
        }
        return y;
    }

private:
    Drift drift_;
    int dim_;
    double h_, sqrt_h_;
    double noise_scale_;
};

// ============================================================================
// Maier–Stein double-well system
// ============================================================================

struct MaierSteinParams {
    double beta = 10.0;
    double epsilon = 0.01;

    friend bool operator==(const MaierSteinParams&, const MaierSteinParams&) = default;
};

// du = (u - u^3 - beta*u*v^2) dt + sqrt(eps) dW1
// dv = -(1 + u^2) v dt        + sqrt(eps) dW2
// The drift is odd under (u,v) -> (-u,-v); the deterministic system has
// stable points at (+-1, 0) and a saddle at the origin.
inline Point maier_stein_drift(const Point& x, const MaierSteinParams& p) {
    const double u = x[0], v = x[1];
    Point b{0.0, 0.0};
    b[0] = u - u * u * u - p.beta * u * v * v;
    b[1] = -(1.0 + u * u) * v;
    return b;
}

struct MaierSteinDrift {
    MaierSteinParams params;
    Point operator()(const Point& x) const { return maier_stein_drift(x, params); }
};

using MaierSteinKernel = SdeKernel<MaierSteinDrift>;

inline MaierSteinKernel make_maier_stein_kernel(const MaierSteinParams& p, double h) {
    return MaierSteinKernel(MaierSteinDrift{p}, 2, h, std::sqrt(p.epsilon));
}

}  // namespace strmc
