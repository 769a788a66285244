#pragma once

#include <cmath>
#include <cstddef>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "strmc/errors.hpp"
#include "strmc/measure.hpp"
#include "strmc/trajectory.hpp"

namespace strmc {

using Matrix = std::vector<std::vector<double>>;

// All exit records of one sweep, grouped by the stratum they started in.
struct SweepBatches {
    std::vector<std::vector<ExitRecord>> per_stratum;

    std::size_t strata_count() const { return per_stratum.size(); }
    long long total_steps() const {
        long long s = 0;
        for (const auto& batch : per_stratum)
            for (const ExitRecord& r : batch) s += r.tau;
        return s;
    }
};

// Row-stochastic exit frequency matrix: row k, column j holds the fraction of
// stratum k's trajectories that ended in stratum j.  The diagonal is zero by
// construction (an exit never lands in its own stratum).
inline Matrix exit_matrix(const SweepBatches& sweep) {
    const std::size_t J = sweep.strata_count();
    Matrix G(J, std::vector<double>(J, 0.0));
    for (std::size_t k = 0; k < J; ++k) {
        const auto& batch = sweep.per_stratum[k];
        if (batch.empty())
            throw StarvedStratumError("exit_matrix: stratum " + std::to_string(k) +
                                      " produced no exit records");
        for (const ExitRecord& r : batch) G[k][r.exit_stratum] += 1.0;
        for (double& g : G[k]) g /= static_cast<double>(batch.size());
    }
    return G;
}

// p G + (1 - p) I.  p = 1 leaves G unchanged; any p in (0, 1] preserves the
// principal left eigenvector while killing periodicity.
inline Matrix lazy(const Matrix& G, double p) {
    if (!(p > 0.0) || p > 1.0) throw Error("lazy: p must lie in (0, 1]");
    Matrix L = G;
    for (std::size_t i = 0; i < L.size(); ++i) {
        for (double& v : L[i]) v *= p;
        L[i][i] += 1.0 - p;
    }
    return L;
}

inline std::vector<double> mat_vec_left(const std::vector<double>& v, const Matrix& G) {
    std::vector<double> out(G.size(), 0.0);
    for (std::size_t k = 0; k < G.size(); ++k)
        for (std::size_t j = 0; j < G.size(); ++j) out[j] += v[k] * G[k][j];
    return out;
}

namespace detail {

inline std::vector<int> reachable_from(const Matrix& G, std::size_t src, bool transpose) {
    std::vector<int> seen(G.size(), 0);
    std::queue<std::size_t> q;
    q.push(src);
    seen[src] = 1;
    while (!q.empty()) {
        const std::size_t i = q.front();
        q.pop();
        for (std::size_t j = 0; j < G.size(); ++j) {
            const double w = transpose ? G[j][i] : G[i][j];
            if (w > 0.0 && !seen[j]) {
                seen[j] = 1;
                q.push(j);
            }
        }
    }
    return seen;
}

}  // namespace detail

// Left row vector z with z G = z, z > 0, sum z = 1.  Requires the support
// graph of G to be strongly connected; otherwise the eigenvector is not
// unique, and the error names the strata that do not communicate with
// stratum 0.  The iteration runs on lazy(G, 1/2) so periodic exit patterns
// (e.g. two strata that always swap) still converge; the residual is
// measured against G itself.
inline std::vector<double> principal_left_eigenvector(const Matrix& G, double tol = 1e-13,
                                                      int max_iters = 200000) {
    const std::size_t J = G.size();
    const std::vector<int> fwd = detail::reachable_from(G, 0, false);
    const std::vector<int> bwd = detail::reachable_from(G, 0, true);
    std::string missing;
    for (std::size_t j = 0; j < J; ++j)
        if (!fwd[j] || !bwd[j]) missing += (missing.empty() ? "" : ", ") + std::to_string(j);
    if (!missing.empty())
        throw SolverError("principal_left_eigenvector: exit graph is not strongly connected "
                          "(strata not communicating with stratum 0: " + missing + ")");

    const Matrix L = lazy(G, 0.5);
    std::vector<double> z(J, 1.0 / static_cast<double>(J));
    for (int it = 0; it < max_iters; ++it) {
        std::vector<double> next = mat_vec_left(z, L);
        double sum = 0.0;
        for (double v : next) sum += v;
        for (double& v : next) v /= sum;
        z.swap(next);
        const std::vector<double> zg = mat_vec_left(z, G);
        double residual = 0.0;
        for (std::size_t j = 0; j < J; ++j) residual += std::abs(zg[j] - z[j]);
        if (residual < tol) return z;
    }
    throw SolverError("principal_left_eigenvector: power iteration did not converge");
}

// One multiplication step of the weight recursion: a' = a G.  Pure
// arithmetic -- a permutation G makes point-mass weights oscillate, which is
// legitimate here; the update step is what refuses to continue a sweep once
// a stratum's weight hits zero.
inline std::vector<double> weight_multiply(const std::vector<double>& a, const Matrix& G) {
    return mat_vec_left(a, G);
}

// Exit points pooled across source strata, each of stratum k's records
// carrying mass w_k / M_k, then normalized per destination.  Both update
// rules share this step; they differ in which weight vector w they hand in
// (the pre-update weights for the multiplicative rule, the just-solved
// eigenvector for the spectral rule).
inline std::vector<EmpiricalMeasure> pool_exit_points(const SweepBatches& sweep,
                                                      const std::vector<double>& w) {
    const std::size_t J = sweep.strata_count();
    std::vector<EmpiricalMeasure> nu(J);
    for (std::size_t k = 0; k < J; ++k) {
        const auto& batch = sweep.per_stratum[k];
        if (batch.empty())
            throw StarvedStratumError("pool_exit_points: stratum " + std::to_string(k) +
                                      " produced no exit records");
        const double mass = w[k] / static_cast<double>(batch.size());
        if (mass == 0.0) continue;
        for (const ExitRecord& r : batch) nu[r.exit_stratum].add(r.exit_point, mass);
    }
    for (std::size_t j = 0; j < J; ++j) {
        if (!(nu[j].total_weight() > 0.0))
            throw StarvedStratumError("pool_exit_points: no trajectory exited into stratum " +
                                      std::to_string(j));
        nu[j] = nu[j].normalized();
    }
    return nu;
}

enum class UpdateRule { basic, eigen };

inline const char* update_rule_name(UpdateRule r) { return r == UpdateRule::basic ? "basic" : "eigen"; }

// Injection measures and stratum weights carried between sweeps.
struct InjectionState {
    std::vector<EmpiricalMeasure> nu;
    std::vector<double> weights;
};

// Consume one sweep's exit records: refresh the weights by the chosen rule
// and rebuild every stratum's injection measure from the pooled exit points.
// Returns the exit matrix so callers can log or analyze it.
inline Matrix apply_update(InjectionState& state, const SweepBatches& sweep, UpdateRule rule,
                           double solver_tol = 1e-13) {
    Matrix G = exit_matrix(sweep);
    std::vector<double> next_w;
    if (rule == UpdateRule::basic) {
        next_w = weight_multiply(state.weights, G);
        for (std::size_t j = 0; j < next_w.size(); ++j)
            if (!(next_w[j] > 0.0))
                throw VanishingWeightError("weight of stratum " + std::to_string(j) +
                                           " reached zero");
        // Each exit keeps the weight of the stratum it came from; the
        // per-destination normalizer is then exactly the new weight.
        state.nu = pool_exit_points(sweep, state.weights);
    } else {
        next_w = principal_left_eigenvector(G, solver_tol);
        state.nu = pool_exit_points(sweep, next_w);
    }
    double sum = 0.0;
    for (double v : next_w) sum += v;
    for (double& v : next_w) v /= sum;
    state.weights = std::move(next_w);
    return G;
}

}  // namespace strmc
