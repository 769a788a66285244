#pragma once

// Exact reference computations for finite chains with disjoint index-set
// strata.  Everything here is dense linear algebra: exit laws, occupation
// measures, the fixed point of the iteration, quasi-stationary laws, and the
// constants that drive the convergence and sensitivity bounds.  The sampling
// engine is tested against these results.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "strmc/errors.hpp"
#include "strmc/injection.hpp"
#include "strmc/kernels.hpp"

namespace strmc {

struct FiniteStratifiedChain {
    DiscreteChain chain;
    std::vector<std::vector<int>> strata;  // disjoint state sets covering everything
    std::vector<int> stratum_of;           // state -> stratum index

    FiniteStratifiedChain(DiscreteChain c, std::vector<std::vector<int>> sets)
        : chain(std::move(c)), strata(std::move(sets)), stratum_of(chain.size(), -1) {
        const int n = chain.size();
        for (std::size_t j = 0; j < strata.size(); ++j) {
            if (strata[j].empty())
                throw ConfigError("FiniteStratifiedChain: stratum " + std::to_string(j) + " is empty");
            for (int s : strata[j]) {
                if (s < 0 || s >= n)
                    throw ConfigError("FiniteStratifiedChain: state index out of range");
                if (stratum_of[s] != -1)
                    throw ConfigError("FiniteStratifiedChain: state " + std::to_string(s) +
                                      " appears in two strata");
                stratum_of[s] = static_cast<int>(j);
            }
        }
        for (int s = 0; s < n; ++s)
            if (stratum_of[s] == -1)
                throw ConfigError("FiniteStratifiedChain: state " + std::to_string(s) +
                                  " belongs to no stratum");
    }

    int states() const { return chain.size(); }
    int strata_count() const { return static_cast<int>(strata.size()); }
};

namespace detail {

inline Eigen::MatrixXd to_eigen(const DiscreteChain& c) {
    const int n = c.size();
    Eigen::MatrixXd P(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) P(i, j) = c.p(i, j);
    return P;
}

// p M + (1 - p) I, the same laziness convention as lazy() for exit matrices.
inline Eigen::MatrixXd lazy_matrix(const Eigen::MatrixXd& M, double p) {
    return p * M + (1.0 - p) * Eigen::MatrixXd::Identity(M.rows(), M.cols());
}

// Row vector v  ->  v (I - P_AA)^{-1}, where the index list picks the block.
inline Eigen::RowVectorXd occupation_solve(const Eigen::MatrixXd& P, const std::vector<int>& A,
                                           const Eigen::RowVectorXd& v) {
    const int m = static_cast<int>(A.size());
    Eigen::MatrixXd M(m, m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) M(a, b) = (a == b ? 1.0 : 0.0) - P(A[a], A[b]);
    // x (I - P_AA) = v  <=>  (I - P_AA)^T x^T = v^T
    Eigen::VectorXd x = M.transpose().partialPivLu().solve(v.transpose());
    double residual = (M.transpose() * x - v.transpose()).cwiseAbs().maxCoeff();
    if (!std::isfinite(residual) || residual > 1e-8 * std::max(1.0, v.cwiseAbs().maxCoeff()))
        throw SolverError("occupation_solve: stratum block is singular (no escape route?)");
    return x.transpose();
}

// Restriction of the chain to the index set A with every row renormalized by
// its stay probability.  A state that always exits in one step violates the
// standing in-stratum assumption and is an error here.
inline Eigen::MatrixXd row_normalized_restriction(const Eigen::MatrixXd& P,
                                                  const std::vector<int>& A) {
    const int m = static_cast<int>(A.size());
    Eigen::MatrixXd R(m, m);
    for (int a = 0; a < m; ++a) {
        double rowsum = 0.0;
        for (int b = 0; b < m; ++b) rowsum += P(A[a], A[b]);
        if (!(rowsum > 0.0))
            throw SolverError("restricted chain: state " + std::to_string(A[a]) +
                              " always exits immediately");
        for (int b = 0; b < m; ++b) R(a, b) = P(A[a], A[b]) / rowsum;
    }
    return R;
}

// Strong connectivity of the support graph of a small square matrix.
inline bool strongly_connected(const Eigen::MatrixXd& M) {
    const int n = static_cast<int>(M.rows());
    for (int pass = 0; pass < 2; ++pass) {
        std::vector<int> seen(n, 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        while (!stack.empty()) {
            const int i = stack.back();
            stack.pop_back();
            for (int j = 0; j < n; ++j) {
                const double w = pass == 0 ? M(i, j) : M(j, i);
                if (w > 0.0 && !seen[j]) {
                    seen[j] = 1;
                    stack.push_back(j);
                }
            }
        }
        for (int i = 0; i < n; ++i)
            if (!seen[i]) return false;
    }
    return true;
}

}  // namespace detail

// Exit law of every starting state: row x holds the distribution of the state
// in which a walker started at x is first relabeled.  With disjoint strata
// the first relabeling is the first step that lands outside the start
// stratum, so row x is supported on the complement of x's stratum and rows
// sum to one.
inline Eigen::MatrixXd exact_exit_law(const FiniteStratifiedChain& f) {
    const int n = f.states();
    const Eigen::MatrixXd P = detail::to_eigen(f.chain);
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < f.strata_count(); ++j) {
        const std::vector<int>& A = f.strata[j];
        for (int x : A) {
            Eigen::RowVectorXd delta = Eigen::RowVectorXd::Zero(static_cast<int>(A.size()));
            for (std::size_t a = 0; a < A.size(); ++a)
                if (A[a] == x) delta(static_cast<int>(a)) = 1.0;
            const Eigen::RowVectorXd occ = detail::occupation_solve(P, A, delta);
            // One more step from each occupied in-stratum state; keep only
            // the mass that leaves the stratum.
            for (std::size_t a = 0; a < A.size(); ++a)
                for (int y = 0; y < n; ++y)
                    if (f.stratum_of[y] != j) Q(x, y) += occ(static_cast<int>(a)) * P(A[a], y);
        }
    }
    return Q;
}

// Expected visit counts before relabeling, starting from a law on stratum j:
// full-length row vector supported on the stratum (the exit state itself is
// excluded, matching what the sampler credits to occupation).  Total mass is
// the expected exit time.
inline std::vector<double> exact_occupation(const FiniteStratifiedChain& f, int j,
                                            const std::vector<double>& nu_full) {
    const Eigen::MatrixXd P = detail::to_eigen(f.chain);
    const std::vector<int>& A = f.strata[j];
    Eigen::RowVectorXd v(static_cast<int>(A.size()));
    for (std::size_t a = 0; a < A.size(); ++a) v(static_cast<int>(a)) = nu_full[A[a]];
    const Eigen::RowVectorXd occ = detail::occupation_solve(P, A, v);
    std::vector<double> out(f.states(), 0.0);
    for (std::size_t a = 0; a < A.size(); ++a) out[A[a]] = occ(static_cast<int>(a));
    return out;
}

struct ExactFixedPoint {
    std::vector<double> pi;                    // stationary law of the full chain
    std::vector<std::vector<double>> nu_star;  // fixed-point injection law per stratum
    std::vector<double> a_star;                // fixed-point stratum weights (sum 1)
    std::vector<double> mean_exit_time;        // E[time to relabeling] from nu_star_j
    std::vector<double> mu_star;               // normalized weighted occupation aggregate
    Matrix G_star;                             // exit matrix at the fixed point

    // The one probability law the per-stratum pieces add up to.
    std::vector<double> stacked_nu() const {
        std::vector<double> out(pi.size(), 0.0);
        for (std::size_t j = 0; j < nu_star.size(); ++j)
            for (std::size_t y = 0; y < out.size(); ++y) out[y] += a_star[j] * nu_star[j][y];
        return out;
    }
};

// Stationary law by direct linear solve (the sampling side uses power
// iteration, so the two routes check each other in the tests).
inline std::vector<double> stationary_direct(const DiscreteChain& chain) {
    // The least-squares system below is solvable for reducible chains too --
    // it would just pick one of many invariant laws -- so rule them out first.
    if (!chain.irreducible()) throw SolverError("stationary_direct: chain is reducible");
    const int n = chain.size();
    const Eigen::MatrixXd P = detail::to_eigen(chain);
    Eigen::MatrixXd A(n + 1, n);
    A.topRows(n) = P.transpose() - Eigen::MatrixXd::Identity(n, n);
    A.bottomRows(1) = Eigen::RowVectorXd::Ones(n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 1);
    b(n) = 1.0;
    Eigen::VectorXd pi = A.colPivHouseholderQr().solve(b);
    if ((A * pi - b).cwiseAbs().maxCoeff() > 1e-10)
        throw SolverError("stationary_direct: no unique stationary law (chain reducible?)");
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
        if (pi(i) < -1e-12) throw SolverError("stationary_direct: negative stationary mass");
        out[i] = std::max(pi(i), 0.0);
    }
    return out;
}

// The invariant configuration of the iteration, computed in closed form:
//   * nu_star_j: the stationary flow into stratum j, i.e. the law of where
//     walkers are when they are first relabeled as j-walkers;
//   * a_star_j: proportional to pi(A_j) / E[lifetime under nu_star_j];
//   * mu_star: the weighted occupation aggregate, which reproduces the
//     stationary law of the chain once normalized.
inline ExactFixedPoint exact_fixed_point(const FiniteStratifiedChain& f) {
    const int n = f.states();
    const int J = f.strata_count();
    const Eigen::MatrixXd P = detail::to_eigen(f.chain);

    ExactFixedPoint fp;
    fp.pi = stationary_direct(f.chain);
    fp.nu_star.assign(J, std::vector<double>(n, 0.0));
    fp.a_star.assign(J, 0.0);
    fp.mean_exit_time.assign(J, 0.0);
    fp.mu_star.assign(n, 0.0);
    fp.G_star.assign(J, std::vector<double>(J, 0.0));

    for (int j = 0; j < J; ++j) {
        const std::vector<int>& A = f.strata[j];
        const int m = static_cast<int>(A.size());

        // Entering flow: pi(y) minus the part of pi(y) fed from inside the
        // stratum.  Nonnegative by stationarity; tiny negatives are rounding.
        double pi_A = 0.0;
        Eigen::RowVectorXd nu(m);
        for (int a = 0; a < m; ++a) {
            double inflow = fp.pi[A[a]];
            for (int b = 0; b < m; ++b) inflow -= fp.pi[A[b]] * P(A[b], A[a]);
            if (inflow < -1e-10)
                throw SolverError("exact_fixed_point: negative entering flow");
            nu(a) = std::max(inflow, 0.0);
            pi_A += fp.pi[A[a]];
        }
        const double flow = nu.sum();
        if (!(flow > 0.0))
            throw SolverError("exact_fixed_point: stratum " + std::to_string(j) +
                              " has no entering flow");
        nu /= flow;
        for (int a = 0; a < m; ++a) fp.nu_star[j][A[a]] = nu(a);

        const Eigen::RowVectorXd occ = detail::occupation_solve(P, A, nu);
        fp.mean_exit_time[j] = occ.sum();
        fp.a_star[j] = pi_A / fp.mean_exit_time[j];
        if (!(fp.a_star[j] > 0.0))
            throw SolverError("exact_fixed_point: stratum " + std::to_string(j) +
                              " carries zero weight");
        for (int a = 0; a < m; ++a) fp.mu_star[A[a]] = fp.a_star[j] * occ(a);

        // Exit law from nu_star_j, aggregated per destination stratum.
        for (int a = 0; a < m; ++a)
            for (int y = 0; y < n; ++y) {
                const int k = f.stratum_of[y];
                if (k != j) fp.G_star[j][k] += occ(a) * P(A[a], y);
            }
        double row = 0.0;
        for (double g : fp.G_star[j]) row += g;
        for (double& g : fp.G_star[j]) g /= row;
    }

    double W = 0.0;
    for (double a : fp.a_star) W += a;
    for (double& a : fp.a_star) a /= W;
    double mu_mass = 0.0;
    for (double v : fp.mu_star) mu_mass += v;
    for (double& v : fp.mu_star) v /= mu_mass;
    return fp;
}

// Quasi-stationary start law of stratum j: the invariant law of the chain
// restricted to the stratum with each row renormalized (the walker is
// conditioned to stay).  Full-length vector supported on the stratum.
inline std::vector<double> quasi_stationary_law(const FiniteStratifiedChain& f, int j,
                                                double tol = 1e-13, int max_iters = 200000) {
    const Eigen::MatrixXd P = detail::to_eigen(f.chain);
    const std::vector<int>& A = f.strata[j];
    const int m = static_cast<int>(A.size());
    const Eigen::MatrixXd R = detail::row_normalized_restriction(P, A);
    if (m > 1 && !detail::strongly_connected(R))
        throw SolverError("quasi_stationary_law: restricted chain of stratum " + std::to_string(j) +
                          " is reducible");
    // Lazy power iteration (handles periodic restrictions); residual is
    // measured against R itself.
    Eigen::RowVectorXd v = Eigen::RowVectorXd::Constant(m, 1.0 / m);
    const Eigen::MatrixXd L = 0.5 * (R + Eigen::MatrixXd::Identity(m, m));
    for (int it = 0; it < max_iters; ++it) {
        Eigen::RowVectorXd next = v * L;
        next /= next.sum();
        v = next;
        if ((v * R - v).cwiseAbs().sum() < tol) {
            std::vector<double> out(f.states(), 0.0);
            for (int a = 0; a < m; ++a) out[A[a]] = v(a);
            return out;
        }
    }
    throw SolverError("quasi_stationary_law: power iteration did not converge");
}

// Coupling constant of the exit step: the largest c such that the exit law
// from every single in-stratum start dominates c times the exit law of that
// stratum's quasi-stationary start.  Point masses are the extreme case, so
// the same c holds for every injection law by mixture.  Always computed from
// the plain exit law: laziness is a device applied on top of it.
inline double exit_coupling_constant(const FiniteStratifiedChain& f) {
    const Eigen::MatrixXd P = detail::to_eigen(f.chain);
    const Eigen::MatrixXd Q = exact_exit_law(f);
    const int n = f.states();
    double c = 1.0;
    for (int j = 0; j < f.strata_count(); ++j) {
        // A stratum whose interior does not mix has no canonical conditioned
        // start law, so no positive domination constant can be certified:
        // report 0 (every downstream rate bound treats 0 as "assumption
        // fails") instead of erroring out.
        const std::vector<int>& A = f.strata[j];
        if (A.size() > 1 &&
            !detail::strongly_connected(detail::row_normalized_restriction(P, A)))
            return 0.0;
        const std::vector<double> qsd = quasi_stationary_law(f, j);
        Eigen::RowVectorXd ref = Eigen::RowVectorXd::Zero(n);
        for (int x : f.strata[j])
            if (qsd[x] > 0.0) ref += qsd[x] * Q.row(x);
        for (int x : f.strata[j])
            for (int y = 0; y < n; ++y)
                if (ref(y) > 0.0) c = std::min(c, Q(x, y) / ref(y));
    }
    return std::clamp(c, 0.0, 1.0);
}

struct MinorizationResult {
    bool found = false;
    int m = 0;       // smallest horizon that works
    double u = 0.0;  // mass bound at that horizon
};

// Uniform index-coverage bound: after between m and m_max applications of
// the (optionally lazified) exit law, a walker started from any stratum's
// quasi-stationary law gives every stratum k at least u * a_star_k of its
// mass.  Returns the smallest m for which u is positive; without laziness a
// periodic stratum layout (two strata that always swap) makes every horizon
// fail, which the caller sees as found = false.
inline MinorizationResult index_minorization(const FiniteStratifiedChain& f, int m_max,
                                             double laziness_p = 1.0) {
    const Eigen::MatrixXd Qp = detail::lazy_matrix(exact_exit_law(f), laziness_p);
    const ExactFixedPoint fp = exact_fixed_point(f);
    const int J = f.strata_count();

    // ratio_floor[n-1]: worst stratum-coverage ratio after exactly n hops.
    std::vector<double> ratio_floor(m_max, std::numeric_limits<double>::infinity());
    for (int j = 0; j < J; ++j) {
        const std::vector<double> qsd = quasi_stationary_law(f, j);
        Eigen::RowVectorXd rho(f.states());
        for (int s = 0; s < f.states(); ++s) rho(s) = qsd[s];
        for (int n = 1; n <= m_max; ++n) {
            rho = rho * Qp;
            for (int k = 0; k < J; ++k) {
                double mass = 0.0;
                for (int s : f.strata[k]) mass += rho(s);
                ratio_floor[n - 1] = std::min(ratio_floor[n - 1], mass / fp.a_star[k]);
            }
        }
    }

    // u_m is the minimum of ratio_floor over [m, m_max]; scan suffix minima
    // for the smallest m that stays positive.
    MinorizationResult best;
    std::vector<double> u_of_m(m_max + 1, 0.0);
    double suffix = std::numeric_limits<double>::infinity();
    for (int n = m_max; n >= 1; --n) {
        suffix = std::min(suffix, ratio_floor[n - 1]);
        u_of_m[n] = suffix;
    }
    for (int m = 1; m <= m_max; ++m)
        if (u_of_m[m] > 0.0) {
            best.found = true;
            best.m = m;
            best.u = u_of_m[m];
            break;
        }
    return best;
}

struct MixingRate {
    double lambda = 1.0;  // worst observed contraction of differences under G
    double slem = 1.0;    // second-largest eigenvalue modulus, for reference
};

// Contraction factor of the weight recursion: the largest one-step shrink
// ratio of (e_i - e_j) G^n over all extreme-point pairs and horizons in
// [m_start, m_max].  Pairs that have already coupled (zero difference) are
// skipped.  The second eigenvalue modulus is reported alongside as the
// asymptotic rate.
inline MixingRate weight_mixing_rate(const Matrix& G, int m_start = 1, int m_max = 60) {
    const int J = static_cast<int>(G.size());
    Eigen::MatrixXd M(J, J);
    for (int i = 0; i < J; ++i)
        for (int j = 0; j < J; ++j) M(i, j) = G[i][j];

    MixingRate out;
    out.lambda = 0.0;
    for (int i = 0; i < J; ++i)
        for (int j = i + 1; j < J; ++j) {
            Eigen::RowVectorXd v = Eigen::RowVectorXd::Zero(J);
            v(i) = 1.0;
            v(j) = -1.0;
            double norm = 2.0;
            for (int n = 1; n <= m_max; ++n) {
                v = v * M;
                const double next = v.cwiseAbs().sum();
                if (norm <= 1e-290) break;  // coupled: nothing left to contract
                if (n >= m_start) out.lambda = std::max(out.lambda, next / norm);
                norm = next;
            }
        }

    Eigen::EigenSolver<Eigen::MatrixXd> es(M);
    std::vector<double> mods;
    for (int i = 0; i < J; ++i) mods.push_back(std::abs(es.eigenvalues()(i)));
    std::sort(mods.begin(), mods.end(), std::greater<double>());
    out.slem = J > 1 ? mods[1] : 0.0;
    return out;
}

// One exact sweep of the multiplicative update on a finite chain: exit laws
// in closed form instead of sampled.  Measures are full-length vectors per
// stratum.  In stacked form (sum of a_j nu_j) this map is exactly one
// application of the exit law, which is what the convergence statements are
// about.
struct ExactSweepResult {
    Matrix G;
    std::vector<std::vector<double>> nu;
    std::vector<double> weights;
};

inline ExactSweepResult exact_basic_sweep(const FiniteStratifiedChain& f,
                                          const std::vector<std::vector<double>>& nu,
                                          const std::vector<double>& weights) {
    const int n = f.states();
    const int J = f.strata_count();
    const Eigen::MatrixXd P = detail::to_eigen(f.chain);

    // Exit law of each stratum under its current injection law.
    std::vector<Eigen::RowVectorXd> exit_law(J);
    ExactSweepResult r;
    r.G.assign(J, std::vector<double>(J, 0.0));
    for (int j = 0; j < J; ++j) {
        const std::vector<int>& A = f.strata[j];
        Eigen::RowVectorXd v(static_cast<int>(A.size()));
        for (std::size_t a = 0; a < A.size(); ++a) v(static_cast<int>(a)) = nu[j][A[a]];
        const Eigen::RowVectorXd occ = detail::occupation_solve(P, A, v);
        exit_law[j] = Eigen::RowVectorXd::Zero(n);
        for (std::size_t a = 0; a < A.size(); ++a)
            for (int y = 0; y < n; ++y)
                if (f.stratum_of[y] != j)
                    exit_law[j](y) += occ(static_cast<int>(a)) * P(A[a], y);
        for (int y = 0; y < n; ++y) r.G[j][f.stratum_of[y]] += exit_law[j](y);
    }

    r.weights = weight_multiply(weights, r.G);
    // Pooling carries the pre-update weights; the per-destination normalizer
    // then equals the new weight of that destination.
    r.nu.assign(J, std::vector<double>(n, 0.0));
    for (int j = 0; j < J; ++j)
        for (int y = 0; y < n; ++y) r.nu[f.stratum_of[y]][y] += weights[j] * exit_law[j](y);
    for (int k = 0; k < J; ++k) {
        double mass = 0.0;
        for (double v : r.nu[k]) mass += v;
        if (!(mass > 0.0))
            throw StarvedStratumError("exact_basic_sweep: no flow into stratum " + std::to_string(k));
        for (double& v : r.nu[k]) v /= mass;
    }
    return r;
}

struct ContractionCheck {
    double c = 0.0;
    MinorizationResult minorization;
    int violations = 0;         // bound breaches over the checked horizon
    double worst_margin = 0.0;  // max of (observed TV - bound); <= slack when clean
    std::vector<double> observed_tv;
    std::vector<double> bound;
};

// Track the exact injection iteration -- in stacked form, plain powers of
// the (lazified) exit law -- from the worst point-mass start, and compare
// its distance to the fixed point against the geometric envelope
// (1 - c^2 u)^k at multiples of m + 1 hops.  The coupling constant always
// comes from the plain exit law; the coverage pair (m, u) and the iteration
// itself use the lazified one.  A tiny slack absorbs floating-point residue
// when the envelope is exactly zero.
inline ContractionCheck tv_contraction_check(const FiniteStratifiedChain& f,
                                             double laziness_p = 1.0, int k_max = 50,
                                             double slack = 1e-12) {
    ContractionCheck out;
    out.c = exit_coupling_constant(f);
    out.minorization = index_minorization(f, 40, laziness_p);
    if (!out.minorization.found)
        throw SolverError("tv_contraction_check: no coverage horizon up to 40 hops "
                          "(layout periodic? try more laziness)");
    const int m = out.minorization.m;
    const double rate = 1.0 - out.c * out.c * out.minorization.u;

    const int n = f.states();
    const Eigen::MatrixXd Qp = detail::lazy_matrix(exact_exit_law(f), laziness_p);
    const ExactFixedPoint fp = exact_fixed_point(f);
    const std::vector<double> target = fp.stacked_nu();

    // Every point-mass start at once: row x of powers of the exit law.
    Eigen::MatrixXd rows = Eigen::MatrixXd::Identity(n, n);
    for (int k = 1; k <= k_max; ++k) {
        for (int s = 0; s < m + 1; ++s) rows *= Qp;
        double observed = 0.0;
        for (int x = 0; x < n; ++x) {
            double d = 0.0;
            for (int y = 0; y < n; ++y) d += std::abs(rows(x, y) - target[y]);
            observed = std::max(observed, 0.5 * d);
        }
        const double envelope = std::pow(rate, k);
        out.observed_tv.push_back(observed);
        out.bound.push_back(envelope);
        out.worst_margin = std::max(out.worst_margin, observed - envelope);
        if (observed > envelope + slack) ++out.violations;
    }
    return out;
}

struct LimitingRate {
    double q = 1.0;
    bool degenerate = false;  // no coupling or no contraction: bound collapses to 1
};

// Asymptotic per-sweep rate implied by a coupling constant c and a weight
// contraction factor lambda: the best achievable balance between the
// injection-coupling term and the weight-relaxation term,
//
//   q = inf over beta in (0,1), alpha in (0, beta c / (S (1 - c))) of
//       max(1 - beta c + alpha S (1 - c),
//           (1 + (1 - beta) alpha lambda) / (1 + (1 - beta) alpha)),
//
// with S = 1 / (1 - lambda).  Evaluated by a two-level grid search with
// successive refinement around the incumbent, so the result is an upper
// bound on the true infimum that only tightens as resolution grows.
inline LimitingRate limiting_rate(double c, double lambda, int resolution = 160) {
    LimitingRate out;
    if (!(c > 0.0) || lambda >= 1.0) {
        out.degenerate = true;
        return out;
    }
    c = std::min(c, 1.0);
    lambda = std::max(lambda, 0.0);
    const double S = 1.0 / (1.0 - lambda);

    auto value = [&](double beta, double alpha) {
        const double t1 = 1.0 - beta * c + alpha * S * (1.0 - c);
        const double t2 = (1.0 + (1.0 - beta) * alpha * lambda) / (1.0 + (1.0 - beta) * alpha);
        return std::max(t1, t2);
    };
    auto alpha_cap = [&](double beta) {
        if (c >= 1.0) return 1e9;  // constraint is vacuous: the alpha term vanishes
        return beta * c / (S * (1.0 - c));
    };

    auto search = [&](int res) {
        double best = 1.0, best_beta = 0.5, best_frac = 1e-6;
        auto scan = [&](double beta_lo, double beta_hi, double frac_lo, double frac_hi, int nb,
                        int na) {
            for (int ib = 0; ib <= nb; ++ib) {
                const double beta = beta_lo + (beta_hi - beta_lo) * ib / nb;
                if (beta <= 0.0 || beta >= 1.0) continue;
                const double cap = alpha_cap(beta);
                for (int ia = 0; ia <= na; ++ia) {
                    // log-spaced fractions of the cap reach both tiny and
                    // near-cap alphas
                    const double frac = frac_lo * std::pow(frac_hi / frac_lo, double(ia) / na);
                    const double alpha = cap * frac;
                    if (!(alpha > 0.0) || alpha >= cap) continue;
                    const double v = value(beta, alpha);
                    if (v < best) {
                        best = v;
                        best_beta = beta;
                        best_frac = frac;
                    }
                }
            }
        };
        scan(0.0, 1.0, 1e-12, 1.0 - 1e-12, res, 2 * res);
        for (int round = 0; round < 4; ++round) {
            const double bw = std::pow(10.0, -(round + 1));
            scan(std::max(0.0, best_beta - bw), std::min(1.0, best_beta + bw),
                 std::max(1e-14, best_frac * 0.05), std::min(1.0 - 1e-13, best_frac * 20.0),
                 res * 3 / 4, res * 3 / 2);
        }
        return best;
    };

    // Take the minimum over a halving ladder of resolutions.  The incumbent-
    // centered refinement rounds are not nested between neighbouring
    // resolutions, so a single-resolution search can wobble by a hair as the
    // grid changes; the ladder for a doubled resolution contains every level
    // of the coarser ladder, which makes refinement monotone by construction.
    double best = 1.0;
    for (int res = std::max(resolution, 40); res >= 40; res /= 2)
        best = std::min(best, search(res));
    out.q = std::min(best, 1.0);
    return out;
}

struct SensitivityBound {
    double r_infinity = 0.0;
    double envelope = 1.0;  // worst cumulative weight amplification
    double rate = 1.0;      // per-sweep contraction toward the perturbed fixed point
    double radius = 0.0;    // largest starting distance the bound tolerates
    bool unbounded_radius = false;
};

// Stability of the fixed-point weights under perturbations of the exit
// matrix.  theta(i, k) caps the log-response of the weights to entry (i, k);
// together with the coupling constant and the fixed-point weights it yields
// a contraction rate that survives the perturbation, and the radius within
// which that rate is certified.
inline SensitivityBound sensitivity_rate_bound(double c, const std::vector<double>& a_star,
                                               const Matrix& theta) {
    const int J = static_cast<int>(a_star.size());
    for (double a : a_star)
        if (!(a > 0.0)) throw Error("sensitivity_rate_bound: weights must be strictly positive");
    SensitivityBound out;

    double sup_a = 0.0;
    for (double a : a_star) sup_a = std::max(sup_a, a);
    double sup_growth = 0.0;  // sup over (i, k) of (e^theta - 1) / a_star_i
    double sup_direct = 0.0;  // sup over (i, k) of theta / a_star_i
    double theta_rows = 0.0;  // sum over i of the row-max of theta
    for (int i = 0; i < J; ++i) {
        double row_max = 0.0;
        for (int k = 0; k < J; ++k) {
            if (k == i) continue;
            row_max = std::max(row_max, theta[i][k]);
            sup_growth = std::max(sup_growth, std::expm1(theta[i][k]) / a_star[i]);
            sup_direct = std::max(sup_direct, theta[i][k] / a_star[i]);
        }
        theta_rows += row_max;
    }

    out.r_infinity = 2.0 * (1.0 - c) * sup_a * sup_growth;
    out.envelope = std::exp(2.0 * (1.0 - c) * theta_rows);
    out.rate = 1.0 - c / (out.r_infinity + 1.0);
    const double q = 1.0 - c / (out.r_infinity * out.envelope + 1.0);
    const double denom = 2.0 * (1.0 - c) * sup_direct;
    if (denom == 0.0) {
        out.unbounded_radius = true;
        out.radius = std::numeric_limits<double>::infinity();
    } else {
        out.radius = (1.0 + out.r_infinity * out.envelope) / denom * (1.0 / q - 1.0);
    }
    return out;
}

// Empirical log-sensitivity of the fixed-point weights to single entries of
// the exit matrix: bump entry (i, k) by delta, renormalize the row, and
// record the largest resulting shift of log z.  Feeds sensitivity_rate_bound
// with data-driven caps.
inline Matrix weight_log_sensitivity(const Matrix& G, double delta = 1e-5) {
    const int J = static_cast<int>(G.size());
    const std::vector<double> z0 = principal_left_eigenvector(G);
    Matrix theta(J, std::vector<double>(J, 0.0));
    for (int i = 0; i < J; ++i)
        for (int k = 0; k < J; ++k) {
            if (k == i) continue;
            Matrix Gp = G;
            Gp[i][k] += delta;
            double row = 0.0;
            for (double v : Gp[i]) row += v;
            for (double& v : Gp[i]) v /= row;
            const std::vector<double> z = principal_left_eigenvector(Gp);
            double worst = 0.0;
            for (int j = 0; j < J; ++j)
                worst = std::max(worst, std::abs(std::log(z[j]) - std::log(z0[j])));
            theta[i][k] = worst / delta;
        }
    return theta;
}

}  // namespace strmc
