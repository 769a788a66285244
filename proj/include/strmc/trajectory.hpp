#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "strmc/errors.hpp"
#include "strmc/histogram.hpp"
#include "strmc/measure.hpp"
#include "strmc/point.hpp"
#include "strmc/rng.hpp"
#include "strmc/strata.hpp"

namespace strmc {

// How a trajectory remembers the states it occupied before exiting.  Finite
// chains and small problems keep the raw points; SDE runs bin on the fly so a
// long excursion costs memory proportional to the bins it touched, not its
// length.
enum class OccupationMode { points, binned };

struct BinCount {
    int bin;
    double count;
};

// One trajectory, run from its start until the first step whose relabeling
// check fired.  `visited` / `visited_bins` cover X_0 .. X_{tau-1}: the state
// the walker exits into is credited to the destination's injection measure,
// not to this stratum's occupation.
struct ExitRecord {
    int start_stratum = -1;
    int exit_stratum = -1;
    Point start_point{};
    Point exit_point{};
    long long tau = 0;
    std::vector<Point> visited;
    std::vector<BinCount> visited_bins;
};

// A trajectory ran past its step cap without leaving its stratum.  Carries
// what was accumulated so far so callers can log where the walker was stuck.
class TrajectoryCapError : public Error {
public:
    TrajectoryCapError(const std::string& what, ExitRecord partial)
        : Error(what), partial(std::move(partial)) {}
    ExitRecord partial;
};

namespace detail {

// Sort-and-compact a step's worth of raw bin hits into (bin, count) pairs.
inline std::vector<BinCount> compact_bins(std::vector<int>& hits) {
    std::sort(hits.begin(), hits.end());
    std::vector<BinCount> out;
    for (std::size_t i = 0; i < hits.size();) {
        std::size_t k = i;
        while (k < hits.size() && hits[k] == hits[i]) ++k;
        out.push_back({hits[i], static_cast<double>(k - i)});
        i = k;
    }
    return out;
}

}  // namespace detail

// Run one trajectory from x0 inside stratum j until the exit check fires.
// The relabeling threshold kappa is drawn once per trajectory, up front.
template <class Kernel>
ExitRecord run_to_exit(Kernel& kernel, const StrataDef& strata, int j, const Point& x0,
                       const KappaDistribution& eta, long long max_steps, RngStream& rng,
                       OccupationMode mode = OccupationMode::points,
                       const GridSpec* grid = nullptr) {
    if (mode == OccupationMode::binned && grid == nullptr)
        throw Error("run_to_exit: binned occupation needs a grid");
    ExitRecord rec;
    rec.start_stratum = j;
    rec.start_point = x0;
    const double kappa = eta.draw(rng);

    std::vector<int> bin_hits;
    auto record = [&](const Point& x) {
        if (mode == OccupationMode::points)
            rec.visited.push_back(x);
        else
            bin_hits.push_back(grid->bin_of(x));
    };

    record(x0);
    Point x = x0;
    for (long long n = 1; n <= max_steps; ++n) {
        x = kernel.step(x, rng);
        const int dest = exit_check(strata, j, x, kappa, rng);
        if (dest >= 0) {
            rec.exit_stratum = dest;
            rec.exit_point = x;
            rec.tau = n;
            if (mode == OccupationMode::binned) rec.visited_bins = detail::compact_bins(bin_hits);
            return rec;
        }
        record(x);
    }
    rec.tau = max_steps;
    if (mode == OccupationMode::binned) rec.visited_bins = detail::compact_bins(bin_hits);
    throw TrajectoryCapError("trajectory exceeded " + std::to_string(max_steps) +
                                 " steps without exiting stratum " + std::to_string(j),
                             std::move(rec));
}

// M trajectories started from independent draws of nu_j.  Replica i always
// uses the stream keyed by (seed, iteration, j, i) and writes into slot i, so
// results are bitwise independent of the thread count.  KernelFactory is
// called once per worker thread to give each one its own kernel instance.
template <class KernelFactory>
std::vector<ExitRecord> sample_exit_batch(KernelFactory&& make_kernel, const StrataDef& strata,
                                          const EmpiricalMeasure& nu_j, int j, std::size_t M,
                                          const KappaDistribution& eta, long long max_steps,
                                          std::uint64_t seed, std::uint64_t iteration,
                                          int n_threads, OccupationMode mode = OccupationMode::points,
                                          const GridSpec* grid = nullptr) {
    if (M == 0) throw Error("sample_exit_batch: replica count must be positive");
    RngStream resample_rng(seed, StreamPurpose::resample, iteration, static_cast<std::uint64_t>(j), 0);
    const std::vector<Point> starts = resample(nu_j, M, resample_rng);

    std::vector<ExitRecord> records(M);
    std::vector<std::exception_ptr> failures(M);

    auto worker = [&](std::size_t lo, std::size_t hi) {
        auto kernel = make_kernel();
        for (std::size_t i = lo; i < hi; ++i) {
            RngStream rng(seed, StreamPurpose::trajectory, iteration, static_cast<std::uint64_t>(j),
                          static_cast<std::uint64_t>(i));
            try {
                records[i] = run_to_exit(kernel, strata, j, starts[i], eta, max_steps, rng, mode, grid);
            } catch (const TrajectoryCapError& e) {
                failures[i] = std::make_exception_ptr(TrajectoryCapError(
                    std::string(e.what()) + " [replica " + std::to_string(i) + "]", e.partial));
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };

    const int T = std::max(1, std::min<int>(n_threads, static_cast<int>(M)));
    if (T == 1) {
        worker(0, M);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(T);
        for (int t = 0; t < T; ++t) {
            const std::size_t lo = M * t / T;
            const std::size_t hi = M * (t + 1) / T;
            pool.emplace_back(worker, lo, hi);
        }
        for (auto& th : pool) th.join();
    }

    // Deterministic error reporting: the lowest-index failure wins no matter
    // how replicas were split across threads.
    for (std::size_t i = 0; i < M; ++i)
        if (failures[i]) std::rethrow_exception(failures[i]);
    return records;
}

}  // namespace strmc
