#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "strmc/config.hpp"
#include "strmc/errors.hpp"
#include "strmc/estimator.hpp"
#include "strmc/histogram.hpp"
#include "strmc/injection.hpp"
#include "strmc/io.hpp"
#include "strmc/kernels.hpp"
#include "strmc/measure.hpp"
#include "strmc/presets.hpp"
#include "strmc/strata.hpp"
#include "strmc/trajectory.hpp"

namespace strmc {

// Everything derived from a config that the iteration loop needs.
struct RunSetup {
    SystemKind kind;
    StrataDef strata;
    GridSpec grid;
    // discrete systems
    DiscreteChain chain;
    std::vector<std::vector<int>> sets;
    // sde systems
    MaierSteinParams ms;
    double h = 1e-3;
};

inline RunSetup make_setup(const RunConfig& c) {
    RunSetup s;
    s.kind = c.kind;
    if (c.kind == SystemKind::discrete) {
        if (!c.discrete_preset.empty()) {
            DiscretePreset p = c.discrete_preset == "random"
                                   ? make_random_instance(c.random_states, c.random_strata, c.seed)
                                   : make_discrete_preset(c.discrete_preset);
            s.chain = std::move(p.chain);
            s.sets = c.strata_sets.empty() ? std::move(p.sets) : c.strata_sets;
        } else {
            const int n = static_cast<int>(c.transition.size());
            std::vector<double> rows;
            rows.reserve(static_cast<std::size_t>(n) * n);
            for (const auto& r : c.transition) rows.insert(rows.end(), r.begin(), r.end());
            s.chain = DiscreteChain(n, std::move(rows));
            s.sets = c.strata_sets;
        }
        for (const auto& set : s.sets)
            for (int st : set)
                if (st < 0 || st >= s.chain.size())
                    throw ConfigError("strata.sets: state index out of range");
        s.strata = make_index_strata(s.sets);
        s.grid = c.grid_given ? c.grid : GridSpec::states(s.chain.size());
    } else {
        s.ms = c.ms;
        s.h = c.h;
        s.strata = c.strata_preset.empty()
                       ? StrataDef{c.regions, c.psi_mode}
                       : make_strata_preset(c.strata_preset, c.psi_mode);
        s.strata.validate();
        s.grid = c.grid_given ? c.grid : GridSpec::rect(-1.5, 1.5, 100, -1.0, 1.0, 100);
    }
    return s;
}

namespace run_detail {

// Working window for the continuous systems.  Geometry presets are built to
// cover this rectangle; the initial spray stays inside it so trajectories
// start where the drift is tame (the far ellipse tips reach well outside it,
// and launching from there can overshoot the overlap seams in one step).
constexpr double kDomainU = 1.5;
constexpr double kDomainV = 1.0;

// Uniform rejection sample inside a geometric region, clipped to the working
// window whenever the region meets it.
inline Point sample_in_region(const Region& r, RngStream& rng) {
    double cx, cy, hw, hh;
    if (const auto* e = std::get_if<EllipseRegion>(&r)) {
        cx = e->cx;
        cy = e->cy;
        const double c = std::cos(e->angle), s = std::sin(e->angle);
        hw = std::sqrt(e->a * e->a * c * c + e->b * e->b * s * s);
        hh = std::sqrt(e->a * e->a * s * s + e->b * e->b * c * c);
    } else if (const auto* ci = std::get_if<CircleRegion>(&r)) {
        cx = ci->cx;
        cy = ci->cy;
        hw = hh = ci->r;
    } else {
        throw ConfigError("sample_in_region: index-set region has no geometry");
    }
    double lo0 = cx - hw, hi0 = cx + hw, lo1 = cy - hh, hi1 = cy + hh;
    if (lo0 < kDomainU && hi0 > -kDomainU && lo1 < kDomainV && hi1 > -kDomainV) {
        lo0 = std::max(lo0, -kDomainU);
        hi0 = std::min(hi0, kDomainU);
        lo1 = std::max(lo1, -kDomainV);
        hi1 = std::min(hi1, kDomainV);
    }
    for (int tries = 0; tries < 10000; ++tries) {
        Point x{rng.uniform(lo0, hi0), rng.uniform(lo1, hi1)};
        if (region_quad(r, x) < 1.0) return x;
    }
    throw GeometryError("sample_in_region: rejection sampling failed (degenerate region?)");
}

}  // namespace run_detail

// Starting configuration: uniform weights; per stratum, a uniform spray of
// points inside the region (or all states of the index set).  Deterministic
// given the seed.
inline InjectionState initial_injection(const RunConfig& c, const RunSetup& s) {
    const int J = s.strata.size();
    InjectionState state;
    state.weights.assign(J, 1.0 / J);
    state.nu.resize(J);
    for (int j = 0; j < J; ++j) {
        if (s.kind == SystemKind::discrete) {
            for (int st : s.sets[j]) state.nu[j].add(Point::of_state(st), 1.0);
        } else {
            RngStream rng(c.seed, StreamPurpose::init, 0, static_cast<std::uint64_t>(j), 0);
            for (int i = 0; i < 64; ++i)
                state.nu[j].add(run_detail::sample_in_region(s.strata.regions[j], rng), 1.0);
        }
        state.nu[j] = state.nu[j].normalized();
    }
    return state;
}

// One completed sweep, as handed to the per-iteration observer.
struct IterationOutput {
    int iteration = 0;  // 1-based
    Matrix G;
    std::vector<double> weights;          // post-update
    std::vector<std::size_t> batch_sizes;
    long long sweep_steps = 0;
    long long cumulative_steps = 0;
    double weight_step = 0.0;   // half-L1 move of the weight vector
    double fluctuation = 0.0;   // TV between consecutive pooled injection histograms
    WeightedHistogram occupation;  // this sweep's normalized occupation estimate
};

using IterationObserver = std::function<void(const IterationOutput&)>;

namespace run_detail {

template <class E>
[[noreturn]] void rethrow_tagged(const E& e, int iteration) {
    throw E("iteration " + std::to_string(iteration) + ": " + e.what());
}

template <class KernelFactory>
void iterate(const RunConfig& c, const RunSetup& s, KernelFactory&& make_kernel,
             InjectionState& state, const IterationObserver& observe) {
    const int J = s.strata.size();
    WeightedHistogram prev_inj = injection_histogram(state, s.grid);
    long long cumulative = 0;
    for (int n = 1; n <= c.iterations; ++n) {
        try {
            SweepBatches sweep;
            sweep.per_stratum.resize(J);
            for (int j = 0; j < J; ++j)
                sweep.per_stratum[j] = sample_exit_batch(
                    make_kernel, s.strata, state.nu[j], j, c.exits_per_stratum, c.eta,
                    c.effective_max_steps(), c.seed, static_cast<std::uint64_t>(n), c.threads,
                    c.occupation, &s.grid);

            IterationOutput out;
            out.iteration = n;
            out.sweep_steps = sweep.total_steps();
            cumulative += out.sweep_steps;
            out.cumulative_steps = cumulative;
            for (int j = 0; j < J; ++j) out.batch_sizes.push_back(sweep.per_stratum[j].size());

            const std::vector<double> old_w = state.weights;
            out.G = apply_update(state, sweep, c.version);
            out.weights = state.weights;
            out.weight_step = weight_error(old_w, state.weights);
            out.occupation = occupation_histogram(sweep, state.weights, s.grid, true);

            WeightedHistogram inj = injection_histogram(state, s.grid);
            out.fluctuation = injection_fluctuation(prev_inj, inj);
            prev_inj = std::move(inj);

            observe(out);
        } catch (const TrajectoryCapError& e) {
            throw TrajectoryCapError("iteration " + std::to_string(n) + ": " + e.what(), e.partial);
        } catch (const StarvedStratumError& e) {
            rethrow_tagged(e, n);
        } catch (const VanishingWeightError& e) {
            rethrow_tagged(e, n);
        } catch (const SolverError& e) {
            rethrow_tagged(e, n);
        } catch (const UncoveredPointError& e) {
            rethrow_tagged(e, n);
        } catch (const GeometryError& e) {
            rethrow_tagged(e, n);
        }
    }
}

}  // namespace run_detail

// Run the full iteration with the configured system, invoking the observer
// after every sweep.  Returns the final state.
inline InjectionState run_method(const RunConfig& c, const RunSetup& s,
                                 const IterationObserver& observe) {
    InjectionState state = initial_injection(c, s);
    if (s.kind == SystemKind::discrete) {
        auto factory = [&s]() { return s.chain; };
        run_detail::iterate(c, s, factory, state, observe);
    } else {
        auto factory = [&s]() { return make_maier_stein_kernel(s.ms, s.h); };
        run_detail::iterate(c, s, factory, state, observe);
    }
    return state;
}

// ---------------------------------------------------------------------------
// Command cores (shared by the CLI and the end-to-end tests)
// ---------------------------------------------------------------------------

namespace run_detail {

inline std::string iter_file(const std::string& dir, int n) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "occupation_iter_%03d.txt", n);
    return dir + "/" + buf;
}

inline std::vector<std::string> diag_columns(int J) {
    std::vector<std::string> cols{"iteration", "cumulative_steps", "weight_step", "fluctuation"};
    for (int j = 0; j < J; ++j) cols.push_back("w" + std::to_string(j));
    for (int i = 0; i < J; ++i)
        for (int j = 0; j < J; ++j) cols.push_back("G" + std::to_string(i) + std::to_string(j));
    for (int j = 0; j < J; ++j) cols.push_back("M" + std::to_string(j));
    return cols;
}

}  // namespace run_detail

// Execute one configured run into out_dir: config snapshot, initial-state
// files, per-iteration diagnostics and occupation histograms, and the final
// occupation/injection/weight artifacts.
inline void run_single(const RunConfig& c, const std::string& out_dir) {
    namespace fs = std::filesystem;
    const RunSetup s = make_setup(c);
    fs::create_directories(out_dir);

    {
        std::ofstream cfg(out_dir + "/config.json");
        if (!cfg) throw Error("cannot write " + out_dir + "/config.json");
        cfg << serialize_config(c);
    }

    InjectionState initial = initial_injection(c, s);
    write_histogram(out_dir + "/injection_initial.txt", injection_histogram(initial, s.grid));

    const int J = s.strata.size();
    std::vector<std::string> wcols{"iteration"};
    for (int j = 0; j < J; ++j) wcols.push_back("w" + std::to_string(j));
    TableWriter weights(out_dir + "/weights.txt", wcols);
    std::vector<double> wrow{0.0};
    for (double w : initial.weights) wrow.push_back(w);
    weights.row(wrow);

    if (c.iterations == 0) return;  // initial-state files only

    TableWriter diag(out_dir + "/diagnostics.txt", run_detail::diag_columns(J),
                     grid_stamp(s.grid));
    WeightedHistogram final_occ;
    bool have_occ = false;

    auto observer = [&](const IterationOutput& out) {
        std::vector<double> row{static_cast<double>(out.iteration),
                                static_cast<double>(out.cumulative_steps), out.weight_step,
                                out.fluctuation};
        for (double w : out.weights) row.push_back(w);
        for (const auto& grow : out.G) row.insert(row.end(), grow.begin(), grow.end());
        for (std::size_t m : out.batch_sizes) row.push_back(static_cast<double>(m));
        diag.row(row);

        std::vector<double> wr{static_cast<double>(out.iteration)};
        for (double w : out.weights) wr.push_back(w);
        weights.row(wr);

        write_histogram(run_detail::iter_file(out_dir, out.iteration), out.occupation);
        final_occ = out.occupation;
        have_occ = true;
    };

    InjectionState final_state = run_method(c, s, observer);
    if (have_occ) write_histogram(out_dir + "/occupation_final.txt", final_occ);
    write_histogram(out_dir + "/injection_final.txt", injection_histogram(final_state, s.grid));
}

// Run the config once, or several times with bumped seeds when
// runs_to_average > 1 (sub-runs land in run_000, run_001, ... under out_dir).
// Returns the list of produced run directories.
inline std::vector<std::string> cmd_run(const RunConfig& c) {
    std::vector<std::string> dirs;
    if (c.runs_to_average <= 1) {
        run_single(c, c.out_dir);
        dirs.push_back(c.out_dir);
        return dirs;
    }
    for (int r = 0; r < c.runs_to_average; ++r) {
        RunConfig cr = c;
        cr.seed = c.seed + static_cast<std::uint64_t>(r);
        char buf[24];
        std::snprintf(buf, sizeof buf, "run_%03d", r);
        cr.out_dir = c.out_dir + "/" + buf;
        run_single(cr, cr.out_dir);
        dirs.push_back(cr.out_dir);
    }
    return dirs;
}

// Long un-stratified reference trajectory, started from both wells and
// averaged.  Writes a single grid-stamped histogram.
inline void cmd_benchmark(const RunConfig& c, const std::string& out_path) {
    if (c.kind != SystemKind::maier_stein)
        throw ConfigError("benchmark requires a maier_stein system");
    if (c.benchmark_steps <= 0)
        throw ConfigError("benchmark_steps must be positive (empty histogram otherwise)");
    const RunSetup s = make_setup(c);
    WeightedHistogram h(s.grid);
    const Point ics[2] = {Point{1.0, 0.0}, Point{-1.0, 0.0}};
    for (int run = 0; run < 2; ++run) {
        auto kernel = make_maier_stein_kernel(s.ms, s.h);
        RngStream rng(c.seed, StreamPurpose::benchmark, static_cast<std::uint64_t>(run), 0, 0);
        Point x = ics[run];
        for (long long n = 0; n < c.benchmark_steps; ++n) {
            h.add(x);
            x = kernel.step(x, rng);
        }
    }
    namespace fs = std::filesystem;
    const fs::path parent = fs::path(out_path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    write_histogram(out_path, h.normalized());
}

// Error-vs-cost table: per iteration, the cumulative step count and the
// total-variation distance (first-axis marginal) between the running average
// of the per-iteration occupation estimates and the reference histogram.
// Curves from several run directories are averaged pointwise.
struct ErrorCurve {
    std::vector<double> iteration;
    std::vector<double> cumulative_steps;  // averaged over runs
    std::vector<double> tv_error;          // averaged over runs
};

inline ErrorCurve cmd_error(const std::vector<std::string>& run_dirs,
                            const std::string& benchmark_path) {
    if (run_dirs.empty()) throw Error("cmd_error: no run directories given");
    const WeightedHistogram reference = read_histogram(benchmark_path);
    const WeightedHistogram ref_marginal =
        reference.grid().dims == 2 ? marginal(reference, 0) : reference;

    ErrorCurve curve;
    bool first_run = true;
    for (const std::string& dir : run_dirs) {
        const Table diag = read_table(dir + "/diagnostics.txt");
        const GridSpec run_grid = grid_from_header(diag.header);
        if (!(run_grid == reference.grid()))
            throw GridMismatchError("cmd_error: run grid " + run_grid.describe() +
                                    " does not match reference grid " +
                                    reference.grid().describe());
        const int steps_col = diag.column("cumulative_steps");
        const int iters = static_cast<int>(diag.rows.size());
        if (!first_run && iters != static_cast<int>(curve.iteration.size()))
            throw Error("cmd_error: runs have different iteration counts");

        RunningAverageHistogram avg;
        for (int n = 1; n <= iters; ++n) {
            const WeightedHistogram h = read_histogram(run_detail::iter_file(dir, n));
            if (!(h.grid() == reference.grid()))
                throw GridMismatchError("cmd_error: iteration histogram grid mismatch in " + dir);
            avg.add(h);
            const WeightedHistogram est = avg.average();
            const double tv =
                tv_distance(est.grid().dims == 2 ? marginal(est, 0) : est, ref_marginal);
            if (first_run) {
                curve.iteration.push_back(n);
                curve.cumulative_steps.push_back(diag.rows[n - 1][steps_col]);
                curve.tv_error.push_back(tv);
            } else {
                curve.cumulative_steps[n - 1] += diag.rows[n - 1][steps_col];
                curve.tv_error[n - 1] += tv;
            }
        }
        first_run = false;
    }
    const double R = static_cast<double>(run_dirs.size());
    for (double& v : curve.cumulative_steps) v /= R;
    for (double& v : curve.tv_error) v /= R;
    return curve;
}

inline void write_error_curve(const ErrorCurve& curve, const GridSpec& grid,
                              const std::string& out_path) {
    TableWriter w(out_path, {"iteration", "cumulative_steps", "tv_error"}, grid_stamp(grid));
    for (std::size_t i = 0; i < curve.iteration.size(); ++i)
        w.row({curve.iteration[i], curve.cumulative_steps[i], curve.tv_error[i]});
}

}  // namespace strmc
