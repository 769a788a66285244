// Acceptance harness: runs the eight release criteria end to end and prints
// one [PASS]/[FAIL] line per criterion.  Exit code is the number of failed
// criteria.  All tolerances are pinned here, next to the check they govern.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <strmc/config.hpp>
#include <strmc/estimator.hpp>
#include <strmc/injection.hpp>
#include <strmc/io.hpp>
#include <strmc/kernels.hpp>
#include <strmc/measure.hpp>
#include <strmc/oracle.hpp>
#include <strmc/presets.hpp>
#include <strmc/runner.hpp>
#include <strmc/strata.hpp>
#include <strmc/trajectory.hpp>

using namespace strmc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

FiniteStratifiedChain random_fsc(int n, int J, unsigned long long seed) {
    DiscretePreset p = make_random_instance(n, J, seed);
    return FiniteStratifiedChain(p.chain, p.sets);
}

double l1(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s;
}

// ---------------------------------------------------------------------------
// 1. Fixed-point identities on 100 random chains.
// ---------------------------------------------------------------------------
Outcome criterion1() {
    constexpr double kNuTol = 1e-12;
    constexpr double kMuTol = 1e-10;
    double worst_nu = 0.0, worst_mu = 0.0;
    for (int i = 0; i < 100; ++i) {
        const int n = 2 + (i % 11);               // 2 .. 12 states
        const int J = std::min(n, 2 + (i % 3));   // 2 .. 4 strata
        const FiniteStratifiedChain f = random_fsc(n, J, 9000ull + i);
        const ExactFixedPoint fp = exact_fixed_point(f);

        const Eigen::MatrixXd Q = exact_exit_law(f);
        const std::vector<double> stacked = fp.stacked_nu();
        Eigen::RowVectorXd v(n);
        for (int s = 0; s < n; ++s) v(s) = stacked[s];
        const Eigen::RowVectorXd w = v * Q;
        double dnu = 0.0;
        for (int s = 0; s < n; ++s) dnu += std::abs(w(s) - v(s));
        worst_nu = std::max(worst_nu, dnu);

        double total = 0.0;
        for (double m : fp.mu_star) total += m;
        std::vector<double> mu = fp.mu_star;
        for (double& m : mu) m /= total;
        worst_mu = std::max(worst_mu, l1(mu, fp.pi));
    }
    Outcome o;
    o.pass = worst_nu < kNuTol && worst_mu < kMuTol;
    o.detail = fmt("100 chains: max|nu*Q - nu*|_1 = %.2e (tol %.0e), "
                   "max|mu* - pi|_1 = %.2e (tol %.0e)",
                   worst_nu, kNuTol, worst_mu, kMuTol);
    return o;
}

// ---------------------------------------------------------------------------
// 2. Sampler agrees with the exact exit law and exit times.
// ---------------------------------------------------------------------------
Outcome criterion2() {
    constexpr std::size_t kReplicas = 100000;
    constexpr double kTvTol = 0.02;
    constexpr double kSigmas = 3.0;
    double worst_tv = 0.0, worst_pull = 0.0;
    int rows_checked = 0;
    for (int i = 0; i < 10; ++i) {
        const int n = 6 + (2 * i) % 7;
        const int J = 2 + (i % 3);
        const FiniteStratifiedChain f = random_fsc(n, J, 300ull + i);
        const Eigen::MatrixXd Q = exact_exit_law(f);
        const StrataDef strata = make_index_strata(f.strata);
        const GridSpec grid = GridSpec::states(n);

        for (int x = 0; x < n; ++x) {
            const int j = f.stratum_of[x];
            EmpiricalMeasure start;
            start.add(Point::of_state(x), 1.0);
            auto factory = [&f]() { return f.chain; };
            const std::vector<ExitRecord> batch = sample_exit_batch(
                factory, strata, start, j, kReplicas, KappaDistribution::point(1.0), 100000,
                778ull + i, static_cast<std::uint64_t>(x), 1, OccupationMode::binned, &grid);

            std::vector<double> freq(n, 0.0);
            double tau_sum = 0.0, tau_sq = 0.0;
            for (const ExitRecord& r : batch) {
                freq[r.exit_point.state()] += 1.0;
                const double t = static_cast<double>(r.tau);
                tau_sum += t;
                tau_sq += t * t;
            }
            double tv = 0.0;
            for (int y = 0; y < n; ++y)
                tv += std::abs(freq[y] / kReplicas - Q(x, y));
            tv *= 0.5;
            worst_tv = std::max(worst_tv, tv);

            std::vector<double> delta(n, 0.0);
            delta[x] = 1.0;
            const std::vector<double> occ = exact_occupation(f, j, delta);
            double exact_tau = 0.0;
            for (double m : occ) exact_tau += m;
            const double mean = tau_sum / kReplicas;
            const double var = std::max(0.0, tau_sq / kReplicas - mean * mean);
            const double se = std::sqrt(var / kReplicas);
            const double pull = se > 0.0 ? std::abs(mean - exact_tau) / se : 0.0;
            worst_pull = std::max(worst_pull, pull);
            ++rows_checked;
        }
    }
    Outcome o;
    o.pass = worst_tv < kTvTol && worst_pull <= kSigmas;
    o.detail = fmt("%d exit rows at M=%zu: max TV = %.4f (tol %.2f), "
                   "max E[tau] pull = %.2f sigma (tol %.0f)",
                   rows_checked, kReplicas, worst_tv, kTvTol, worst_pull, kSigmas);
    return o;
}

// ---------------------------------------------------------------------------
// 3. Contraction bound on lazified instances with positive constants.
// ---------------------------------------------------------------------------
Outcome criterion3() {
    constexpr double kLaziness = 0.5;
    int instances = 0, violations = 0;
    double worst_margin = 0.0, min_cu = 1.0;

    auto check = [&](const FiniteStratifiedChain& f) {
        const ContractionCheck r = tv_contraction_check(f, kLaziness, 50);
        const double cu = r.c * r.minorization.u;
        min_cu = std::min(min_cu, cu);
        violations += r.violations;
        worst_margin = std::max(worst_margin, r.worst_margin);
        ++instances;
    };

    const DiscretePreset two = make_discrete_preset("two_state");
    check(FiniteStratifiedChain(two.chain, two.sets));
    for (unsigned long long seed = 1; seed <= 10; ++seed) {
        const DiscretePreset p = make_random_instance(9, 3, seed);
        check(FiniteStratifiedChain(p.chain, p.sets));
    }

    Outcome o;
    o.pass = min_cu > 0.0 && violations == 0;
    o.detail = fmt("%d lazy instances (p=%.1f), k<=50: min c*u = %.4f, "
                   "violations = %d, worst margin = %.2e",
                   instances, kLaziness, min_cu, violations, worst_margin);
    return o;
}

// ---------------------------------------------------------------------------
// 4. Limiting-rate formula: exact at full coupling; asymptotic order in 1-c.
// ---------------------------------------------------------------------------
Outcome criterion4() {
    constexpr double kRateTol = 1e-3;
    constexpr double kExponent = 0.5;
    constexpr double kExpTol = 0.1;

    double worst_rate_err = 0.0;
    for (double lambda : {0.2, 0.5, 0.8}) {
        const LimitingRate r = limiting_rate(1.0, lambda);
        worst_rate_err = std::max(worst_rate_err, std::abs(r.q - lambda));
    }

    const double cs[3] = {0.99, 0.999, 0.9999};
    double q[3];
    for (int i = 0; i < 3; ++i) q[i] = limiting_rate(cs[i], 0.0).q;
    // Least-squares slope of log q against log(1 - c).
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double x = std::log(1.0 - cs[i]), y = std::log(q[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double slope = (3.0 * sxy - sx * sy) / (3.0 * sxx - sx * sx);

    Outcome o;
    const bool rates_ok = worst_rate_err <= kRateTol;
    const bool exponent_ok = std::abs(slope - kExponent) <= kExpTol;
    o.pass = rates_ok && exponent_ok;
    o.detail = fmt("full-coupling rate err = %.1e (tol %.0e); lambda=0 scaling: "
                   "q = %.4f/%.4f/%.4f at 1-c = 1e-2/1e-3/1e-4, measured exponent %.3f "
                   "(required %.1f +- %.1f)",
                   worst_rate_err, kRateTol, q[0], q[1], q[2], slope, kExponent, kExpTol);
    return o;
}

// ---------------------------------------------------------------------------
// 5 & 6. Nine-state end-to-end convergence, and eigenvector vs basic speed.
// Shared runs: both update rules, five seeds each.
// ---------------------------------------------------------------------------
struct NineStateRun {
    double weight_tv = 0.0;      // final weights vs a*
    double occupation_tv = 0.0;  // final occupation vs pi
    int iters_to_005 = 0;        // first sweep with weight error <= 0.05
};

NineStateRun run_nine_state(UpdateRule rule, std::uint64_t seed, const ExactFixedPoint& fp) {
    RunConfig c;
    c.kind = SystemKind::discrete;
    c.discrete_preset = "nine_state";
    c.version = rule;
    c.iterations = 30;
    c.exits_per_stratum = 10000;
    c.seed = seed;
    const RunSetup s = make_setup(c);

    NineStateRun out;
    out.iters_to_005 = c.iterations + 1;  // "never reached" sentinel
    WeightedHistogram final_occ;
    std::vector<double> final_w;
    run_method(c, s, [&](const IterationOutput& it) {
        if (out.iters_to_005 > c.iterations && weight_error(it.weights, fp.a_star) <= 0.05)
            out.iters_to_005 = it.iteration;
        final_occ = it.occupation;
        final_w = it.weights;
    });
    out.weight_tv = weight_error(final_w, fp.a_star);
    WeightedHistogram pi_hist(final_occ.grid());
    for (int st = 0; st < static_cast<int>(fp.pi.size()); ++st) pi_hist.add_bin(st, fp.pi[st]);
    out.occupation_tv = tv_distance(final_occ, pi_hist);
    return out;
}

Outcome criterion5_and_6(Outcome& six) {
    constexpr double kWeightTol = 0.02;
    constexpr double kOccTol = 0.03;
    constexpr int kSeeds = 5;
    constexpr int kNeededWins = 4;

    const DiscretePreset p = make_discrete_preset("nine_state");
    const FiniteStratifiedChain f(p.chain, p.sets);
    const ExactFixedPoint fp = exact_fixed_point(f);

    double wtv[2] = {0.0, 0.0}, otv[2] = {0.0, 0.0};
    int wins = 0;
    for (int s = 0; s < kSeeds; ++s) {
        const NineStateRun basic = run_nine_state(UpdateRule::basic, 100 + s, fp);
        const NineStateRun eigen = run_nine_state(UpdateRule::eigen, 100 + s, fp);
        wtv[0] += basic.weight_tv;
        wtv[1] += eigen.weight_tv;
        otv[0] += basic.occupation_tv;
        otv[1] += eigen.occupation_tv;
        if (eigen.iters_to_005 <= basic.iters_to_005) ++wins;
    }
    for (double* v : {wtv, otv})
        for (int i = 0; i < 2; ++i) v[i] /= kSeeds;

    Outcome five;
    five.pass = wtv[0] < kWeightTol && wtv[1] < kWeightTol && otv[0] < kOccTol && otv[1] < kOccTol;
    five.detail = fmt("nine-state, N=30, M=1e4, %d seeds: weight TV basic %.4f / eigen %.4f "
                      "(tol %.2f), occupation TV basic %.4f / eigen %.4f (tol %.2f)",
                      kSeeds, wtv[0], wtv[1], kWeightTol, otv[0], otv[1], kOccTol);

    six.pass = wins >= kNeededWins;
    six.detail = fmt("sweeps to weight error 0.05: eigenvector <= basic in %d/%d seeds "
                     "(need >= %d)",
                     wins, kSeeds, kNeededWins);
    return five;
}

// ---------------------------------------------------------------------------
// 7. Desk-scale double-well reproduction.
// ---------------------------------------------------------------------------
struct MsOutputs {
    std::vector<WeightedHistogram> occupations;  // one per iteration
    InjectionState final_state;
};

// Overlapping ellipses need softened exits: with hard psi a threshold above
// 1/2 exits the moment a second ellipse covers the point (entry atoms then
// ping-pong across the seam forever and the wells are never visited), while
// a threshold at or below 1/2 only exits at the far ellipse boundary, which
// costs a full barrier climb per replica (~1.3e5 steps for the wide middle
// ellipse) and starves the middle of the five-ellipse preset outright (its
// far boundaries sit ~17 noise-units of potential above the wells).  Smooth
// psi with a uniform threshold spreads exits across the overlap bands.
//
// The threshold's lower bound trades fidelity against survival of the narrow
// middle strata in the five-ellipse preset.  Below ~0.4, seam-born replicas
// dive toward a well often enough that the cross-seam exit pools thin out
// geometrically and within 30 sweeps some stratum receives no exits at all --
// a hard error by contract.  At 0.5 and above the opposite failure appears:
// exits happen on the contour where the replica's own membership falls to
// the threshold, so the receiving stratum's membership there is below the
// lower bound and re-entrant replicas can never run again; after the initial
// spray the wells are never revisited.  Uniform(0.4, 1) is the smallest
// lower bound that reliably completes 30 sweeps at both exit counts (checked
// across seeds 1-6); the occupation bias it leaves on the five-ellipse
// preset is reported, not hidden, by the checks below.
RunConfig ms_config(const std::string& preset, std::uint64_t exits, std::uint64_t seed) {
    RunConfig c;
    c.kind = SystemKind::maier_stein;
    c.strata_preset = preset;
    c.psi_mode = PsiMode::smooth;
    c.eta = KappaDistribution::uniform_range(0.4, 1.0);
    c.version = UpdateRule::eigen;
    c.iterations = 30;
    c.exits_per_stratum = exits;
    c.seed = seed;
    return c;
}

MsOutputs run_ms(const std::string& preset, std::uint64_t exits, std::uint64_t seed) {
    const RunConfig c = ms_config(preset, exits, seed);
    const RunSetup s = make_setup(c);
    MsOutputs out;
    out.final_state = run_method(c, s, [&](const IterationOutput& it) {
        out.occupations.push_back(it.occupation);
    });
    return out;
}

// Final value of the Fig.5-style error curve: TV of the u-marginal between
// the running average of per-iteration occupation estimates and a reference.
double final_running_error(const std::vector<WeightedHistogram>& occs,
                           const WeightedHistogram& ref_marginal) {
    RunningAverageHistogram avg;
    for (const WeightedHistogram& h : occs) avg.add(h);
    return tv_distance(marginal(avg.average(), 0), ref_marginal);
}

// Share of a stratum's injection mass in the outermost radial band of its
// ellipse: normalized radius sqrt(quad) in [1 - width, 1].
double boundary_band_share(const EmpiricalMeasure& nu, const StrataDef& strata, int j,
                           double width) {
    double inside = 0.0, total = 0.0;
    for (std::size_t i = 0; i < nu.size(); ++i) {
        const double q = strata.quad(j, nu.point(i));
        total += nu.weight(i);
        if (std::sqrt(q) >= 1.0 - width) inside += nu.weight(i);
    }
    return total > 0.0 ? inside / total : 0.0;
}

Outcome criterion7() {
    constexpr double kErrTol = 0.15;
    constexpr double kBandWidth = 0.20;
    constexpr double kBandShare = 0.80;

    // Benchmark: one long unstratified trajectory per well, 5e5 steps each
    // (1e6 total), averaged -- the two wells get independent seed streams.
    RunConfig bc;
    bc.kind = SystemKind::maier_stein;
    bc.strata_preset = "vertical3";
    bc.benchmark_steps = 500000;
    bc.seed = 1;
    const std::string bench_path = (fs::temp_directory_path() / "strmc_acc_bench.txt").string();
    cmd_benchmark(bc, bench_path);
    const WeightedHistogram benchmark = read_histogram(bench_path);
    const WeightedHistogram bench_u = marginal(benchmark, 0);
    fs::remove(bench_path);

    const MsOutputs v3_1000 = run_ms("vertical3", 1000, 1);
    const MsOutputs v5_300 = run_ms("vertical5", 300, 1);
    const MsOutputs v5_1000 = run_ms("vertical5", 1000, 1);

    const double err_v3_1000 = final_running_error(v3_1000.occupations, bench_u);
    const double err_v5_300 = final_running_error(v5_300.occupations, bench_u);
    const double err_v5_1000 = final_running_error(v5_1000.occupations, bench_u);

    double min_share = 1.0;
    const StrataDef v3 = make_strata_preset("vertical3");
    for (int j = 0; j < v3.size(); ++j)
        min_share = std::min(min_share,
                             boundary_band_share(v3_1000.final_state.nu[j], v3, j, kBandWidth));
    const StrataDef v5 = make_strata_preset("vertical5");
    for (int j = 0; j < v5.size(); ++j)
        min_share = std::min(min_share,
                             boundary_band_share(v5_1000.final_state.nu[j], v5, j, kBandWidth));

    const bool a = err_v3_1000 < kErrTol && err_v5_1000 < kErrTol;
    const bool b = err_v5_1000 <= err_v5_300;
    const bool c = min_share >= kBandShare;
    Outcome o;
    o.pass = a && b && c;
    o.detail = fmt("u-marginal error vs benchmark: vertical3@1000 %.4f, vertical5@1000 %.4f "
                   "(tol %.2f); vertical5@300 %.4f (>= @1000: %s); min boundary-band share "
                   "%.3f (need >= %.2f)",
                   err_v3_1000, err_v5_1000, kErrTol, err_v5_300, b ? "yes" : "NO",
                   min_share, kBandShare);
    return o;
}

// ---------------------------------------------------------------------------
// 8. Diagnostics are bitwise identical across thread counts.
// ---------------------------------------------------------------------------
std::string run_and_hash(RunConfig c, int threads, const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("strmc_acc_t" + tag + std::to_string(threads));
    fs::remove_all(dir);
    c.threads = threads;
    run_single(c, dir.string());
    std::ifstream in(dir / "diagnostics.txt", std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    fs::remove_all(dir);
    return ss.str();
}

Outcome criterion8() {
    RunConfig d;
    d.kind = SystemKind::discrete;
    d.discrete_preset = "nine_state";
    d.iterations = 4;
    d.exits_per_stratum = 2000;
    d.seed = 21;

    RunConfig m = ms_config("vertical3", 100, 5);
    m.iterations = 2;

    bool ok = true;
    for (const auto& [cfg, tag] : {std::pair<RunConfig, std::string>{d, "disc"},
                                   std::pair<RunConfig, std::string>{m, "sde"}}) {
        const std::string one = run_and_hash(cfg, 1, tag);
        const std::string two = run_and_hash(cfg, 2, tag);
        const std::string eight = run_and_hash(cfg, 8, tag);
        ok = ok && !one.empty() && one == two && one == eight;
    }
    Outcome o;
    o.pass = ok;
    o.detail = std::string("discrete and double-well diagnostics at threads {1,2,8}: ") +
               (ok ? "all byte-identical" : "MISMATCH");
    return o;
}

}  // namespace

int main() {
    struct Row {
        const char* name;
        std::function<Outcome()> fn;
    };

    Outcome six;  // filled by the shared nine-state runs
    const std::vector<Row> rows = {
        {"fixed-point identities", criterion1},
        {"sampler vs exact exit law", criterion2},
        {"contraction bound", criterion3},
        {"limiting-rate formula", criterion4},
        {"nine-state convergence", [&six] { return criterion5_and_6(six); }},
        {"eigenvector at least as fast", [&six] { return six; }},
        {"double-well desk-scale reproduction", criterion7},
        {"thread-count determinism", criterion8},
    };

    int failures = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = rows[i].fn();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] %zu. %s - %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", i + 1,
                    rows[i].name, o.detail.c_str(), secs);
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(rows.size()) - failures,
                rows.size());
    return failures;
}
