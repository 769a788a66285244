#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "strmc/histogram.hpp"
#include "strmc/kernels.hpp"
#include "strmc/measure.hpp"
#include "strmc/presets.hpp"
#include "strmc/rng.hpp"
#include "strmc/strata.hpp"
#include "strmc/trajectory.hpp"

using namespace strmc;

namespace {

EmpiricalMeasure point_mass(const Point& x) {
    EmpiricalMeasure m;
    m.add(x, 1.0);
    return m;
}

}  // namespace

TEST(RunToExit, GeometricExitTime) {
    // From state 0 with stay-probability 0.9, tau is geometric with mean 10.
    const DiscretePreset p = make_two_state_preset();
    const StrataDef strata = make_index_strata(p.sets);
    const KappaDistribution eta = KappaDistribution::point();
    RngStream rng(51, StreamPurpose::test, 1, 0, 0);
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        DiscreteChain chain = p.chain;
        const ExitRecord r =
            run_to_exit(chain, strata, 0, Point::of_state(0), eta, 100000, rng);
        sum += static_cast<double>(r.tau);
        ASSERT_EQ(r.exit_stratum, 1);
        ASSERT_EQ(r.exit_point.state(), 1);
    }
    EXPECT_NEAR(sum / n, 10.0, 0.1);
}

TEST(RunToExit, DeterministicSwapExitsInOneStep) {
    DiscreteChain swap(2, {0.0, 1.0, 1.0, 0.0});
    const StrataDef strata = make_index_strata({{0}, {1}});
    RngStream rng(53);
    const ExitRecord r = run_to_exit(swap, strata, 0, Point::of_state(0), KappaDistribution::point(),
                                     100, rng);
    EXPECT_EQ(r.tau, 1);
    EXPECT_EQ(r.exit_stratum, 1);
    ASSERT_EQ(r.visited.size(), 1u);
    EXPECT_EQ(r.visited[0].state(), 0);  // only the start; the exit point is excluded
}

TEST(RunToExit, OccupationLengthEqualsTau) {
    const DiscretePreset p = make_two_state_preset();
    const StrataDef strata = make_index_strata(p.sets);
    RngStream rng(55);
    for (int i = 0; i < 200; ++i) {
        DiscreteChain chain = p.chain;
        const ExitRecord r = run_to_exit(chain, strata, 0, Point::of_state(0),
                                         KappaDistribution::point(), 100000, rng);
        ASSERT_EQ(static_cast<long long>(r.visited.size()), r.tau);
        for (const Point& x : r.visited) ASSERT_EQ(x.state(), 0);  // never left before exit
    }
}

TEST(RunToExit, BinnedModeCountsMatchPointsMode) {
    const DiscretePreset p = make_two_state_preset();
    const StrataDef strata = make_index_strata(p.sets);
    const GridSpec grid = GridSpec::states(2);
    RngStream rng_a(57, StreamPurpose::test, 2, 0, 0);
    RngStream rng_b(57, StreamPurpose::test, 2, 0, 0);  // identical stream
    DiscreteChain chain = p.chain;
    const ExitRecord pts = run_to_exit(chain, strata, 0, Point::of_state(0),
                                       KappaDistribution::point(), 100000, rng_a,
                                       OccupationMode::points);
    const ExitRecord bins = run_to_exit(chain, strata, 0, Point::of_state(0),
                                        KappaDistribution::point(), 100000, rng_b,
                                        OccupationMode::binned, &grid);
    EXPECT_EQ(pts.tau, bins.tau);
    EXPECT_TRUE(bins.visited.empty());
    double binned_total = 0.0;
    for (const BinCount& b : bins.visited_bins) binned_total += b.count;
    EXPECT_EQ(binned_total, static_cast<double>(pts.visited.size()));
}

TEST(RunToExit, CapThrowsWithPartialRecord) {
    // One stratum covering every state: no exit is possible.
    const DiscretePreset p = make_two_state_preset();
    const StrataDef strata = make_index_strata({{0, 1}});
    RngStream rng(59);
    DiscreteChain chain = p.chain;
    try {
        run_to_exit(chain, strata, 0, Point::of_state(0), KappaDistribution::point(), 50, rng);
        FAIL() << "expected TrajectoryCapError";
    } catch (const TrajectoryCapError& e) {
        EXPECT_EQ(e.partial.tau, 50);
        // A capped walker never exits, so its final position still belongs to
        // the stratum and is recorded: X_0..X_50, one more than an exiting
        // record of the same tau would carry.
        EXPECT_EQ(e.partial.visited.size(), 51u);
        EXPECT_EQ(e.partial.exit_stratum, -1);
    }
}

TEST(SampleExitBatch, RejectsEmptyBatch) {
    const DiscretePreset p = make_two_state_preset();
    const StrataDef strata = make_index_strata(p.sets);
    auto factory = [&p]() { return p.chain; };
    EXPECT_THROW(sample_exit_batch(factory, strata, point_mass(Point::of_state(0)), 0, 0,
                                   KappaDistribution::point(), 1000, 1, 1, 1),
                 Error);
}

TEST(SampleExitBatch, DeterministicAcrossThreadCounts) {
    const DiscretePreset p = make_two_state_preset();
    const StrataDef strata = make_index_strata(p.sets);
    auto factory = [&p]() { return p.chain; };
    const EmpiricalMeasure nu = point_mass(Point::of_state(0));

    auto run = [&](int threads) {
        return sample_exit_batch(factory, strata, nu, 0, 500, KappaDistribution::point(), 100000,
                                 909, 4, threads);
    };
    const std::vector<ExitRecord> t1 = run(1);
    const std::vector<ExitRecord> t2 = run(2);
    const std::vector<ExitRecord> t8 = run(8);
    ASSERT_EQ(t1.size(), 500u);
    for (std::size_t i = 0; i < t1.size(); ++i) {
        ASSERT_EQ(t1[i].tau, t2[i].tau);
        ASSERT_EQ(t1[i].tau, t8[i].tau);
        ASSERT_EQ(t1[i].exit_stratum, t2[i].exit_stratum);
        ASSERT_TRUE(t1[i].exit_point == t8[i].exit_point);
        ASSERT_TRUE(t1[i].start_point == t8[i].start_point);
    }
}

TEST(SampleExitBatch, CapErrorNamesTheReplica) {
    const DiscretePreset p = make_two_state_preset();
    const StrataDef strata = make_index_strata({{0, 1}});  // inescapable
    auto factory = [&p]() { return p.chain; };
    try {
        sample_exit_batch(factory, strata, point_mass(Point::of_state(0)), 0, 8,
                          KappaDistribution::point(), 25, 11, 1, 2);
        FAIL() << "expected TrajectoryCapError";
    } catch (const TrajectoryCapError& e) {
        EXPECT_NE(std::string(e.what()).find("replica"), std::string::npos);
        EXPECT_EQ(e.partial.tau, 25);
    }
}

TEST(SampleExitBatch, ResampledStartsComeFromTheMeasure) {
    const DiscretePreset p = make_two_state_preset();
    const StrataDef strata = make_index_strata(p.sets);
    auto factory = [&p]() { return p.chain; };
    EmpiricalMeasure nu;
    nu.add(Point::of_state(0), 3.0);
    const std::vector<ExitRecord> batch = sample_exit_batch(
        factory, strata, nu, 0, 100, KappaDistribution::point(), 100000, 13, 1, 1);
    for (const ExitRecord& r : batch) {
        EXPECT_EQ(r.start_point.state(), 0);
        EXPECT_EQ(r.start_stratum, 0);
    }
}
