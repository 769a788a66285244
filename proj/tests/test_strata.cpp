#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "strmc/strata.hpp"
#include "strmc/rng.hpp"

using namespace strmc;

namespace {
const char* kPresets[] = {"vertical3", "vertical5", "tilted5", "circles6"};
constexpr double kU = 1.5, kV = 1.0;  // working window half-widths
}  // namespace

TEST(Strata, PresetsCoverTheWorkingWindow) {
    for (const char* name : kPresets) {
        const StrataDef def = make_strata_preset(name);
        for (int i = 0; i < 200; ++i) {
            for (int j = 0; j < 200; ++j) {
                const Point x{-kU + 2 * kU * (i + 0.5) / 200, -kV + 2 * kV * (j + 0.5) / 200};
                EXPECT_NO_THROW(def.psi(x)) << name << " leaves (" << x[0] << "," << x[1]
                                            << ") uncovered";
            }
        }
    }
}

TEST(Strata, PresetShapes) {
    EXPECT_EQ(make_strata_preset("vertical3").size(), 3);
    EXPECT_EQ(make_strata_preset("vertical5").size(), 5);
    EXPECT_EQ(make_strata_preset("tilted5").size(), 5);
    EXPECT_EQ(make_strata_preset("circles6").size(), 6);
    EXPECT_THROW(make_strata_preset("nope"), ConfigError);

    // tilted5 really is tilted.
    const StrataDef tilted = make_strata_preset("tilted5");
    int nonzero_angles = 0;
    for (const Region& r : tilted.regions)
        if (std::abs(std::get<EllipseRegion>(r).angle) > 0.0) ++nonzero_angles;
    EXPECT_EQ(nonzero_angles, 5);
}

TEST(Strata, CirclesHaveTripleOverlaps) {
    const StrataDef def = make_strata_preset("circles6");
    int deep_overlap = 0;
    for (int i = 0; i < 200; ++i)
        for (int j = 0; j < 200; ++j) {
            const Point x{-kU + 2 * kU * (i + 0.5) / 200, -kV + 2 * kV * (j + 0.5) / 200};
            int covering = 0;
            for (int k = 0; k < def.size(); ++k)
                if (def.covers(k, x)) ++covering;
            if (covering >= 3) ++deep_overlap;
        }
    EXPECT_GT(deep_overlap, 0);
}

TEST(Strata, PartitionOfUnityBothModes) {
    for (PsiMode mode : {PsiMode::hard, PsiMode::smooth}) {
        for (const char* name : kPresets) {
            const StrataDef def = make_strata_preset(name, mode);
            RngStream rng(17);
            int checked = 0;
            while (checked < 10000) {
                const Point x{rng.uniform(-kU, kU), rng.uniform(-kV, kV)};
                const PsiValues w = def.psi(x);
                double sum = 0.0;
                for (int j = 0; j < def.size(); ++j) {
                    ASSERT_GE(w[j], 0.0);
                    ASSERT_LE(w[j], 1.0);
                    sum += w[j];
                }
                ASSERT_NEAR(sum, 1.0, 1e-12);
                ++checked;
            }
        }
    }
}

TEST(Strata, HardModeSplitsOverlapEvenly) {
    // Two unit circles with centers 1 apart: (0.5, 0) sits in both.
    StrataDef def;
    def.regions = {Region{CircleRegion{0.0, 0.0, 1.0}}, Region{CircleRegion{1.0, 0.0, 1.0}}};
    const PsiValues both = def.psi(Point{0.5, 0.0});
    EXPECT_DOUBLE_EQ(both[0], 0.5);
    EXPECT_DOUBLE_EQ(both[1], 0.5);
    const PsiValues solo = def.psi(Point{-0.5, 0.0});
    EXPECT_DOUBLE_EQ(solo[0], 1.0);
    EXPECT_DOUBLE_EQ(solo[1], 0.0);
}

TEST(Strata, UncoveredPointThrows) {
    const StrataDef def = make_strata_preset("vertical3");
    EXPECT_THROW(def.psi(Point{50.0, 50.0}), UncoveredPointError);
}

TEST(Strata, ValidateRejectsDegenerateRegions) {
    StrataDef bad;
    bad.regions = {Region{EllipseRegion{0, 0, 0.0, 1.0, 0}}};
    EXPECT_THROW(bad.validate(), ConfigError);
    StrataDef none;
    EXPECT_THROW(none.validate(), ConfigError);
    StrataDef empty_set;
    empty_set.regions = {Region{IndexSetRegion{{}}}};
    EXPECT_THROW(empty_set.validate(), ConfigError);
}

TEST(Kappa, KindsAndValidation) {
    RngStream rng(23);
    EXPECT_DOUBLE_EQ(KappaDistribution::point().draw(rng), 1.0);
    EXPECT_DOUBLE_EQ(KappaDistribution::uniform_range(0.3, 0.3).draw(rng), 0.3);

    KappaDistribution u = KappaDistribution::uniform_range(0.0, 1.0);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) sum += u.draw(rng);
    EXPECT_NEAR(sum / n, 0.5, 0.01);

    EXPECT_THROW(KappaDistribution::point(1.5), ConfigError);
    EXPECT_THROW(KappaDistribution::uniform_range(-0.1, 0.5), ConfigError);
    EXPECT_THROW(KappaDistribution::uniform_range(0.5, 0.2), ConfigError);
    EXPECT_THROW(KappaDistribution::uniform_range(0.5, 1.2), ConfigError);
}

TEST(ExitCheck, FullMembershipNeverExits) {
    const StrataDef def = make_strata_preset("vertical3");
    RngStream rng(29);
    // (-1.5, 0) is interior to stratum 0 only: psi_0 = 1.
    for (double kappa : {0.1, 0.5, 1.0})
        EXPECT_EQ(exit_check(def, 0, Point{-1.5, 0.0}, kappa, rng), -1);
}

TEST(ExitCheck, DestinationSplitMatchesPsiRatios) {
    // Three concentric circles tuned so psi = (0.2, 0.5, 0.3) exactly at
    // distance 0.5 from the common center (smooth mode: psi_k ~ 1 - q_k).
    StrataDef def;
    def.mode = PsiMode::smooth;
    const double d = 0.5;
    auto radius = [&](double w) { return d / std::sqrt(1.0 - w); };
    def.regions = {Region{CircleRegion{0, 0, radius(0.2)}},
                   Region{CircleRegion{0, 0, radius(0.5)}},
                   Region{CircleRegion{0, 0, radius(0.3)}}};
    const Point x{d, 0.0};
    const PsiValues w = def.psi(x);
    ASSERT_NEAR(w[0], 0.2, 1e-12);
    ASSERT_NEAR(w[1], 0.5, 1e-12);
    ASSERT_NEAR(w[2], 0.3, 1e-12);

    // kappa = 0.6 > psi_0, so the particle exits; destinations are drawn
    // proportionally to (0.5, 0.3) -> (0.625, 0.375).
    RngStream rng(31);
    int to1 = 0, to2 = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const int dest = exit_check(def, 0, x, 0.6, rng);
        ASSERT_NE(dest, -1);
        ASSERT_NE(dest, 0);
        (dest == 1 ? to1 : to2) += 1;
    }
    EXPECT_NEAR(to1 / double(n), 0.625, 0.01);
    EXPECT_NEAR(to2 / double(n), 0.375, 0.01);
}

TEST(ExitCheck, DisjointPartitionReducesToMembership) {
    // On index-set strata, the psi/kappa machinery must agree with the plain
    // "exit iff the state left A_j" rule for every kappa in (0, 1].
    const StrataDef def = make_index_strata({{0, 1}, {2}, {3, 4}});
    const int set_of[5] = {0, 0, 1, 2, 2};
    RngStream rng(37);
    for (double kappa : {0.05, 0.4, 1.0}) {
        for (int j = 0; j < 3; ++j) {
            for (int s = 0; s < 5; ++s) {
                const int got = exit_check(def, j, Point::of_state(s), kappa, rng);
                if (set_of[s] == j)
                    EXPECT_EQ(got, -1);
                else
                    EXPECT_EQ(got, set_of[s]);
            }
        }
    }
}

TEST(IndexOf, DeterministicWhenUnique) {
    const StrataDef geo = make_strata_preset("vertical3");
    RngStream rng(41);
    EXPECT_EQ(geo.index_of(Point{-1.5, 0.0}, rng), 0);
    EXPECT_EQ(geo.index_of(Point{1.5, 0.0}, rng), 2);

    const StrataDef idx = make_index_strata({{0, 1}, {2}});
    EXPECT_EQ(idx.index_of(Point::of_state(2), rng), 1);
}

TEST(IndexOf, OverlapSplitsEvenly) {
    StrataDef def;
    def.regions = {Region{CircleRegion{0.0, 0.0, 1.0}}, Region{CircleRegion{1.0, 0.0, 1.0}}};
    RngStream rng(43);
    int first = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i)
        if (def.index_of(Point{0.5, 0.0}, rng) == 0) ++first;
    EXPECT_NEAR(first / double(n), 0.5, 0.01);
}
