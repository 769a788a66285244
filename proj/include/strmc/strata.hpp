#pragma once

#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "strmc/errors.hpp"
#include "strmc/point.hpp"
#include "strmc/rng.hpp"

namespace strmc {

// ============================================================================
// Stratum regions
// ============================================================================
// A region reports a "quadratic form" q(x): q < 1 strictly inside, q = 1 on
// the boundary.  Index-set regions (finite chains) use 0 / 2 for member /
// non-member so the same machinery covers both worlds.

struct EllipseRegion {
    double cx = 0.0, cy = 0.0;   // center
    double a = 1.0, b = 1.0;     // semi-axes
    double angle = 0.0;          // rotation, radians

    double quad(const Point& x) const {
        const double du = x[0] - cx, dv = x[1] - cy;
        const double c = std::cos(angle), s = std::sin(angle);
        const double e1 = c * du + s * dv;
        const double e2 = -s * du + c * dv;
        return (e1 / a) * (e1 / a) + (e2 / b) * (e2 / b);
    }

    friend bool operator==(const EllipseRegion&, const EllipseRegion&) = default;
};

struct CircleRegion {
    double cx = 0.0, cy = 0.0;
    double r = 1.0;

    double quad(const Point& x) const {
        const double du = x[0] - cx, dv = x[1] - cy;
        return (du * du + dv * dv) / (r * r);
    }

    friend bool operator==(const CircleRegion&, const CircleRegion&) = default;
};

struct IndexSetRegion {
    std::vector<int> states;

    bool member(int s) const {
        for (int t : states)
            if (t == s) return true;
        return false;
    }
    double quad(const Point& x) const { return member(x.state()) ? 0.0 : 2.0; }

    friend bool operator==(const IndexSetRegion&, const IndexSetRegion&) = default;
};

using Region = std::variant<EllipseRegion, CircleRegion, IndexSetRegion>;

inline double region_quad(const Region& r, const Point& x) {
    return std::visit([&](const auto& reg) { return reg.quad(x); }, r);
}

// ============================================================================
// Strata definition and the partition of unity
// ============================================================================

enum class PsiMode { hard, smooth };

// Partition-of-unity values at one point; fixed capacity avoids allocation
// in the per-step exit check.
struct PsiValues {
    static constexpr int kMax = 16;
    double v[kMax];
    int n = 0;
    double operator[](int j) const { return v[j]; }
};

struct StrataDef {
    std::vector<Region> regions;
    PsiMode mode = PsiMode::hard;

    int size() const { return static_cast<int>(regions.size()); }

    double quad(int j, const Point& x) const { return region_quad(regions[j], x); }
    bool covers(int j, const Point& x) const { return quad(j, x) < 1.0; }

    // psi_j(x) for all j.  Hard mode splits the unit evenly over covering
    // regions; smooth mode weights by clamp(1 - q_j, 0).  Throws if x is
    // covered by no region.
    PsiValues psi(const Point& x) const {
        const int J = size();
        if (J > PsiValues::kMax) throw ConfigError("StrataDef: too many strata");
        PsiValues out;
        out.n = J;
        double total = 0.0;
        for (int j = 0; j < J; ++j) {
            const double q = quad(j, x);
            double w = 0.0;
            if (mode == PsiMode::hard) {
                w = q < 1.0 ? 1.0 : 0.0;
            } else {
                w = q < 1.0 ? 1.0 - q : 0.0;
            }
            out.v[j] = w;
            total += w;
        }
        if (total <= 0.0)
            throw UncoveredPointError("point not covered by any stratum region");
        for (int j = 0; j < J; ++j) out.v[j] /= total;
        return out;
    }

    // psi-proportional stratum assignment (used for initial points).
    int index_of(const Point& x, RngStream& rng) const {
        const PsiValues w = psi(x);
        const double u = rng.uniform();
        double acc = 0.0;
        for (int j = 0; j < size(); ++j) {
            acc += w.v[j];
            if (u < acc) return j;
        }
        return size() - 1;
    }

    void validate() const {
        if (regions.empty()) throw ConfigError("StrataDef: no regions");
        for (const Region& r : regions) {
            if (const auto* e = std::get_if<EllipseRegion>(&r)) {
                if (!(e->a > 0.0) || !(e->b > 0.0))
                    throw ConfigError("StrataDef: ellipse semi-axes must be positive");
            } else if (const auto* c = std::get_if<CircleRegion>(&r)) {
                if (!(c->r > 0.0)) throw ConfigError("StrataDef: circle radius must be positive");
            } else if (const auto* s = std::get_if<IndexSetRegion>(&r)) {
                if (s->states.empty()) throw ConfigError("StrataDef: empty index set");
            }
        }
    }
};

// ============================================================================
// Exit rule
// ============================================================================

// Distribution of the per-trajectory threshold kappa; support must lie in
// [0, 1].  The default (point mass at 1) makes stratum membership a hard
// yes/no test.
struct KappaDistribution {
    enum class Kind { point_mass, uniform };
    Kind kind = Kind::point_mass;
    double value = 1.0;        // point-mass location
    double lo = 0.0, hi = 1.0; // uniform bounds (lo == hi degenerates to a point)

    static KappaDistribution point(double v = 1.0) {
        KappaDistribution d;
        d.kind = Kind::point_mass;
        d.value = v;
        d.check();
        return d;
    }
    static KappaDistribution uniform_range(double lo, double hi) {
        KappaDistribution d;
        d.kind = Kind::uniform;
        d.lo = lo;
        d.hi = hi;
        d.check();
        return d;
    }

    void check() const {
        if (kind == Kind::point_mass) {
            if (!(value >= 0.0) || !(value <= 1.0))
                throw ConfigError("KappaDistribution: point mass outside [0, 1]");
        } else if (!(0.0 <= lo) || !(lo <= hi) || !(hi <= 1.0)) {
            throw ConfigError("KappaDistribution: uniform bounds must satisfy 0 <= lo <= hi <= 1");
        }
    }

    double draw(RngStream& rng) const {
        if (kind == Kind::point_mass) return value;
        if (lo == hi) return lo;
        return rng.uniform(lo, hi);
    }

    friend bool operator==(const KappaDistribution&, const KappaDistribution&) = default;
};

// One step of the exit rule for a particle labelled j at the fresh point
// x_new.  Returns -1 to stay in stratum j, otherwise the destination index
// drawn proportionally to psi_k (k != j).
inline int exit_check(const StrataDef& strata, int j, const Point& x_new, double kappa,
                      RngStream& rng) {
    const PsiValues w = strata.psi(x_new);
    if (w.v[j] >= kappa) return -1;
    double rest = 0.0;
    for (int k = 0; k < strata.size(); ++k)
        if (k != j) rest += w.v[k];
    if (rest <= 0.0)
        throw GeometryError("exit_check: psi_j below threshold but no other stratum covers the point");
    const double u = rng.uniform() * rest;
    double acc = 0.0;
    for (int k = 0; k < strata.size(); ++k) {
        if (k == j) continue;
        acc += w.v[k];
        if (u < acc) return k;
    }
    for (int k = strata.size() - 1; k >= 0; --k)
        if (k != j && w.v[k] > 0.0) return k;
    throw GeometryError("exit_check: destination draw failed");
}

// ============================================================================
// Geometry presets for the Maier–Stein domain [-1.5,1.5] x [-1,1]
// ============================================================================
// The layouts keep overlap bands at most ~20% of the neighbouring semi-axes
// and place internal boundaries close to the metastable points at (+-1, 0),
// so escapes never have to climb a deep potential barrier.

inline StrataDef make_strata_preset(const std::string& name, PsiMode mode = PsiMode::hard) {
    StrataDef def;
    def.mode = mode;
    auto ell = [](double cx, double a, double b, double angle = 0.0) {
        return Region{EllipseRegion{cx, 0.0, a, b, angle}};
    };
    if (name == "vertical3") {
        def.regions = {ell(-1.5, 0.70, 3.0), ell(0.0, 0.92, 3.0), ell(1.5, 0.70, 3.0)};
    } else if (name == "vertical5") {
        def.regions = {ell(-1.5, 0.52, 3.0), ell(-0.72, 0.32, 3.0), ell(0.0, 0.46, 3.0),
                       ell(0.72, 0.32, 3.0), ell(1.5, 0.52, 3.0)};
    } else if (name == "tilted5") {
        def.regions = {ell(-1.5, 0.58, 3.0, -0.06), ell(-0.72, 0.38, 3.0, 0.06),
                       ell(0.0, 0.52, 3.0, -0.06), ell(0.72, 0.38, 3.0, 0.06),
                       ell(1.5, 0.58, 3.0, -0.06)};
    } else if (name == "circles6") {
        def.regions = {Region{CircleRegion{-1.0, -0.52, 0.95}}, Region{CircleRegion{0.0, -0.52, 0.80}},
                       Region{CircleRegion{1.0, -0.52, 0.88}},  Region{CircleRegion{-1.0, 0.52, 0.84}},
                       Region{CircleRegion{0.0, 0.52, 0.92}},   Region{CircleRegion{1.0, 0.52, 0.78}}};
    } else {
        throw ConfigError("unknown strata preset: " + name);
    }
    def.validate();
    return def;
}

// Index-set strata over a finite chain from explicit state lists.
inline StrataDef make_index_strata(const std::vector<std::vector<int>>& sets) {
    StrataDef def;
    def.mode = PsiMode::hard;
    for (const auto& s : sets) def.regions.push_back(Region{IndexSetRegion{s}});
    def.validate();
    return def;
}

}  // namespace strmc
