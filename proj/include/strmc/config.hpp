#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "strmc/errors.hpp"
#include "strmc/histogram.hpp"
#include "strmc/injection.hpp"
#include "strmc/kernels.hpp"
#include "strmc/strata.hpp"
#include "strmc/trajectory.hpp"

namespace strmc {

enum class SystemKind { maier_stein, discrete };

// Everything a run needs, parsed from one JSON document.  See README for the
// schema; parse(serialize(c)) == c is a tested contract.
struct RunConfig {
    // system
    SystemKind kind = SystemKind::maier_stein;
    MaierSteinParams ms;                           // maier_stein
    double h = 1e-3;                               // maier_stein step size
    std::string discrete_preset;                   // discrete: preset name, or ...
    std::vector<std::vector<double>> transition;   // ... explicit row-stochastic matrix
    int random_states = 9;                         // preset "random": chain size ...
    int random_strata = 3;                         // ... and number of strata

    // strata
    std::string strata_preset;                     // geometry preset name, or ...
    std::vector<Region> regions;                   // ... explicit regions, or ...
    std::vector<std::vector<int>> strata_sets;     // ... index sets (discrete)
    PsiMode psi_mode = PsiMode::hard;

    // method
    UpdateRule version = UpdateRule::eigen;
    int iterations = 30;
    std::uint64_t exits_per_stratum = 1000;
    KappaDistribution eta;
    std::uint64_t seed = 1;
    long long max_steps = 0;                       // 0: default by system kind
    OccupationMode occupation = OccupationMode::binned;
    int threads = 1;
    int runs_to_average = 1;
    long long benchmark_steps = 1000000;

    // output
    GridSpec grid;                                 // ignored for discrete (state bins)
    bool grid_given = false;
    std::string out_dir = "out";

    friend bool operator==(const RunConfig&, const RunConfig&) = default;

    long long effective_max_steps() const {
        if (max_steps > 0) return max_steps;
        return kind == SystemKind::maier_stein ? 10000000LL : 100000LL;
    }
};

namespace cfg_detail {

using nlohmann::json;

inline void require(bool ok, const std::string& field, const std::string& why) {
    if (!ok) throw ConfigError("config field '" + field + "': " + why);
}

template <class T>
T get_or(const json& j, const std::string& key, const T& fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config field '" + key + "': wrong type");
    }
}

template <class T>
T get_req(const json& j, const std::string& key) {
    require(j.contains(key), key, "missing");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config field '" + key + "': wrong type");
    }
}

inline json region_to_json(const Region& r) {
    json j;
    if (const auto* e = std::get_if<EllipseRegion>(&r)) {
        j = {{"type", "ellipse"}, {"cx", e->cx}, {"cy", e->cy},
             {"a", e->a},         {"b", e->b},   {"angle", e->angle}};
    } else if (const auto* c = std::get_if<CircleRegion>(&r)) {
        j = {{"type", "circle"}, {"cx", c->cx}, {"cy", c->cy}, {"r", c->r}};
    } else {
        const auto& s = std::get<IndexSetRegion>(r);
        j = {{"type", "states"}, {"states", s.states}};
    }
    return j;
}

inline Region region_from_json(const json& j) {
    const std::string type = get_req<std::string>(j, "type");
    if (type == "ellipse")
        return EllipseRegion{get_req<double>(j, "cx"), get_req<double>(j, "cy"),
                             get_req<double>(j, "a"), get_req<double>(j, "b"),
                             get_or<double>(j, "angle", 0.0)};
    if (type == "circle")
        return CircleRegion{get_req<double>(j, "cx"), get_req<double>(j, "cy"),
                            get_req<double>(j, "r")};
    if (type == "states") return IndexSetRegion{get_req<std::vector<int>>(j, "states")};
    throw ConfigError("config field 'strata.regions.type': unknown region type '" + type + "'");
}

}  // namespace cfg_detail

inline std::string serialize_config(const RunConfig& c) {
    using nlohmann::json;
    json j;

    json sys;
    if (c.kind == SystemKind::maier_stein) {
        sys["kind"] = "maier_stein";
        sys["beta"] = c.ms.beta;
        sys["epsilon"] = c.ms.epsilon;
        sys["h"] = c.h;
    } else {
        sys["kind"] = "discrete";
        if (!c.discrete_preset.empty()) sys["preset"] = c.discrete_preset;
        if (c.discrete_preset == "random") {
            sys["states"] = c.random_states;
            sys["strata_count"] = c.random_strata;
        }
        if (!c.transition.empty()) sys["transition"] = c.transition;
    }
    j["system"] = sys;

    json st;
    if (!c.strata_preset.empty()) st["preset"] = c.strata_preset;
    if (!c.regions.empty()) {
        json arr = json::array();
        for (const Region& r : c.regions) arr.push_back(cfg_detail::region_to_json(r));
        st["regions"] = arr;
    }
    if (!c.strata_sets.empty()) st["sets"] = c.strata_sets;
    st["psi"] = c.psi_mode == PsiMode::hard ? "hard" : "smooth";
    j["strata"] = st;

    j["version"] = update_rule_name(c.version);
    j["iterations"] = c.iterations;
    j["exits_per_stratum"] = c.exits_per_stratum;
    if (c.eta.kind == KappaDistribution::Kind::point_mass)
        j["eta"] = {{"kind", "point"}, {"value", c.eta.value}};
    else
        j["eta"] = {{"kind", "uniform"}, {"lo", c.eta.lo}, {"hi", c.eta.hi}};
    j["seed"] = c.seed;
    if (c.max_steps > 0) j["max_steps"] = c.max_steps;
    j["occupation"] = c.occupation == OccupationMode::points ? "points" : "binned";
    j["threads"] = c.threads;
    j["runs_to_average"] = c.runs_to_average;
    j["benchmark_steps"] = c.benchmark_steps;

    if (c.grid_given) {
        json g;
        g["axis0"] = {c.grid.min0, c.grid.max0};
        g["bins0"] = c.grid.n0;
        if (c.grid.dims == 2) {
            g["axis1"] = {c.grid.min1, c.grid.max1};
            g["bins1"] = c.grid.n1;
        }
        j["grid"] = g;
    }
    j["out"] = c.out_dir;
    return j.dump(2) + "\n";
}

inline void validate_config(const RunConfig& c) {
    using cfg_detail::require;
    require(c.iterations >= 0, "iterations", "must be >= 0");
    require(c.exits_per_stratum >= 1, "exits_per_stratum", "must be >= 1");
    require(c.threads >= 1, "threads", "must be >= 1");
    require(c.runs_to_average >= 1, "runs_to_average", "must be >= 1");
    try {
        c.eta.check();
    } catch (const Error& e) {
        throw ConfigError("config field 'eta': " + std::string(e.what()));
    }
    if (c.kind == SystemKind::maier_stein) {
        require(c.ms.beta > 0.0, "system.beta", "must be > 0");
        require(c.ms.epsilon > 0.0, "system.epsilon", "must be > 0");
        require(c.h > 0.0, "system.h", "must be > 0");
        require(!c.strata_preset.empty() || !c.regions.empty(), "strata",
                "needs a preset name or a region list");
        require(c.strata_sets.empty(), "strata.sets", "index sets require a discrete system");
    } else {
        require(!c.discrete_preset.empty() || !c.transition.empty(), "system",
                "discrete system needs 'preset' or 'transition'");
        require(c.discrete_preset.empty() || c.transition.empty(), "system",
                "'preset' and 'transition' are mutually exclusive");
        if (c.discrete_preset == "random") {
            require(c.random_states >= 2, "system.states", "must be >= 2");
            require(c.random_strata >= 2 && c.random_strata <= c.random_states,
                    "system.strata_count", "must be in [2, states]");
        }
        if (!c.transition.empty()) {
            const std::size_t n = c.transition.size();
            for (const auto& row : c.transition)
                require(row.size() == n, "system.transition", "matrix must be square");
            require(!c.strata_sets.empty(), "strata.sets",
                    "explicit discrete system needs index sets");
        }
        require(c.strata_preset.empty() && c.regions.empty(), "strata",
                "discrete systems use index sets, not geometric regions");
    }
    if (c.grid_given) {
        require(c.grid.n0 >= 1 && (c.grid.dims == 1 || c.grid.n1 >= 1), "grid",
                "bin counts must be >= 1");
        require(c.grid.max0 > c.grid.min0 && (c.grid.dims == 1 || c.grid.max1 > c.grid.min1),
                "grid", "axis bounds must be increasing");
    }
}

inline RunConfig parse_config(const std::string& text) {
    using nlohmann::json;
    using namespace cfg_detail;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }

    RunConfig c;
    const json sys = get_req<json>(j, "system");
    const std::string kind = get_req<std::string>(sys, "kind");
    if (kind == "maier_stein") {
        c.kind = SystemKind::maier_stein;
        c.ms.beta = get_or<double>(sys, "beta", c.ms.beta);
        c.ms.epsilon = get_or<double>(sys, "epsilon", c.ms.epsilon);
        c.h = get_or<double>(sys, "h", c.h);
    } else if (kind == "discrete") {
        c.kind = SystemKind::discrete;
        c.discrete_preset = get_or<std::string>(sys, "preset", "");
        if (c.discrete_preset == "random") {
            c.random_states = get_or<int>(sys, "states", c.random_states);
            c.random_strata = get_or<int>(sys, "strata_count", c.random_strata);
        }
        c.transition = get_or<std::vector<std::vector<double>>>(sys, "transition", {});
    } else {
        throw ConfigError("config field 'system.kind': unknown kind '" + kind + "'");
    }

    if (j.contains("strata")) {
        const json st = j.at("strata");
        c.strata_preset = get_or<std::string>(st, "preset", "");
        if (st.contains("regions")) {
            require(st.at("regions").is_array(), "strata.regions", "must be an array");
            for (const json& r : st.at("regions")) c.regions.push_back(region_from_json(r));
        }
        c.strata_sets = get_or<std::vector<std::vector<int>>>(st, "sets", {});
        const std::string psi = get_or<std::string>(st, "psi", "hard");
        require(psi == "hard" || psi == "smooth", "strata.psi", "must be 'hard' or 'smooth'");
        c.psi_mode = psi == "hard" ? PsiMode::hard : PsiMode::smooth;
    }

    const std::string version = get_or<std::string>(j, "version", "eigen");
    require(version == "basic" || version == "eigen", "version", "must be 'basic' or 'eigen'");
    c.version = version == "basic" ? UpdateRule::basic : UpdateRule::eigen;
    c.iterations = get_or<int>(j, "iterations", c.iterations);
    c.exits_per_stratum = get_or<std::uint64_t>(j, "exits_per_stratum", c.exits_per_stratum);

    if (j.contains("eta")) {
        const json eta = j.at("eta");
        const std::string ek = get_req<std::string>(eta, "kind");
        try {
            if (ek == "point") {
                c.eta = KappaDistribution::point(get_or<double>(eta, "value", 1.0));
            } else if (ek == "uniform") {
                c.eta = KappaDistribution::uniform_range(get_or<double>(eta, "lo", 0.0),
                                                         get_or<double>(eta, "hi", 1.0));
            } else {
                throw ConfigError("config field 'eta.kind': must be 'point' or 'uniform'");
            }
        } catch (const ConfigError& e) {
            const std::string what = e.what();
            if (what.find("config field") != std::string::npos) throw;
            throw ConfigError("config field 'eta': " + what);
        }
    }

    c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
    c.max_steps = get_or<long long>(j, "max_steps", 0);
    const std::string occ = get_or<std::string>(j, "occupation", "binned");
    require(occ == "points" || occ == "binned", "occupation", "must be 'points' or 'binned'");
    c.occupation = occ == "points" ? OccupationMode::points : OccupationMode::binned;
    c.threads = get_or<int>(j, "threads", c.threads);
    c.runs_to_average = get_or<int>(j, "runs_to_average", c.runs_to_average);
    c.benchmark_steps = get_or<long long>(j, "benchmark_steps", c.benchmark_steps);

    if (j.contains("grid")) {
        const json g = j.at("grid");
        const auto a0 = get_req<std::vector<double>>(g, "axis0");
        require(a0.size() == 2, "grid.axis0", "must be [lo, hi]");
        const int n0 = get_req<int>(g, "bins0");
        if (g.contains("axis1")) {
            const auto a1 = get_req<std::vector<double>>(g, "axis1");
            require(a1.size() == 2, "grid.axis1", "must be [lo, hi]");
            c.grid = GridSpec::rect(a0[0], a0[1], n0, a1[0], a1[1], get_req<int>(g, "bins1"));
        } else {
            c.grid = GridSpec::line(a0[0], a0[1], n0);
        }
        c.grid_given = true;
    }
    c.out_dir = get_or<std::string>(j, "out", c.out_dir);

    validate_config(c);
    return c;
}

}  // namespace strmc
