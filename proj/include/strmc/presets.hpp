#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "strmc/errors.hpp"
#include "strmc/kernels.hpp"
#include "strmc/rng.hpp"

namespace strmc {

// A finite chain bundled with its stratum partition.
struct DiscretePreset {
    DiscreteChain chain;
    std::vector<std::vector<int>> sets;
};

// Two states, one per stratum.  Asymmetric on purpose: the stationary law is
// (2/3, 1/3) and the mean exit times are (10, 5), so the fixed-point weights
// still come out exactly (1/2, 1/2) -- a handy closed-form target.
inline DiscretePreset make_two_state_preset() {
    return {DiscreteChain(2, {0.9, 0.1, 0.2, 0.8}), {{0}, {1}}};
}

// Nine states in three blocks of three with a cyclic drift: transitions
// mostly stay inside a block, leak forward around the cycle far more often
// than backward, and the blocks hold the walker for different times so the
// fixed-point weights are visibly non-uniform.  The entries are drawn once
// from a fixed stream, so the preset is the same matrix in every build.
inline DiscretePreset make_nine_state_preset() {
    RngStream rng(827504131ull, StreamPurpose::preset, 0, 0, 0);
    const double block_scale[3] = {1.0, 1.5, 0.7};
    std::vector<double> rows(81);
    for (int i = 0; i < 9; ++i) {
        const int bi = i / 3;
        double sum = 0.0;
        for (int j = 0; j < 9; ++j) {
            const int bj = j / 3;
            double w = 0.1 + rng.uniform();
            if (bi == bj)
                w *= block_scale[bi] * (i == j ? 1.6 : 1.0);
            else if (bj == (bi + 1) % 3)
                w *= 0.20;
            else
                w *= 0.06;
            rows[i * 9 + j] = w;
            sum += w;
        }
        for (int j = 0; j < 9; ++j) rows[i * 9 + j] /= sum;
    }
    return {DiscreteChain(9, std::move(rows)), {{0, 1, 2}, {3, 4, 5}, {6, 7, 8}}};
}

inline DiscretePreset make_discrete_preset(const std::string& name) {
    if (name == "two_state") return make_two_state_preset();
    if (name == "nine_state") return make_nine_state_preset();
    throw ConfigError("unknown discrete preset: " + name);
}

// Random dense instance: n states, J strata as contiguous blocks with at
// least one state each.  Every entry is strictly positive, so the chain is
// irreducible and aperiodic and every exit law has full support on the
// complement.  Used by the stress tests and the oracle command.
inline DiscretePreset make_random_instance(int n, int J, std::uint64_t seed) {
    if (n < 2 || J < 2 || J > n) throw ConfigError("make_random_instance: need 2 <= J <= n");
    RngStream rng(seed, StreamPurpose::preset, 1, 0, 0);
    std::vector<double> rows(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int j = 0; j < n; ++j) {
            const double w = 0.05 + rng.uniform();
            rows[static_cast<std::size_t>(i) * n + j] = w;
            sum += w;
        }
        for (int j = 0; j < n; ++j) rows[static_cast<std::size_t>(i) * n + j] /= sum;
    }

    // J contiguous blocks: choose J-1 distinct interior cut points.
    std::vector<int> cuts;
    while (static_cast<int>(cuts.size()) < J - 1) {
        const int c = 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n - 1)));
        bool dup = false;
        for (int existing : cuts) dup = dup || existing == c;
        if (!dup) cuts.push_back(c);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.push_back(n);
    std::vector<std::vector<int>> sets;
    int start = 0;
    for (int cut : cuts) {
        std::vector<int> block;
        for (int s = start; s < cut; ++s) block.push_back(s);
        sets.push_back(std::move(block));
        start = cut;
    }
    return {DiscreteChain(n, std::move(rows)), std::move(sets)};
}

}  // namespace strmc
