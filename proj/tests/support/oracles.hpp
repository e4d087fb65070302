#pragma once

// Independent reference implementations used to freeze expected values.
// Everything here is deliberately brute-force and shares no code with the
// library paths it checks.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace oracle {

// Ratcliff-Obershelp by exhaustive recursion: scan every (i, j) start pair
// for the longest common substring (first in a, then in b on ties), then
// recurse on both flanks.
double gestalt_ratio(std::string_view a, std::string_view b);

// Frame-plan arithmetic re-check with a different counting scheme.
struct FramePlan {
    long count;
    double first;
    double spacing;
};
FramePlan frame_plan(double duration_s, double head_trim, double tail_trim);

// Sequence rule re-derivation: QC slots after floor(j*k+0.5) SCs.
std::vector<int> qc_positions(int n_sc, int n_qc);

// Greedy frame selection reference for pools small enough to eyeball.
struct PoolFrame {
    int index;
    double ts;
    std::vector<float> embedding;
    bool has_text;
};
struct PoolPick {
    int subplot;
    int frame_index;  // -1 = skipped
};
std::vector<PoolPick> greedy_select(const std::vector<std::vector<float>>& queries,
                                    const std::vector<PoolFrame>& pool, double duration,
                                    double min_sep, double partition_frac);

// Mean/median recompute with a different accumulation order.
double mean_of(const std::vector<int>& values);
double median_of(const std::vector<int>& values);

} // namespace oracle
