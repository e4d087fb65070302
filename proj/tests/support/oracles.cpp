#include "oracles.hpp"

#include <algorithm>
#include <cmath>

namespace oracle {

namespace {

size_t common_prefix_len(std::string_view a, std::string_view b) {
    size_t n = 0;
    while (n < a.size() && n < b.size() && a[n] == b[n]) ++n;
    return n;
}

size_t matched(std::string_view a, std::string_view b) {
    if (a.empty() || b.empty()) return 0;
    size_t best_len = 0, best_i = 0, best_j = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        for (size_t j = 0; j < b.size(); ++j) {
            size_t len = common_prefix_len(a.substr(i), b.substr(j));
            if (len > best_len) {
                best_len = len;
                best_i = i;
                best_j = j;
            }
        }
    }
    if (best_len == 0) return 0;
    return best_len + matched(a.substr(0, best_i), b.substr(0, best_j)) +
           matched(a.substr(best_i + best_len), b.substr(best_j + best_len));
}

} // namespace

double gestalt_ratio(std::string_view a, std::string_view b) {
    if (a.empty() && b.empty()) return 1.0;
    return 2.0 * static_cast<double>(matched(a, b)) / static_cast<double>(a.size() + b.size());
}

FramePlan frame_plan(double duration_s, double head_trim, double tail_trim) {
    const double start = duration_s * head_trim;
    const double end = duration_s * (1.0 - tail_trim);
    const double effective = end - start;
    // Count by repeated subtraction instead of floor(effective / 9).
    long count = 0;
    double remaining = effective;
    while (remaining >= 9.0) {
        remaining -= 9.0;
        ++count;
    }
    // Guard against accumulation drift right at a multiple of 9.
    if (std::abs(remaining - 9.0) < 1e-9) ++count;
    FramePlan plan{};
    plan.count = count;
    if (count > 0) {
        plan.spacing = effective / static_cast<double>(count);
        plan.first = start + plan.spacing / 2.0;
    }
    return plan;
}

std::vector<int> qc_positions(int n_sc, int n_qc) {
    std::vector<int> positions;
    const double k = static_cast<double>(n_sc) / (n_qc + 1);
    int prev = 0;
    for (int j = 1; j <= n_qc; ++j) {
        int p = static_cast<int>(std::floor(j * k + 0.5));
        if (p < 1) p = 1;
        if (p > n_sc) p = n_sc;
        if (p <= prev) p = prev + 1;
        positions.push_back(p);
        prev = p;
    }
    return positions;
}

namespace {

double cosine(const std::vector<float>& a, const std::vector<float>& b) {
    double dot = 0, na = 0, nb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na == 0 || nb == 0) return 0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

} // namespace

std::vector<PoolPick> greedy_select(const std::vector<std::vector<float>>& queries,
                                    const std::vector<PoolFrame>& pool, double duration,
                                    double min_sep, double partition_frac) {
    const auto n = static_cast<long>(queries.size());
    const long early = static_cast<long>(std::ceil(partition_frac * n));
    const double split = partition_frac * duration;

    std::vector<PoolPick> picks;
    std::vector<double> taken;
    for (long s = 0; s < n; ++s) {
        std::vector<std::pair<double, const PoolFrame*>> ranked;
        for (const PoolFrame& f : pool) {
            bool in_window = s < early ? f.ts <= split : f.ts > split;
            if (!in_window) continue;
            ranked.emplace_back(cosine(queries[static_cast<size_t>(s)], f.embedding), &f);
        }
        std::stable_sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
            if (x.first != y.first) return x.first > y.first;
            return x.second->ts < y.second->ts;
        });
        int chosen = -1;
        for (const auto& [sim, f] : ranked) {
            bool clash = false;
            for (double t : taken)
                if (std::abs(f->ts - t) < min_sep) clash = true;
            if (clash || f->has_text) continue;
            chosen = f->index;
            taken.push_back(f->ts);
            break;
        }
        picks.push_back({static_cast<int>(s), chosen});
    }
    return picks;
}

double mean_of(const std::vector<int>& values) {
    long double acc = 0;
    for (auto it = values.rbegin(); it != values.rend(); ++it) acc += *it;
    return static_cast<double>(acc / static_cast<long double>(values.size()));
}

double median_of(const std::vector<int>& values) {
    std::vector<int> v = values;
    size_t n = v.size();
    std::nth_element(v.begin(), v.begin() + static_cast<long>(n / 2), v.end());
    double hi = v[n / 2];
    if (n % 2 == 1) return hi;
    std::nth_element(v.begin(), v.begin() + static_cast<long>(n / 2 - 1), v.end());
    return (v[n / 2 - 1] + hi) / 2.0;
}

} // namespace oracle
