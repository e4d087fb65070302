#include "trailforge/retrieval.hpp"

#include "trailforge/errors.hpp"
#include "trailforge/log.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>

namespace trailforge {

std::string SubplotQuery::query_text() const {
    if (keywords.empty()) return text;
    std::string joined;
    for (const auto& k : keywords) {
        if (!joined.empty()) joined += ", ";
        joined += k;
    }
    return joined;
}

SelectionConstraints make_constraints(double movie_duration_s) {
    SelectionConstraints c;
    c.min_sep_s = 0.015 * movie_duration_s;
    if (!(c.min_sep_s > 0)) fail(errc::invalid_argument, "movie duration must be positive");
    return c;
}

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size() || a.empty())
        fail(errc::invalid_argument,
             fmt::format("embedding dimensionality mismatch: {} vs {}", a.size(), b.size()));
    double dot = 0, na = 0, nb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na == 0 || nb == 0) return 0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<float> normalize_embedding(std::vector<float> v) {
    double norm = 0;
    for (float x : v) norm += static_cast<double>(x) * x;
    norm = std::sqrt(norm);
    if (norm > 0)
        for (float& x : v) x = static_cast<float>(x / norm);
    return v;
}

std::vector<const FrameRecord*> rank_frames(std::span<const float> query,
                                            const std::vector<FrameRecord>& frames,
                                            Interval window) {
    std::vector<std::pair<double, const FrameRecord*>> scored;
    for (const FrameRecord& f : frames) {
        if (f.timestamp_s < window.start_s || f.timestamp_s > window.end_s) continue;
        if (!f.embedding)
            fail(errc::invalid_argument,
                 fmt::format("frame {} has no embedding", f.index));
        scored.emplace_back(cosine_similarity(query, *f.embedding), &f);
    }
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second->timestamp_s < b.second->timestamp_s;
    });
    std::vector<const FrameRecord*> out;
    out.reserve(scored.size());
    for (const auto& [sim, f] : scored) out.push_back(f);
    return out;
}

std::vector<SubplotAssignment> select_frames(const std::vector<EmbeddedQuery>& subplots,
                                             std::vector<FrameRecord>& frames,
                                             const SelectionConstraints& constraints,
                                             double movie_duration_s, const TextProbe& has_text,
                                             const std::function<void(const std::string&)>& warn) {
    auto report = [&](const std::string& msg) {
        if (warn) warn(msg);
        else log::warn("{}", msg);
    };
    if (!(constraints.min_sep_s > 0))
        fail(errc::invalid_argument, "min_sep_s must be positive");

    const auto n = static_cast<long>(subplots.size());
    const auto early_count = static_cast<long>(std::ceil(constraints.partition_frac * n));
    const double split_ts = constraints.partition_frac * movie_duration_s;

    // Partition sanity: both halves need frames at all.
    bool any_early = false, any_late = false;
    for (const FrameRecord& f : frames) {
        if (f.timestamp_s <= split_ts) any_early = true;
        else any_late = true;
    }
    if (n > 0 && early_count > 0 && !any_early)
        fail(errc::config, "no frames in the early partition");
    if (n > early_count && !any_late)
        fail(errc::config, "no frames in the late partition");

    std::vector<SubplotAssignment> assignments;
    std::vector<double> taken_ts;

    for (long s = 0; s < n; ++s) {
        const EmbeddedQuery& q = subplots[static_cast<size_t>(s)];
        Interval window = s < early_count ? Interval{0.0, split_ts}
                                          : Interval{std::nextafter(split_ts, 1e300),
                                                     movie_duration_s + 1.0};
        auto ranked = rank_frames(q.embedding, frames, window);

        SubplotAssignment chosen;
        bool found = false;
        for (const FrameRecord* f : ranked) {
            const double sim = cosine_similarity(q.embedding, *f->embedding);
            bool too_close = false;
            for (double ts : taken_ts) {
                if (std::abs(f->timestamp_s - ts) < constraints.min_sep_s) {
                    too_close = true;
                    break;
                }
            }
            if (too_close) {
                chosen.rejected.push_back(RejectedFrame{f->index, sim, "min_sep"});
                continue;
            }
            // OCR verdicts are probed lazily and cached onto the record.
            bool text = f->has_text.value_or(false);
            if (!f->has_text) {
                text = has_text(*f);
                for (FrameRecord& mf : frames)
                    if (mf.index == f->index) mf.has_text = text;
            }
            if (text) {
                chosen.rejected.push_back(RejectedFrame{f->index, sim, "text"});
                continue;
            }
            chosen.subplot_index = q.query.subplot_index;
            chosen.frame = *f;
            chosen.frame.has_text = false;
            chosen.similarity = sim;
            found = true;
            break;
        }
        if (!found) {
            report(fmt::format("subplot {} exhausted its frame window; skipped",
                               q.query.subplot_index));
            continue;
        }
        taken_ts.push_back(chosen.frame.timestamp_s);
        assignments.push_back(std::move(chosen));
    }
    return assignments;
}

bool regions_block_frame(const std::vector<OcrRegion>& regions,
                         const SelectionConstraints& constraints) {
    for (const OcrRegion& r : regions)
        if (r.confidence >= constraints.ocr_conf_threshold &&
            r.area_frac >= constraints.ocr_min_area_frac)
            return true;
    return false;
}

} // namespace trailforge
