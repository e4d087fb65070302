#pragma once

#include "trailforge/jsonio.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace trailforge {

struct RatingRecord {
    std::string participant;
    std::string movie;
    std::string method;
    int appropriateness = 0;
    int attractiveness = 0;
    int interest = 0;

    void validate() const;  // each rating in [1, 7]
};

int total_score(const RatingRecord& record);

// CSV with header participant,movie,method,appropriateness,attractiveness,interest.
std::vector<RatingRecord> load_ratings_csv(const std::filesystem::path& path);

struct MethodStats {
    // metric -> value; metrics keyed "appropriateness" / "attractiveness" / "interest"
    std::map<std::string, double> mean;    // rounded to 2 decimals
    std::map<std::string, double> median;  // rounded to 1 decimal
    int best_count = 0;
};

struct EvalReport {
    std::vector<std::string> methods;  // first-appearance order
    std::map<std::string, MethodStats> stats;

    std::string render_text() const;  // mean + median tables, best counts
    json to_json() const;
};

// Means/medians per method x metric plus per-participant best-method counts
// (summed total score across movies; ties credit every tied method).
EvalReport aggregate(const std::vector<RatingRecord>& records);

} // namespace trailforge
