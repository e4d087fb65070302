#include "trailforge/evalkit.hpp"

#include "trailforge/errors.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace trailforge {

namespace {

const std::vector<std::string> kMetrics = {"appropriateness", "attractiveness", "interest"};

double round_to(double v, int decimals) {
    double scale = std::pow(10.0, decimals);
    return std::round(v * scale) / scale;
}

double median_of(std::vector<int> values) {
    std::sort(values.begin(), values.end());
    size_t n = values.size();
    if (n == 0) return 0;
    if (n % 2 == 1) return values[n / 2];
    return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

int metric_value(const RatingRecord& r, const std::string& metric) {
    if (metric == "appropriateness") return r.appropriateness;
    if (metric == "attractiveness") return r.attractiveness;
    return r.interest;
}

} // namespace

void RatingRecord::validate() const {
    auto in_range = [](int v) { return v >= 1 && v <= 7; };
    if (!in_range(appropriateness) || !in_range(attractiveness) || !in_range(interest))
        fail(errc::invalid_argument,
             fmt::format("rating outside [1,7] for participant {} movie {} method {}",
                         participant, movie, method));
    if (participant.empty() || movie.empty() || method.empty())
        fail(errc::invalid_argument, "rating record has an empty key field");
}

int total_score(const RatingRecord& record) {
    record.validate();
    return record.appropriateness + record.attractiveness + record.interest;
}

std::vector<RatingRecord> load_ratings_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(errc::io, fmt::format("cannot open {}", path.string()));
    std::string line;
    if (!std::getline(in, line)) fail(errc::parse, fmt::format("{}: empty file", path.string()));
    auto header = split_csv_line(line);
    const std::vector<std::string> expected = {"participant",     "movie",
                                               "method",          "appropriateness",
                                               "attractiveness",  "interest"};
    if (header != expected)
        fail(errc::parse, fmt::format("{}: unexpected CSV header", path.string()));

    std::vector<RatingRecord> records;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 6)
            fail(errc::parse, fmt::format("{}:{}: expected 6 fields, got {}", path.string(),
                                          lineno, fields.size()));
        RatingRecord r;
        r.participant = fields[0];
        r.movie = fields[1];
        r.method = fields[2];
        try {
            r.appropriateness = std::stoi(fields[3]);
            r.attractiveness = std::stoi(fields[4]);
            r.interest = std::stoi(fields[5]);
        } catch (const std::exception&) {
            fail(errc::parse,
                 fmt::format("{}:{}: ratings must be integers", path.string(), lineno));
        }
        r.validate();
        records.push_back(std::move(r));
    }
    return records;
}

EvalReport aggregate(const std::vector<RatingRecord>& records) {
    if (records.empty()) fail(errc::invalid_argument, "no rating records");

    std::set<std::string> seen_triples;
    EvalReport report;
    std::map<std::string, std::map<std::string, std::vector<int>>> values;  // method -> metric -> list

    for (const RatingRecord& r : records) {
        r.validate();
        std::string key = r.participant + "\x1f" + r.movie + "\x1f" + r.method;
        if (!seen_triples.insert(key).second)
            fail(errc::invalid_argument,
                 fmt::format("duplicate rating for participant {} movie {} method {}",
                             r.participant, r.movie, r.method));
        if (values.find(r.method) == values.end())
            report.methods.push_back(r.method);  // first-appearance order
        for (const auto& metric : kMetrics)
            values[r.method][metric].push_back(metric_value(r, metric));
    }

    for (const auto& method : report.methods) {
        MethodStats stats;
        for (const auto& metric : kMetrics) {
            const auto& v = values[method][metric];
            double sum = 0;
            for (int x : v) sum += x;
            stats.mean[metric] = round_to(sum / static_cast<double>(v.size()), 2);
            stats.median[metric] = round_to(median_of(v), 1);
        }
        report.stats[method] = stats;
    }

    // Best-method counts: per participant, total score summed over movies;
    // every tied method gets credit.
    std::map<std::string, std::map<std::string, int>> totals;  // participant -> method -> sum
    for (const RatingRecord& r : records) totals[r.participant][r.method] += total_score(r);
    for (const auto& [participant, by_method] : totals) {
        int best = 0;
        for (const auto& [method, sum] : by_method) best = std::max(best, sum);
        for (const auto& [method, sum] : by_method)
            if (sum == best) report.stats[method].best_count++;
    }
    return report;
}

std::string EvalReport::render_text() const {
    std::ostringstream out;
    auto table = [&](const std::string& title, bool medians) {
        out << title << "\t";
        for (const auto& m : methods) out << m << "\t";
        out << "\n";
        for (const auto& metric : kMetrics) {
            std::string label = metric;
            label[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(label[0])));
            out << label;
            for (const auto& m : methods) {
                const MethodStats& s = stats.at(m);
                if (medians) out << fmt::format("\t{:.1f}", s.median.at(metric));
                else out << fmt::format("\t{:.2f}", s.mean.at(metric));
            }
            out << "\n";
        }
        out << "\n";
    };
    table("Mean score", false);
    table("Median score", true);

    out << "Rated best (participants)\n";
    for (const auto& m : methods)
        out << fmt::format("{}\t{}\n", m, stats.at(m).best_count);
    return out.str();
}

json EvalReport::to_json() const {
    json j;
    j["methods"] = methods;
    json per_method = json::object();
    for (const auto& m : methods) {
        const MethodStats& s = stats.at(m);
        per_method[m] = {{"mean", s.mean}, {"median", s.median}, {"best_count", s.best_count}};
    }
    j["stats"] = per_method;
    return j;
}

} // namespace trailforge
