#include "trailforge/textproc.hpp"

#include "trailforge/errors.hpp"
#include "trailforge/log.hpp"
#include "trailforge/paths.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>

namespace trailforge {

namespace {

// Strip surrounding ASCII/UTF-8 quote marks and collapse whitespace.
std::string strip_outer_quotes(std::string s) {
    auto starts_with = [&](const char* p) { return s.rfind(p, 0) == 0; };
    auto ends_with = [&](const char* p) {
        size_t n = strlen(p);
        return s.size() >= n && s.compare(s.size() - n, n, p) == 0;
    };
    bool changed = true;
    while (changed && !s.empty()) {
        changed = false;
        if (s.front() == '"' || s.front() == '\'') { s.erase(0, 1); changed = true; }
        else if (starts_with("“") || starts_with("‘")) { s.erase(0, 3); changed = true; }
        if (s.empty()) break;
        if (s.back() == '"' || s.back() == '\'') { s.pop_back(); changed = true; }
        else if (ends_with("”") || ends_with("’")) { s.erase(s.size() - 3); changed = true; }
    }
    return s;
}

std::string collapse_ws(const std::string& s) {
    std::string out;
    bool in_ws = true;  // drop leading whitespace
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!in_ws) out.push_back(' ');
            in_ws = true;
        } else {
            out.push_back(c);
            in_ws = false;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

// Tokens keep inner apostrophes ("you're").
std::vector<std::string> word_tokens(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char c : text) {
        auto uc = static_cast<unsigned char>(c);
        if (std::isalnum(uc) || (c == '\'' && !cur.empty())) {
            cur.push_back(static_cast<char>(std::tolower(uc)));
        } else if (!cur.empty()) {
            tokens.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(cur);
    return tokens;
}

std::set<std::string> load_word_set(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(errc::io, fmt::format("cannot open lexicon {}", path.string()));
    std::set<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        out.insert(lower(line));
    }
    return out;
}

// Maybe-speaker prefix: short, no quote marks, at least one letter.
bool plausible_speaker(const std::string& s) {
    if (s.empty() || s.size() > 60) return false;
    bool has_alpha = false;
    for (char c : s) {
        if (c == '"' || c == '.' || c == '!' || c == '?') return false;
        if (std::isalpha(static_cast<unsigned char>(c))) has_alpha = true;
    }
    return has_alpha;
}

struct LcsMatch {
    size_t a = 0, b = 0, len = 0;
};

// Longest common substring of a[alo,ahi) x b[blo,bhi); ties resolve to the
// smallest a index, then the smallest b index.
LcsMatch longest_match(std::string_view a, std::string_view b, size_t alo, size_t ahi,
                       size_t blo, size_t bhi) {
    LcsMatch best{alo, blo, 0};
    std::vector<size_t> prev(bhi - blo + 1, 0), cur(bhi - blo + 1, 0);
    for (size_t i = alo; i < ahi; ++i) {
        for (size_t j = blo; j < bhi; ++j) {
            size_t k = (a[i] == b[j]) ? prev[j - blo] + 1 : 0;
            cur[j - blo + 1] = k;
            if (k > best.len) {
                best.len = k;
                best.a = i - k + 1;
                best.b = j - k + 1;
            }
        }
        std::swap(prev, cur);
        std::fill(cur.begin(), cur.end(), 0);
    }
    return best;
}

size_t matched_chars(std::string_view a, std::string_view b, size_t alo, size_t ahi, size_t blo,
                     size_t bhi) {
    if (alo >= ahi || blo >= bhi) return 0;
    LcsMatch m = longest_match(a, b, alo, ahi, blo, bhi);
    if (m.len == 0) return 0;
    return m.len + matched_chars(a, b, alo, m.a, blo, m.b) +
           matched_chars(a, b, m.a + m.len, ahi, m.b + m.len, bhi);
}

} // namespace

std::string clean_quote_text(const std::string& raw) {
    return strip_outer_quotes(collapse_ws(raw));
}

std::vector<Quote> parse_quote_block(const std::string& raw) {
    std::vector<Quote> quotes;
    std::vector<std::pair<std::optional<std::string>, std::string>> lines;  // speaker, text

    size_t pos = 0;
    bool any_speaker = false;
    while (pos <= raw.size()) {
        size_t nl = raw.find('\n', pos);
        std::string line = raw.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
        pos = nl == std::string::npos ? raw.size() + 1 : nl + 1;
        std::string trimmed = collapse_ws(line);
        if (trimmed.empty()) continue;

        auto colon = trimmed.find(':');
        if (colon != std::string::npos && plausible_speaker(trimmed.substr(0, colon))) {
            std::string speaker = collapse_ws(trimmed.substr(0, colon));
            std::string utterance = clean_quote_text(trimmed.substr(colon + 1));
            lines.emplace_back(speaker, utterance);
            any_speaker = true;
        } else if (!lines.empty()) {
            // Wrapped continuation of the previous utterance.
            std::string cont = clean_quote_text(trimmed);
            if (!cont.empty()) lines.back().second += (lines.back().second.empty() ? "" : " ") + cont;
        } else {
            lines.emplace_back(std::nullopt, clean_quote_text(trimmed));
        }
    }

    if (!any_speaker) {
        // Whole block is one speakerless quote.
        std::string all;
        for (const auto& [_, text] : lines) {
            if (!all.empty()) all += " ";
            all += text;
        }
        if (!all.empty()) {
            Quote q;
            q.text = all;
            q.char_len = static_cast<int>(all.size());
            quotes.push_back(std::move(q));
        }
        return quotes;
    }

    for (auto& [speaker, text] : lines) {
        if (text.empty()) continue;
        Quote q;
        q.speaker = speaker;
        q.text = text;
        q.char_len = static_cast<int>(text.size());
        quotes.push_back(std::move(q));
    }
    return quotes;
}

RuleBasedCompleteness::RuleBasedCompleteness()
    : RuleBasedCompleteness(load_word_set(share_dir() / "subject_lexicon.txt"),
                            load_word_set(share_dir() / "verb_lexicon.txt")) {}

RuleBasedCompleteness::RuleBasedCompleteness(std::set<std::string> subjects,
                                             std::set<std::string> verbs)
    : subjects_(std::move(subjects)), verbs_(std::move(verbs)) {}

bool RuleBasedCompleteness::is_complete(const std::string& text) const {
    // 're/'s/'m/'ll/'ve/'d plus negated auxiliaries (don't, can't).
    static const std::set<std::string> verb_suffixes = {"re", "s", "m", "ll", "ve", "d", "t"};
    bool has_subject = false, has_verb = false;
    for (const auto& token : word_tokens(text)) {
        std::string base = token;
        if (auto apo = token.find('\''); apo != std::string::npos) {
            base = token.substr(0, apo);
            if (verb_suffixes.count(token.substr(apo + 1))) has_verb = true;
        }
        if (subjects_.count(base) || subjects_.count(token)) has_subject = true;
        if (verbs_.count(base) || verbs_.count(token)) has_verb = true;
        if (has_subject && has_verb) return true;
    }
    return false;
}

LexiconSentiment::LexiconSentiment() {
    auto path = share_dir() / "sentiment_lexicon.txt";
    std::ifstream in(path);
    if (!in) fail(errc::io, fmt::format("cannot open lexicon {}", path.string()));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) continue;
        entries_.emplace_back(lower(line.substr(0, tab)), std::stod(line.substr(tab + 1)));
    }
}

LexiconSentiment::LexiconSentiment(std::vector<std::pair<std::string, double>> entries)
    : entries_(std::move(entries)) {}

double LexiconSentiment::score(const std::string& text) const {
    auto tokens = word_tokens(text);
    double sum = 0;
    int hits = 0;
    for (const auto& token : tokens) {
        for (const auto& [word, value] : entries_) {
            if (token == word) {
                sum += value;
                hits++;
                break;
            }
        }
    }
    if (hits == 0) return 0;
    return std::clamp(sum / hits, -1.0, 1.0);
}

std::vector<Quote> filter_and_rank_quotes(const std::vector<Quote>& quotes,
                                          const CompletenessAnalyzer& completeness,
                                          const SentimentAnalyzer& sentiment,
                                          const QuoteFilterParams& params,
                                          const WarningSink& warn) {
    auto report = [&](const std::string& msg) {
        if (warn) warn(msg);
        else log::warn("{}", msg);
    };

    std::vector<Quote> kept;
    for (const Quote& q : quotes) {
        Quote cleaned = q;
        cleaned.text = clean_quote_text(q.text);
        cleaned.char_len = static_cast<int>(cleaned.text.size());
        if (cleaned.char_len < params.min_chars || cleaned.char_len > params.max_chars) continue;
        try {
            if (!completeness.is_complete(cleaned.text)) continue;
            cleaned.sentiment = sentiment.score(cleaned.text);
        } catch (const std::exception& e) {
            report(fmt::format("analyzer failed on quote '{}': {}", cleaned.text, e.what()));
            continue;
        }
        if (std::abs(cleaned.sentiment) < params.sentiment_threshold) continue;
        kept.push_back(std::move(cleaned));
    }

    std::stable_sort(kept.begin(), kept.end(), [](const Quote& a, const Quote& b) {
        if (a.char_len != b.char_len) return a.char_len < b.char_len;
        return a.text < b.text;
    });
    if (kept.size() > params.max_quotes) kept.resize(params.max_quotes);
    return kept;
}

double gestalt_similarity(std::string_view a, std::string_view b) {
    if (a.empty() && b.empty()) return 1.0;
    size_t m = matched_chars(a, b, 0, a.size(), 0, b.size());
    return 2.0 * static_cast<double>(m) / static_cast<double>(a.size() + b.size());
}

std::string normalize_for_match(const std::string& text) {
    std::string spaced;
    spaced.reserve(text.size());
    for (char c : text) {
        auto uc = static_cast<unsigned char>(c);
        if (std::isalnum(uc)) spaced.push_back(static_cast<char>(std::tolower(uc)));
        else spaced.push_back(' ');
    }
    return collapse_ws(spaced);
}

std::optional<AlignedQuote> align_quote(const Quote& quote,
                                        const std::vector<TranscriptSegment>& segments,
                                        const AlignParams& params) {
    if (segments.empty()) return std::nullopt;
    const std::string target = normalize_for_match(quote.text);
    if (target.empty()) return std::nullopt;

    std::vector<std::string> norm(segments.size());
    for (size_t i = 0; i < segments.size(); ++i) norm[i] = normalize_for_match(segments[i].text);

    double best_ratio = -1;
    size_t best_start = 0;
    int best_window = 0;
    for (size_t i = 0; i < segments.size(); ++i) {
        std::string window_text;
        for (int w = 1; w <= params.max_window && i + w <= segments.size(); ++w) {
            if (w > 1 && !window_text.empty() && !norm[i + w - 1].empty()) window_text += " ";
            window_text += norm[i + w - 1];
            double ratio = gestalt_similarity(target, window_text);
            if (ratio > best_ratio + 1e-12) {
                best_ratio = ratio;
                best_start = i;
                best_window = w;
            }
            // Ties keep the earliest window (and the fewest segments).
        }
    }
    if (best_window == 0 || best_ratio < params.min_ratio) return std::nullopt;
    AlignedQuote out;
    out.quote = quote;
    out.similarity = best_ratio;
    out.interval = Interval{segments[best_start].interval.start_s,
                            segments[best_start + static_cast<size_t>(best_window) - 1].interval.end_s};
    return out;
}

std::optional<Interval> refine_with_vad(Interval interval, const std::vector<Interval>& speech,
                                        const VadRefineParams& params) {
    interval.validate();
    double lo = 0, hi = 0;
    bool any = false;
    for (const Interval& s : speech) {
        if (s.end_s <= interval.start_s || s.start_s >= interval.end_s) continue;
        if (!any) {
            lo = s.start_s;
            hi = s.end_s;
            any = true;
        } else {
            lo = std::min(lo, s.start_s);
            hi = std::max(hi, s.end_s);
        }
    }
    if (!any) return std::nullopt;

    lo -= params.pad_s;
    hi += params.pad_s;
    lo = std::max({lo, interval.start_s - params.neighborhood_s, 0.0});
    hi = std::min(hi, interval.end_s + params.neighborhood_s);
    if (hi - lo > params.max_len_s) return std::nullopt;
    if (hi <= lo) return std::nullopt;
    return Interval{lo, hi};
}

} // namespace trailforge
