#pragma once

#include "trailforge/mediaio.hpp"

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace trailforge {

struct Quote {
    std::optional<std::string> speaker;
    std::string text;       // cleaned: no surrounding quote marks, collapsed whitespace
    int char_len = 0;       // length of `text`
    double sentiment = 0;   // filled by the filter pass
};

struct TranscriptSegment {
    Interval interval;
    std::string text;
};

struct AlignedQuote {
    Quote quote;
    Interval interval;
    double similarity = 0;
};

// IMDb-style block: lines of `Name: "utterance"`. Untagged lines continue
// the previous utterance; a block with no speaker tags becomes one
// speakerless quote.
std::vector<Quote> parse_quote_block(const std::string& raw);

std::string clean_quote_text(const std::string& raw);

class CompletenessAnalyzer {
public:
    virtual ~CompletenessAnalyzer() = default;
    virtual bool is_complete(const std::string& text) const = 0;
};

class SentimentAnalyzer {
public:
    virtual ~SentimentAnalyzer() = default;
    virtual double score(const std::string& text) const = 0;  // [-1, 1]
};

// Needs one nominative token and one finite verb, both from bundled
// lexicons; contractions ("you're") count for both sides.
class RuleBasedCompleteness : public CompletenessAnalyzer {
public:
    RuleBasedCompleteness();  // loads share/trailforge lexicons
    RuleBasedCompleteness(std::set<std::string> subjects, std::set<std::string> verbs);
    bool is_complete(const std::string& text) const override;

private:
    std::set<std::string> subjects_;
    std::set<std::string> verbs_;
};

class LexiconSentiment : public SentimentAnalyzer {
public:
    LexiconSentiment();
    explicit LexiconSentiment(std::vector<std::pair<std::string, double>> entries);
    double score(const std::string& text) const override;

private:
    std::vector<std::pair<std::string, double>> entries_;
};

struct QuoteFilterParams {
    int min_chars = 12;
    int max_chars = 80;
    double sentiment_threshold = 0.1;
    size_t max_quotes = 200;
};

using WarningSink = std::function<void(const std::string&)>;

// Cascade: clean, length gate [12,80], completeness, |sentiment| >= theta,
// sort ascending by length (ties lexicographic), cap at 200.
std::vector<Quote> filter_and_rank_quotes(const std::vector<Quote>& quotes,
                                          const CompletenessAnalyzer& completeness,
                                          const SentimentAnalyzer& sentiment,
                                          const QuoteFilterParams& params = {},
                                          const WarningSink& warn = {});

// Ratcliff-Obershelp: 2M/(|a|+|b|) with M summed over the recursive
// longest-common-substring decomposition (ties: earliest in a, then b).
double gestalt_similarity(std::string_view a, std::string_view b);

// Lowercase, punctuation to spaces, whitespace collapsed.
std::string normalize_for_match(const std::string& text);

struct AlignParams {
    double min_ratio = 0.8;
    int max_window = 5;
};

std::optional<AlignedQuote> align_quote(const Quote& quote,
                                        const std::vector<TranscriptSegment>& segments,
                                        const AlignParams& params = {});

struct VadRefineParams {
    double pad_s = 0.15;
    double neighborhood_s = 1.0;  // clamp to input +/- this
    double max_len_s = 12.0;
};

std::optional<Interval> refine_with_vad(Interval interval, const std::vector<Interval>& speech,
                                        const VadRefineParams& params = {});

} // namespace trailforge
