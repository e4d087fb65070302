#include "trailforge/textproc.hpp"

#include "trailforge/errors.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace trailforge;

namespace {

const char* kFrodoBlock =
    "Frodo: \"You're late.\"\n"
    "Gandalf: \"A wizard is never late, Frodo Baggins. Nor is he early. He arrives precisely "
    "when he means to.\"";

RuleBasedCompleteness test_completeness() {
    return RuleBasedCompleteness({"i", "you", "we", "they", "he", "she", "it", "a", "an", "the",
                                  "there"},
                                 {"is", "are", "was", "run", "fear", "love", "hate", "need"});
}

LexiconSentiment test_sentiment() {
    return LexiconSentiment({{"late", -0.3},
                             {"love", 0.7},
                             {"hate", -0.7},
                             {"fear", -0.5},
                             {"hope", 0.5},
                             {"danger", -0.5},
                             {"storm", -0.3},
                             {"mild", 0.05}});
}

} // namespace

TEST_CASE("quote block parsing separates speakers") {
    auto quotes = parse_quote_block(kFrodoBlock);
    REQUIRE(quotes.size() == 2);
    CHECK(quotes[0].speaker == "Frodo");
    CHECK(quotes[0].text == "You're late.");
    CHECK(quotes[0].char_len == 12);
    CHECK(quotes[1].speaker == "Gandalf");
    CHECK(quotes[1].text.rfind("A wizard is never late", 0) == 0);
}

TEST_CASE("untagged block becomes a single speakerless quote") {
    auto quotes = parse_quote_block("Just a bare sentence without a tag.");
    REQUIRE(quotes.size() == 1);
    CHECK(!quotes[0].speaker.has_value());
    CHECK(quotes[0].text == "Just a bare sentence without a tag.");

    CHECK(parse_quote_block("").empty());
    CHECK(parse_quote_block("  \n \n").empty());
}

TEST_CASE("wrapped speaker lines continue the utterance") {
    auto quotes = parse_quote_block("Sam: \"I made a promise,\n   a promise to keep.\"");
    REQUIRE(quotes.size() == 1);
    CHECK(quotes[0].text == "I made a promise, a promise to keep.");
}

TEST_CASE("filter cascade: gates, ordering, truncation") {
    auto completeness = test_completeness();
    auto sentiment = test_sentiment();

    SUBCASE("boundary length and completeness") {
        std::vector<Quote> quotes;
        quotes.push_back({std::nullopt, "You're late.", 12, 0});   // exactly 12 chars
        quotes.push_back({std::nullopt, "Run.", 4, 0});            // below the gate
        auto out = filter_and_rank_quotes(quotes, completeness, sentiment);
        REQUIRE(out.size() == 1);
        CHECK(out[0].text == "You're late.");
        CHECK(out[0].sentiment == doctest::Approx(-0.3));
    }

    SUBCASE("sentiment threshold") {
        std::vector<Quote> quotes;
        quotes.push_back({std::nullopt, "It is a mild day today.", 0, 0});  // |0.05| < 0.1
        auto out = filter_and_rank_quotes(quotes, completeness, sentiment);
        CHECK(out.empty());
    }

    SUBCASE("truncation to the 200 shortest, sorted ascending") {
        std::vector<Quote> quotes;
        for (int i = 0; i < 250; ++i) {
            // Lengths vary via padding; all complete and emotional.
            std::string text = "I fear the storm";
            text += std::string(static_cast<size_t>(i % 60), 'x');
            text += ".";
            quotes.push_back({std::nullopt, text, 0, 0});
        }
        auto out = filter_and_rank_quotes(quotes, completeness, sentiment);
        REQUIRE(out.size() == 200);
        for (size_t i = 1; i < out.size(); ++i) CHECK(out[i - 1].char_len <= out[i].char_len);
        for (const auto& q : out) {
            CHECK(q.char_len >= 12);
            CHECK(q.char_len <= 80);
            CHECK(std::abs(q.sentiment) >= 0.1);
        }
    }
}

TEST_CASE("analyzer failure skips the quote with a warning") {
    struct Exploding : CompletenessAnalyzer {
        bool is_complete(const std::string& text) const override {
            if (text.find("boom") != std::string::npos)
                fail(errc::internal, "analyzer exploded");
            return true;
        }
    };
    Exploding completeness;
    auto sentiment = test_sentiment();
    std::vector<Quote> quotes;
    quotes.push_back({std::nullopt, "I fear the boom today.", 0, 0});
    quotes.push_back({std::nullopt, "I fear the storm today.", 0, 0});
    std::vector<std::string> warnings;
    auto out = filter_and_rank_quotes(quotes, completeness, sentiment, {},
                                      [&](const std::string& w) { warnings.push_back(w); });
    REQUIRE(out.size() == 1);
    CHECK(out[0].text == "I fear the storm today.");
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("exploded") != std::string::npos);
}

TEST_CASE("gestalt similarity basics") {
    CHECK(gestalt_similarity("same text", "same text") == doctest::Approx(1.0));
    CHECK(gestalt_similarity("abc", "xyz") == doctest::Approx(0.0));
    CHECK(gestalt_similarity("", "") == doctest::Approx(1.0));
    CHECK(gestalt_similarity("", "abc") == doctest::Approx(0.0));
    // 2*2/6, frozen from the exhaustive-recursion oracle.
    CHECK(oracle::gestalt_ratio("abc", "abd") == doctest::Approx(2.0 * 2 / 6).epsilon(1e-12));
    CHECK(gestalt_similarity("abc", "abd") == doctest::Approx(2.0 * 2 / 6).epsilon(1e-9));
}

TEST_CASE("gestalt similarity is symmetric and matches the oracle on short {a,b} strings") {
    std::vector<std::string> all;
    all.emplace_back("");
    for (int len = 1; len <= 6; ++len) {
        for (int bits = 0; bits < (1 << len); ++bits) {
            std::string s;
            for (int i = 0; i < len; ++i) s.push_back((bits >> i) & 1 ? 'b' : 'a');
            all.push_back(std::move(s));
        }
    }
    // Spot symmetry on a sample, exact oracle equality on a denser grid.
    for (size_t i = 0; i < all.size(); i += 7)
        for (size_t j = 0; j < all.size(); j += 11)
            CHECK(gestalt_similarity(all[i], all[j]) ==
                  doctest::Approx(gestalt_similarity(all[j], all[i])).epsilon(1e-12));
    for (size_t i = 0; i < all.size(); i += 3) {
        for (size_t j = 0; j < all.size(); j += 5) {
            CAPTURE(all[i]);
            CAPTURE(all[j]);
            CHECK(gestalt_similarity(all[i], all[j]) ==
                  doctest::Approx(oracle::gestalt_ratio(all[i], all[j])).epsilon(1e-12));
        }
    }
}

TEST_CASE("alignment finds the verbatim segment at ratio 1") {
    std::vector<TranscriptSegment> segments = {
        {{0.0, 2.0}, "some earlier words"},
        {{10.0, 13.0}, "You're in danger now"},
        {{20.0, 22.0}, "unrelated chatter"},
    };
    Quote q{std::nullopt, "You're in danger now.", 21, 0};
    auto aligned = align_quote(q, segments);
    REQUIRE(aligned.has_value());
    CHECK(aligned->similarity == doctest::Approx(1.0));
    CHECK(aligned->interval.start_s == doctest::Approx(10.0));
    CHECK(aligned->interval.end_s == doctest::Approx(13.0));
}

TEST_CASE("alignment tolerates transcription noise (latte case)") {
    std::vector<TranscriptSegment> segments = {
        {{5.0, 8.0}, "a wizard is never latte"},
    };
    Quote q{std::nullopt, "A wizard is never late", 22, 0};
    auto aligned = align_quote(q, segments);
    REQUIRE(aligned.has_value());
    // Frozen from the oracle-validated matcher: 2*22/(23+22).
    CHECK(aligned->similarity == doctest::Approx(44.0 / 45.0).epsilon(1e-9));
    CHECK(aligned->similarity > 0.9);
}

TEST_CASE("alignment respects the ratio threshold and window cap") {
    std::vector<TranscriptSegment> segments = {
        {{0.0, 2.0}, "alpha beta"},
        {{2.0, 4.0}, "gamma delta"},
    };
    Quote q{std::nullopt, "totally different words here", 28, 0};
    CHECK(!align_quote(q, segments).has_value());

    // A quote spanning two segments is matched by a 2-wide window.
    Quote spanning{std::nullopt, "alpha beta gamma delta", 22, 0};
    auto aligned = align_quote(spanning, segments);
    REQUIRE(aligned.has_value());
    CHECK(aligned->interval.start_s == doctest::Approx(0.0));
    CHECK(aligned->interval.end_s == doctest::Approx(4.0));
    CHECK(aligned->similarity >= 0.8);
}

TEST_CASE("VAD refinement") {
    SUBCASE("pads and keeps the bounding speech") {
        auto refined = refine_with_vad(Interval{10, 13}, {Interval{10.2, 12.8}});
        REQUIRE(refined.has_value());
        CHECK(refined->start_s == doctest::Approx(10.05));
        CHECK(refined->end_s == doctest::Approx(12.95));
    }
    SUBCASE("rejects when over 12 s") {
        CHECK(!refine_with_vad(Interval{10, 23}, {Interval{10.0, 22.6}}).has_value());
    }
    SUBCASE("rejects without intersecting speech") {
        CHECK(!refine_with_vad(Interval{10, 13}, {Interval{20, 21}}).has_value());
        CHECK(!refine_with_vad(Interval{10, 13}, {}).has_value());
    }
    SUBCASE("accepted output is bounded and contains speech") {
        auto refined = refine_with_vad(Interval{100, 108}, {Interval{99.5, 103}, {105, 107.5}});
        REQUIRE(refined.has_value());
        CHECK(refined->length() <= 12.0);
        CHECK(refined->start_s >= 99.0);  // clamped to the +-1 s neighborhood
        CHECK(refined->end_s <= 109.0);
    }
}
