#include "trailforge/project.hpp"

#include "trailforge/errors.hpp"
#include "trailforge/hashing.hpp"

#include "../support/fixtures.hpp"

#include <doctest.h>

#include <regex>

using namespace trailforge;

TEST_CASE("config round-trips through save/load") {
    fixtures::TempDir tmp("config");
    ProjectConfig c;
    c.movie_path = "movie.mp4";
    c.project_name = "demo";
    c.clip_len_min_s = 3;
    c.clip_len_max_s = 8;
    c.seed = 42;
    save_config(c, tmp.path() / "config.json");
    ProjectConfig back = load_config(tmp.path() / "config.json");
    CHECK(back.movie_path == c.movie_path);
    CHECK(back.clip_len_min_s == doctest::Approx(3));
    CHECK(back.clip_len_max_s == doctest::Approx(8));
    CHECK(back.seed == 42);
    CHECK(back.head_trim_frac == doctest::Approx(0.04));
    CHECK(back.tail_trim_frac == doctest::Approx(0.10));
}

TEST_CASE("config invariants name the offending field") {
    ProjectConfig c;
    c.movie_path = "m.mp4";
    c.project_name = "p";

    c.clip_len_min_s = 8;
    c.clip_len_max_s = 3;
    CHECK_THROWS_WITH_AS(c.validate(), "clip_len_min_s must be < clip_len_max_s", Error);

    c.clip_len_min_s = 3;
    c.clip_len_max_s = 8;
    c.head_trim_frac = 0.6;
    c.tail_trim_frac = 0.5;
    CHECK_THROWS_WITH_AS(c.validate(), "trim fractions exceed timeline", Error);

    c.head_trim_frac = 0.35;
    c.tail_trim_frac = 0.1;
    CHECK_THROWS_WITH_AS(c.validate(), "head_trim_frac must lie in [0, 0.3]", Error);

    c.head_trim_frac = 0.3;
    c.tail_trim_frac = 0.3;
    CHECK_NOTHROW(c.validate());

    c.duck_db = 1.0;
    CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("metadata ingestion") {
    fixtures::TempDir tmp("meta");
    const std::string frodo_block =
        "Frodo: \"You're late.\"\n"
        "Gandalf: \"A wizard is never late, Frodo Baggins. Nor is he early. He arrives "
        "precisely when he means to.\"";

    json j;
    j["title"] = "T";
    j["synopsis"] = "A tale.";
    j["quotes"] = json::array({frodo_block});
    save_json(tmp.path() / "metadata.json", j);

    MovieMetadata m = ingest_metadata(tmp.path() / "metadata.json");
    REQUIRE(m.quote_blocks.size() == 1);
    CHECK(m.quote_blocks[0] == frodo_block);  // retained verbatim
    CHECK(m.genres.empty());
    CHECK(m.directors.empty());

    json no_synopsis;
    no_synopsis["title"] = "T";
    save_json(tmp.path() / "bad.json", no_synopsis);
    CHECK_THROWS_AS(ingest_metadata(tmp.path() / "bad.json"), Error);

    json blank;
    blank["title"] = "T";
    blank["synopsis"] = "   \n ";
    save_json(tmp.path() / "blank.json", blank);
    CHECK_THROWS_AS(ingest_metadata(tmp.path() / "blank.json"), Error);
}

namespace {

RedactionLexicon paper_lexicon() {
    RedactionLexicon lex;
    lex.terms = {"killed", "cadaver", "corpse"};
    return lex;
}

// Word-boundary regex oracle for redaction.
std::string regex_redact(const std::string& text, const RedactionLexicon& lex) {
    std::string out = text;
    for (const auto& term : lex.terms) {
        std::regex re("\\b" + term + "\\b", std::regex::icase);
        out = std::regex_replace(out, re, lex.replacement);
    }
    return out;
}

} // namespace

TEST_CASE("redaction replaces whole words case-insensitively") {
    auto lex = paper_lexicon();
    CHECK(redact_text("He killed the guard", lex) == "He REDACTED the guard");
    CHECK(redact_text("nothing to see here", lex) == "nothing to see here");
    CHECK(redact_text("Killed? The skilled man.", lex) == "REDACTED? The skilled man.");
}

TEST_CASE("redaction matches the word-boundary regex oracle on random text") {
    auto lex = paper_lexicon();
    const std::vector<std::string> vocab = {"killed",  "Killed", "skilled", "corpse", "CORPSE",
                                            "corpses", "guard",  "the",     "a",      "cadaver!",
                                            "cadaver", "kill"};
    SplitMix64 rng(2024);
    for (int round = 0; round < 200; ++round) {
        std::string text;
        int words = 1 + static_cast<int>(rng.next() % 12);
        for (int w = 0; w < words; ++w) {
            if (w) text += (rng.next() % 4 == 0) ? ", " : " ";
            text += vocab[rng.next() % vocab.size()];
        }
        CAPTURE(text);
        CHECK(redact_text(text, lex) == regex_redact(text, lex));
    }
}

TEST_CASE("redaction is idempotent and preserves token counts") {
    auto lex = paper_lexicon();
    auto count_tokens = [](const std::string& s) {
        int n = 0;
        bool in = false;
        for (char c : s) {
            bool word = std::isalnum(static_cast<unsigned char>(c)) || c == '_';
            if (word && !in) ++n;
            in = word;
        }
        return n;
    };
    const std::string text = "The corpse and the cadaver were killed near the corpse.";
    std::string once = redact_text(text, lex);
    CHECK(redact_text(once, lex) == once);
    CHECK(count_tokens(once) == count_tokens(text));
}

TEST_CASE("bundled redaction lexicon covers the canonical three terms") {
    auto lex = RedactionLexicon::bundled();
    CHECK(lex.terms.count("killed"));
    CHECK(lex.terms.count("cadaver"));
    CHECK(lex.terms.count("corpse"));
    CHECK(lex.replacement == "REDACTED");
}
