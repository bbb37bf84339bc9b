#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <string>

#include "amlab/text.hpp"

using namespace amlab;
using text::TokenList;

TEST_CASE("clean_text lowercases, strips punctuation, drops urls and stop words") {
    text::StopWords stop = {"the", "a", "is"};
    TokenList tokens = text::clean_text("The movie IS great! http://t.co/ab12cd a classic.", stop);
    REQUIRE(tokens.size() == 3);
    CHECK(tokens[0] == "movie");
    CHECK(tokens[1] == "great");
    CHECK(tokens[2] == "classic");

    CHECK(text::clean_text("", stop).empty());
    CHECK(text::clean_text("   \t \n ", stop).empty());
    CHECK(text::clean_text("!!! ... ??", stop).empty());
    CHECK(text::clean_text("https://example.com/x?q=1", stop).empty());

    // punctuation inside a token goes away, the rest of the token stays
    TokenList t2 = text::clean_text("don't stop-me now", {});
    REQUIRE(t2.size() == 3);
    CHECK(t2[0] == "dont");
    CHECK(t2[1] == "stopme");
    CHECK(t2[2] == "now");
}

TEST_CASE("default stop-word list matches the shipped file") {
    const auto& words = text::default_stopwords();
    CHECK(words.size() == 110);
    text::StopWords from_file =
        text::load_stopword_file(std::string(AMLAB_DATA_DIR) + "/stopwords.txt");
    CHECK(from_file.size() == words.size());
    for (const std::string& w : words) CHECK(from_file.count(w) == 1);

    text::StopWords set = text::default_stopword_set();
    CHECK(set.size() == words.size());
    CHECK(set.count("the") == 1);
    CHECK(set.count("movie") == 0);
}

TEST_CASE("load_stopword_file rejects missing paths") {
    CHECK_THROWS_AS(text::load_stopword_file("/nonexistent/stopwords.txt"), IoError);
}

TEST_CASE("vocabulary ranks by count desc then word asc") {
    std::vector<TokenList> corpus = {
        {"apple", "banana", "apple"},
        {"cherry", "banana", "apple"},
        {"cherry", "date"},
    };
    text::Vocabulary v = text::build_vocab(corpus, 3);
    REQUIRE(v.size() == 3);
    CHECK(v.words[0] == "apple");   // 3
    CHECK(v.words[1] == "banana");  // 2, ties with cherry, earlier alphabetically
    CHECK(v.words[2] == "cherry");  // 2
    CHECK(v.frequencies[0] == 3);
    CHECK(v.frequencies[1] == 2);
    CHECK(v.frequencies[2] == 2);

    CHECK_THROWS_AS(text::build_vocab(corpus, 5), ValidationError);  // only 4 distinct
    CHECK_THROWS_AS(text::build_vocab(corpus, 0), ValidationError);
}

TEST_CASE("featurize counts vocabulary words and ignores the rest") {
    text::Vocabulary v;
    v.words = {"apple", "banana", "cherry"};
    v.frequencies = {3, 2, 2};
    Features f = text::featurize({"apple", "durian", "apple", "cherry"}, v);
    REQUIRE(f.size() == 3);
    CHECK(f[0] == 2.0);
    CHECK(f[1] == 0.0);
    CHECK(f[2] == 1.0);

    CHECK(text::featurize({}, v) == Features({0.0, 0.0, 0.0}));
}

TEST_CASE("frequency report is sorted and truncated") {
    std::vector<TokenList> corpus = {
        {"x", "y", "x", "z"},
        {"y", "x"},
    };
    auto report = text::token_frequency_report(corpus, 2);
    REQUIRE(report.size() == 2);
    CHECK(report[0].first == "x");
    CHECK(report[0].second == 3);
    CHECK(report[1].first == "y");
    CHECK(report[1].second == 2);

    auto full = text::token_frequency_report(corpus, 100);
    CHECK(full.size() == 3);

    CHECK_THROWS_AS(text::token_frequency_report({}, 5), ValidationError);
    CHECK_THROWS_AS(text::token_frequency_report({TokenList{}}, 5), ValidationError);
}

TEST_CASE("vocabulary files round-trip") {
    text::Vocabulary v;
    v.words = {"alpha", "beta", "gamma"};
    v.frequencies = {30, 20, 10};
    auto path = std::filesystem::temp_directory_path() / "amlab_test_vocab.txt";
    text::save_vocabulary(v, path.string());
    text::Vocabulary back = text::load_vocabulary(path.string());
    CHECK(back.words == v.words);
    CHECK(back.frequencies == v.frequencies);
    std::filesystem::remove(path);

    CHECK_THROWS_AS(text::load_vocabulary("/nonexistent/vocab.txt"), IoError);
}
