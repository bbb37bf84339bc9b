#include "amlab/text.hpp"

namespace amlab::text {

// Fixed list, version 1. data/stopwords.txt ships the same words; the test
// suite pins the two against each other.
const std::vector<std::string>& default_stopwords() {
    static const std::vector<std::string> words = {
        "a",      "about",  "after",   "again",  "all",    "am",    "an",    "and",
        "any",    "are",    "as",      "at",     "be",     "been",  "before", "being",
        "but",    "by",     "can",     "could",  "did",    "do",    "does",  "doing",
        "down",   "during", "each",    "few",    "for",    "from",  "further", "had",
        "has",    "have",   "having",  "he",     "her",    "here",  "hers",  "him",
        "his",    "how",    "i",       "if",     "in",     "into",  "is",    "it",
        "its",    "just",   "me",      "more",   "most",   "my",    "no",    "nor",
        "not",    "now",    "of",      "off",    "on",     "once",  "only",  "or",
        "other",  "our",    "out",     "over",   "own",    "s",     "same",  "she",
        "should", "so",     "some",    "such",   "t",      "than",  "that",  "the",
        "their",  "them",   "then",    "there",  "these",  "they",  "this",  "those",
        "through", "to",    "too",     "under",  "until",  "up",    "very",  "was",
        "we",     "were",   "what",    "when",   "where",  "which", "while", "who",
        "whom",   "why",    "will",    "with",   "you",    "your",
    };
    return words;
}

StopWords default_stopword_set() {
    const auto& words = default_stopwords();
    return StopWords(words.begin(), words.end());
}

}  // namespace amlab::text
