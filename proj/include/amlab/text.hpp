#pragma once

#include <cstddef>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "amlab/dataset.hpp"

namespace amlab::text {

using TokenList = std::vector<std::string>;
using StopWords = std::unordered_set<std::string>;

// The bundled stop-word list (see data/stopwords.txt, which mirrors it).
const std::vector<std::string>& default_stopwords();
StopWords default_stopword_set();
StopWords load_stopword_file(const std::string& path);

// Lowercase, drop URL tokens (starting with "http" or containing "://"),
// strip punctuation characters, split on whitespace, drop stop words.
TokenList clean_text(const std::string& raw, const StopWords& stopwords);

// Top-k words of a corpus ordered by descending frequency, ties broken
// lexicographically ascending.
struct Vocabulary {
    std::vector<std::string> words;
    std::vector<std::size_t> frequencies;

    std::size_t size() const { return words.size(); }
};

Vocabulary build_vocab(const std::vector<TokenList>& corpus, std::size_t k);

// counts[i] = occurrences of vocab word i; out-of-vocabulary tokens ignored.
Features featurize(const TokenList& tokens, const Vocabulary& vocab);

// Descending (word, count) pairs; same ordering rule as build_vocab.
std::vector<std::pair<std::string, std::size_t>> token_frequency_report(
    const std::vector<TokenList>& corpus, std::size_t top_n);

// One "word count" pair per line.
void save_vocabulary(const Vocabulary& vocab, const std::string& path);
Vocabulary load_vocabulary(const std::string& path);

}  // namespace amlab::text
