#pragma once

// Offline stand-in for the tweet feeds: a seeded two-class document
// generator.  Class 1 leans on an opinion lexicon, class 2 on a
// news/factual lexicon, both share a common lexicon, stopwords, URLs,
// punctuation and random uppercasing for texture, plus a long tail of
// niche "tag<i>" tokens so large vocabularies stay meaningful.
// Within each lexicon, word ranks follow a 1/rank (Zipf) weighting.

#include <cstdint>
#include <string>
#include <vector>

namespace amlab::textgen {

struct CorpusSpec {
    std::size_t n_docs = 100;
    double class1_fraction = 0.5;
    std::size_t min_tokens = 8;
    std::size_t max_tokens = 18;

    // Per-token category probabilities; the remainder goes to the
    // niche tail.  other_prob is the class-overlap knob: higher means
    // the classes blur together and every classifier gets worse.
    double stop_prob = 0.30;
    double shared_prob = 0.25;
    double own_prob = 0.30;
    double other_prob = 0.08;

    double url_prob = 0.10;    // per document
    double punct_prob = 0.15;  // per token, trailing punctuation
    double upper_prob = 0.05;  // per token, full uppercase
    std::size_t niche_words = 1200;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SyntheticCorpus {
    std::vector<std::string> documents;
    std::vector<int> labels;  // parallel to documents
};

// Deterministic per spec.seed.  Documents are emitted class-1 block
// first, then class-2.
SyntheticCorpus generate_corpus(const CorpusSpec& spec);

// The fixed lexicons, strongest (most frequent) word first.
const std::vector<std::string>& subjective_lexicon();
const std::vector<std::string>& objective_lexicon();
const std::vector<std::string>& shared_lexicon();

}  // namespace amlab::textgen
