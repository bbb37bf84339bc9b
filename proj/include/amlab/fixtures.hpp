#pragma once

// Builds the bundled offline fixture set: four disjoint synthetic
// corpora (target training, adversary query pool, shared test set,
// causative/evasion candidates), one vocabulary over all of them, a
// word-frequency report, and featurized datasets with ground-truth
// labels.  Everything is a pure function of the spec, so reruns are
// byte-identical.

#include <cstdint>
#include <string>
#include <vector>

#include "amlab/textgen.hpp"

namespace amlab::fixtures {

struct FixtureSpec {
    std::size_t vocab_k = 50;
    std::size_t n_target_train = 2000;
    std::size_t n_pool = 3000;
    std::size_t n_test = 500;
    std::size_t n_candidates = 1000;
    std::size_t report_top = 25;
    // Class-overlap knob forwarded to the corpus generator.
    double other_prob = 0.08;
    std::uint64_t seed = 0;

    void validate() const;
};

struct FixturePaths {
    std::string vocab;             // vocab.txt
    std::string frequency_report;  // frequency_report.txt
    std::string target_train;      // target_train.jsonl
    std::string pool;              // pool.jsonl
    std::string test;              // test.jsonl
    std::string candidates;        // candidates.jsonl
    std::vector<std::string> corpus_files;  // <role>_{subjective,objective}.txt
};

// Writes all fixture files under out_dir (created if missing) and
// returns their paths.
FixturePaths make_fixtures(const std::string& out_dir, const FixtureSpec& spec);

}  // namespace amlab::fixtures
