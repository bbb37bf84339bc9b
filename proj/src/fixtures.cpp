#include "amlab/fixtures.hpp"

#include <filesystem>
#include <fstream>

#include "amlab/dataset.hpp"
#include "amlab/errors.hpp"
#include "amlab/rng.hpp"
#include "amlab/text.hpp"

namespace amlab::fixtures {

namespace fs = std::filesystem;

void FixtureSpec::validate() const {
    if (vocab_k == 0) throw ValidationError("fixtures: vocab_k must be >= 1");
    if (n_target_train == 0 || n_pool == 0 || n_test == 0 || n_candidates == 0)
        throw ValidationError("fixtures: every role needs at least one document");
}

namespace {

struct Role {
    const char* name;
    std::size_t count;
    std::uint64_t stream;
};

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    for (const auto& line : lines) out << line << '\n';
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace

FixturePaths make_fixtures(const std::string& out_dir, const FixtureSpec& spec) {
    spec.validate();
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create directory " + out_dir + ": " + ec.message());

    const Role roles[] = {
        {"target_train", spec.n_target_train, 1},
        {"pool", spec.n_pool, 2},
        {"test", spec.n_test, 3},
        {"candidates", spec.n_candidates, 4},
    };

    const auto stopset = text::default_stopword_set();
    FixturePaths paths;

    // Generate every role first: the vocabulary spans all of them.
    std::vector<textgen::SyntheticCorpus> corpora;
    std::vector<std::vector<text::TokenList>> cleaned;
    std::vector<text::TokenList> all_tokens;
    for (const Role& role : roles) {
        textgen::CorpusSpec cs;
        cs.n_docs = role.count;
        cs.other_prob = spec.other_prob;
        cs.seed = Rng::derive(spec.seed, role.stream);
        corpora.push_back(textgen::generate_corpus(cs));
        const auto& corpus = corpora.back();

        std::vector<std::string> subjective, objective;
        for (std::size_t i = 0; i < corpus.documents.size(); ++i)
            (corpus.labels[i] == 1 ? subjective : objective)
                .push_back(corpus.documents[i]);
        std::string subj_path =
            (fs::path(out_dir) / (std::string(role.name) + "_subjective.txt")).string();
        std::string obj_path =
            (fs::path(out_dir) / (std::string(role.name) + "_objective.txt")).string();
        write_lines(subj_path, subjective);
        write_lines(obj_path, objective);
        paths.corpus_files.push_back(subj_path);
        paths.corpus_files.push_back(obj_path);

        cleaned.emplace_back();
        cleaned.back().reserve(corpus.documents.size());
        for (const auto& doc : corpus.documents) {
            cleaned.back().push_back(text::clean_text(doc, stopset));
            all_tokens.push_back(cleaned.back().back());
        }
    }

    auto vocab = text::build_vocab(all_tokens, spec.vocab_k);
    paths.vocab = (fs::path(out_dir) / "vocab.txt").string();
    text::save_vocabulary(vocab, paths.vocab);

    auto report = text::token_frequency_report(all_tokens, spec.report_top);
    std::vector<std::string> report_lines;
    report_lines.reserve(report.size());
    for (const auto& [word, count] : report)
        report_lines.push_back(word + " " + std::to_string(count));
    paths.frequency_report = (fs::path(out_dir) / "frequency_report.txt").string();
    write_lines(paths.frequency_report, report_lines);

    std::string* dataset_slots[] = {&paths.target_train, &paths.pool, &paths.test,
                                    &paths.candidates};
    for (std::size_t r = 0; r < 4; ++r) {
        Dataset data;
        data.feature_dim = vocab.size();
        for (std::size_t i = 0; i < cleaned[r].size(); ++i)
            data.add(text::featurize(cleaned[r][i], vocab), corpora[r].labels[i]);
        *dataset_slots[r] =
            (fs::path(out_dir) / (std::string(roles[r].name) + ".jsonl")).string();
        save_dataset(data, *dataset_slots[r]);
    }
    return paths;
}

}  // namespace amlab::fixtures
