#include "amlab/text.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "amlab/errors.hpp"

namespace amlab::text {

StopWords load_stopword_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot read stop-word file " + path);
    StopWords out;
    std::string line;
    while (std::getline(is, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        out.insert(line);
    }
    return out;
}

TokenList clean_text(const std::string& raw, const StopWords& stopwords) {
    TokenList out;
    std::size_t pos = 0;
    const std::size_t n = raw.size();
    while (pos < n) {
        while (pos < n && std::isspace(static_cast<unsigned char>(raw[pos]))) ++pos;
        std::size_t end = pos;
        while (end < n && !std::isspace(static_cast<unsigned char>(raw[end]))) ++end;
        if (end > pos) {
            std::string token = raw.substr(pos, end - pos);
            for (char& c : token) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            const bool is_url =
                token.rfind("http", 0) == 0 || token.find("://") != std::string::npos;
            if (!is_url) {
                std::string stripped;
                stripped.reserve(token.size());
                for (char c : token)
                    if (!std::ispunct(static_cast<unsigned char>(c))) stripped.push_back(c);
                if (!stripped.empty() && stopwords.find(stripped) == stopwords.end())
                    out.push_back(std::move(stripped));
            }
        }
        pos = end;
    }
    return out;
}

namespace {

// (word, count) pairs sorted by count descending, word ascending.
std::vector<std::pair<std::string, std::size_t>> ranked_counts(
    const std::vector<TokenList>& corpus) {
    std::unordered_map<std::string, std::size_t> counts;
    for (const TokenList& doc : corpus)
        for (const std::string& tok : doc) ++counts[tok];
    std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return ranked;
}

}  // namespace

Vocabulary build_vocab(const std::vector<TokenList>& corpus, std::size_t k) {
    if (k < 1) throw ValidationError("build_vocab: k must be >= 1");
    auto ranked = ranked_counts(corpus);
    if (ranked.size() < k)
        throw ValidationError("build_vocab: corpus has only " + std::to_string(ranked.size()) +
                              " distinct tokens, " + std::to_string(k - ranked.size()) +
                              " short of k=" + std::to_string(k));
    Vocabulary vocab;
    vocab.words.reserve(k);
    vocab.frequencies.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        vocab.words.push_back(ranked[i].first);
        vocab.frequencies.push_back(ranked[i].second);
    }
    return vocab;
}

Features featurize(const TokenList& tokens, const Vocabulary& vocab) {
    std::unordered_map<std::string, std::size_t> index;
    index.reserve(vocab.words.size());
    for (std::size_t i = 0; i < vocab.words.size(); ++i) index[vocab.words[i]] = i;
    Features counts(vocab.words.size(), 0.0);
    for (const std::string& tok : tokens) {
        auto it = index.find(tok);
        if (it != index.end()) counts[it->second] += 1.0;
    }
    return counts;
}

std::vector<std::pair<std::string, std::size_t>> token_frequency_report(
    const std::vector<TokenList>& corpus, std::size_t top_n) {
    bool any = false;
    for (const TokenList& doc : corpus)
        if (!doc.empty()) any = true;
    if (corpus.empty() || !any) throw ValidationError("token_frequency_report: empty corpus");
    auto ranked = ranked_counts(corpus);
    if (ranked.size() > top_n) ranked.resize(top_n);
    return ranked;
}

void save_vocabulary(const Vocabulary& vocab, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write " + path);
    for (std::size_t i = 0; i < vocab.words.size(); ++i)
        os << vocab.words[i] << ' ' << vocab.frequencies[i] << '\n';
    if (!os) throw IoError("write failed: " + path);
}

Vocabulary load_vocabulary(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot read " + path);
    Vocabulary vocab;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string word;
        std::size_t count = 0;
        if (!(ls >> word >> count)) throw IoError("bad vocabulary line in " + path);
        vocab.words.push_back(word);
        vocab.frequencies.push_back(count);
    }
    return vocab;
}

}  // namespace amlab::text
