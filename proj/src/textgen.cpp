#include "amlab/textgen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "amlab/errors.hpp"
#include "amlab/rng.hpp"
#include "amlab/text.hpp"

namespace amlab::textgen {

namespace {

const std::vector<std::string> kSubjective = {
    "love",      "great",    "hate",       "awesome",  "terrible",
    "amazing",   "awful",    "beautiful",  "happy",    "sad",
    "best",      "worst",    "fun",        "boring",   "cool",
    "annoying",  "perfect",  "horrible",   "fantastic", "ugly",
    "excited",   "angry",    "wonderful",  "stupid",   "brilliant",
    "lovely",    "gross",    "sweet",      "nasty",    "glad",
    "upset",     "thrilled", "furious",    "enjoy",    "regret",
    "favorite",  "dreadful", "superb",     "lame",     "delightful",
    "painful",   "charming", "tragic",     "hilarious", "pathetic",
    "incredible", "ridiculous", "miserable", "disappointing", "adore",
};

const std::vector<std::string> kObjective = {
    "report",    "announced", "market",    "government", "election",
    "study",     "data",      "results",   "percent",    "quarter",
    "revenue",   "company",   "shares",    "price",      "index",
    "bank",      "policy",    "minister",  "official",   "statement",
    "released",  "published", "figures",   "survey",     "economy",
    "growth",    "rate",      "budget",    "committee",  "agency",
    "decision",  "meeting",   "summit",    "deal",       "agreement",
    "law",       "bill",      "court",     "ruling",     "evidence",
    "research",  "analysis",  "forecast",  "update",     "conference",
    "launch",    "product",   "service",   "sector",     "industry",
};

const std::vector<std::string> kShared = {
    "today",   "people",  "time",    "day",     "week",    "year",
    "news",    "world",   "city",    "team",    "game",    "music",
    "movie",   "phone",   "coffee",  "weather", "morning", "night",
    "home",    "work",    "school",  "friend",  "family",  "food",
    "dinner",  "lunch",   "weekend", "video",   "photo",   "story",
    "event",   "party",   "travel",  "trip",    "book",    "show",
    "season",  "match",   "play",    "watch",   "listen",  "read",
    "write",   "talk",    "meet",    "call",    "plan",    "idea",
    "thing",   "place",   "street",  "car",     "train",   "flight",
    "rain",    "sun",     "snow",    "wind",    "dog",     "cat",
};

const char* const kPunct[] = {".", ",", "!", "?", ";"};

// Draws ranks with probability proportional to 1/(rank+1).
class ZipfSampler {
public:
    explicit ZipfSampler(std::size_t n) {
        cum_.reserve(n);
        double total = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            total += 1.0 / static_cast<double>(r + 1);
            cum_.push_back(total);
        }
    }
    std::size_t draw(Rng& rng) const {
        double u = rng.uniform() * cum_.back();
        auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
        std::size_t idx = static_cast<std::size_t>(it - cum_.begin());
        return std::min(idx, cum_.size() - 1);
    }

private:
    std::vector<double> cum_;
};

std::string uppercase(std::string word) {
    for (char& c : word)
        c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return word;
}

std::string random_url(Rng& rng) {
    static const char alnum[] = "abcdefghijklmnopqrstuvwxyz0123456789";
    std::string url = "http://t.co/";
    for (int i = 0; i < 6; ++i) url += alnum[rng.index(sizeof alnum - 1)];
    return url;
}

}  // namespace

const std::vector<std::string>& subjective_lexicon() { return kSubjective; }
const std::vector<std::string>& objective_lexicon() { return kObjective; }
const std::vector<std::string>& shared_lexicon() { return kShared; }

void CorpusSpec::validate() const {
    if (n_docs == 0) throw ValidationError("corpus: n_docs must be >= 1");
    if (!(class1_fraction >= 0.0 && class1_fraction <= 1.0))
        throw ValidationError("corpus: class1_fraction must be in [0,1]");
    if (min_tokens == 0 || max_tokens < min_tokens)
        throw ValidationError("corpus: need 1 <= min_tokens <= max_tokens");
    double cat = stop_prob + shared_prob + own_prob + other_prob;
    if (stop_prob < 0 || shared_prob < 0 || own_prob < 0 || other_prob < 0 ||
        cat > 1.0 + 1e-12)
        throw ValidationError("corpus: category probabilities must be >= 0 and sum <= 1");
    if (url_prob < 0 || url_prob > 1 || punct_prob < 0 || punct_prob > 1 ||
        upper_prob < 0 || upper_prob > 1)
        throw ValidationError("corpus: per-token probabilities must be in [0,1]");
    if (niche_words == 0) throw ValidationError("corpus: niche_words must be >= 1");
}

SyntheticCorpus generate_corpus(const CorpusSpec& spec) {
    spec.validate();
    const auto& stops = text::default_stopwords();
    std::vector<std::string> niche;
    niche.reserve(spec.niche_words);
    for (std::size_t i = 0; i < spec.niche_words; ++i)
        niche.push_back("tag" + std::to_string(i));

    ZipfSampler stop_z(stops.size());
    ZipfSampler shared_z(kShared.size());
    ZipfSampler subj_z(kSubjective.size());
    ZipfSampler obj_z(kObjective.size());
    ZipfSampler niche_z(niche.size());

    const auto n1 = static_cast<std::size_t>(
        std::llround(spec.class1_fraction * static_cast<double>(spec.n_docs)));

    SyntheticCorpus corpus;
    corpus.documents.reserve(spec.n_docs);
    corpus.labels.reserve(spec.n_docs);
    Rng rng(spec.seed);

    for (std::size_t doc = 0; doc < spec.n_docs; ++doc) {
        const int label = doc < n1 ? 1 : 2;
        const auto& own = label == 1 ? kSubjective : kObjective;
        const auto& other = label == 1 ? kObjective : kSubjective;
        const ZipfSampler& own_z = label == 1 ? subj_z : obj_z;
        const ZipfSampler& other_z = label == 1 ? obj_z : subj_z;

        const std::size_t len =
            spec.min_tokens + rng.index(spec.max_tokens - spec.min_tokens + 1);
        std::vector<std::string> tokens;
        tokens.reserve(len + 1);
        for (std::size_t t = 0; t < len; ++t) {
            const double u = rng.uniform();
            std::string word;
            if (u < spec.stop_prob) {
                word = stops[stop_z.draw(rng)];
            } else if (u < spec.stop_prob + spec.shared_prob) {
                word = kShared[shared_z.draw(rng)];
            } else if (u < spec.stop_prob + spec.shared_prob + spec.own_prob) {
                word = own[own_z.draw(rng)];
            } else if (u < spec.stop_prob + spec.shared_prob + spec.own_prob +
                               spec.other_prob) {
                word = other[other_z.draw(rng)];
            } else {
                word = niche[niche_z.draw(rng)];
            }
            if (rng.uniform() < spec.upper_prob) word = uppercase(word);
            if (rng.uniform() < spec.punct_prob) word += kPunct[rng.index(5)];
            tokens.push_back(std::move(word));
        }
        if (rng.uniform() < spec.url_prob) {
            std::string url = random_url(rng);
            tokens.insert(tokens.begin() +
                              static_cast<std::ptrdiff_t>(rng.index(tokens.size() + 1)),
                          std::move(url));
        }

        std::string doc_text;
        for (std::size_t t = 0; t < tokens.size(); ++t) {
            if (t) doc_text += ' ';
            doc_text += tokens[t];
        }
        corpus.documents.push_back(std::move(doc_text));
        corpus.labels.push_back(label);
    }
    return corpus;
}

}  // namespace amlab::textgen
