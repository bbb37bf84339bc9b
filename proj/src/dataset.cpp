#include "amlab/dataset.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "amlab/errors.hpp"

namespace amlab {

void Dataset::add(Features f, int label, bool synthetic) {
    if (feature_dim == 0 && samples.empty()) feature_dim = f.size();
    if (f.size() != feature_dim)
        throw ShapeError("dataset: sample dimension " + std::to_string(f.size()) +
                         " does not match " + std::to_string(feature_dim));
    LabeledSample s;
    s.features = std::move(f);
    s.label = label;
    s.synthetic = synthetic;
    samples.push_back(std::move(s));
}

void Dataset::add(LabeledSample s) {
    if (feature_dim == 0 && samples.empty()) feature_dim = s.features.size();
    if (s.features.size() != feature_dim)
        throw ShapeError("dataset: sample dimension " +
                         std::to_string(s.features.size()) + " does not match " +
                         std::to_string(feature_dim));
    samples.push_back(std::move(s));
}

void Dataset::validate() const {
    for (const auto& s : samples) {
        if (s.features.size() != feature_dim)
            throw ShapeError("dataset: inconsistent feature dimensions");
        if (s.label != 1 && s.label != 2)
            throw ValidationError("dataset: label must be 1 or 2");
        if (!all_finite(s.features))
            throw ValidationError("dataset: non-finite feature value");
    }
}

bool Dataset::has_both_labels() const {
    bool l1 = false, l2 = false;
    for (const auto& s : samples) {
        if (s.label == 1) l1 = true;
        if (s.label == 2) l2 = true;
    }
    return l1 && l2;
}

std::vector<Features> Dataset::feature_list() const {
    std::vector<Features> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.features);
    return out;
}

Dataset concat(const Dataset& a, const Dataset& b) {
    if (!a.empty() && !b.empty() && a.feature_dim != b.feature_dim)
        throw ShapeError("concat: feature dimensions disagree");
    Dataset out = a;
    if (out.feature_dim == 0) out.feature_dim = b.feature_dim;
    out.samples.insert(out.samples.end(), b.samples.begin(), b.samples.end());
    return out;
}

Matrix to_columns(const Dataset& data) {
    return to_columns(data.feature_list());
}

Matrix to_columns(const std::vector<Features>& features) {
    if (features.empty()) return Matrix{};
    Matrix m(features[0].size(), features.size());
    for (std::size_t j = 0; j < features.size(); ++j) {
        if (features[j].size() != m.rows) throw ShapeError("to_columns: ragged feature list");
        for (std::size_t i = 0; i < m.rows; ++i) m(i, j) = features[j][i];
    }
    return m;
}

namespace {

nlohmann::json sample_to_json(const LabeledSample& s) {
    nlohmann::json counts = nlohmann::json::array();
    for (double v : s.features) {
        const double r = std::floor(v);
        if (r == v && std::fabs(v) < 9.007199254740992e15)
            counts.push_back(static_cast<long long>(v));
        else
            counts.push_back(v);
    }
    nlohmann::json j;
    j["counts"] = std::move(counts);
    j["label"] = s.label;
    if (s.synthetic) j["synthetic"] = true;
    if (s.score >= 0.0) j["score"] = s.score;
    return j;
}

LabeledSample sample_from_json(const nlohmann::json& j, std::size_t line_no) {
    const std::string where = "dataset line " + std::to_string(line_no);
    if (!j.is_object() || !j.contains("counts") || !j.contains("label"))
        throw ValidationError(where + ": record needs counts and label");
    const auto& counts = j["counts"];
    if (!counts.is_array()) throw ValidationError(where + ": counts must be an array");
    LabeledSample s;
    s.features.reserve(counts.size());
    for (const auto& v : counts) {
        if (!v.is_number()) throw ValidationError(where + ": counts entries must be numbers");
        s.features.push_back(v.get<double>());
    }
    if (!j["label"].is_number_integer()) throw ValidationError(where + ": label must be an integer");
    s.label = j["label"].get<int>();
    if (s.label != 1 && s.label != 2) throw ValidationError(where + ": label must be 1 or 2");
    if (j.contains("synthetic")) s.synthetic = j["synthetic"].get<bool>();
    if (j.contains("score")) s.score = j["score"].get<double>();
    return s;
}

}  // namespace

std::string dataset_to_lines(const Dataset& data) {
    std::ostringstream os;
    for (const auto& s : data.samples) os << sample_to_json(s).dump() << '\n';
    return os.str();
}

Dataset dataset_from_lines(const std::string& text) {
    Dataset out;
    std::istringstream is(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw ValidationError("dataset line " + std::to_string(line_no) + ": invalid JSON");
        LabeledSample s = sample_from_json(j, line_no);
        if (out.samples.empty()) out.feature_dim = s.features.size();
        if (s.features.size() != out.feature_dim)
            throw ShapeError("dataset line " + std::to_string(line_no) + ": dimension mismatch");
        out.samples.push_back(std::move(s));
    }
    return out;
}

void save_dataset(const Dataset& data, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write " + path);
    os << dataset_to_lines(data);
    if (!os) throw IoError("write failed: " + path);
}

Dataset load_dataset(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot read " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return dataset_from_lines(ss.str());
}

}  // namespace amlab
