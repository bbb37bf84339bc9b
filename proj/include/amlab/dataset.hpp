#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "amlab/matrix.hpp"

namespace amlab {

// Feature vector: word counts for text data, arbitrary reals for the
// numeric test fixtures. Labels are 1 (subjective) or 2 (objective).
using Features = std::vector<double>;

struct LabeledSample {
    Features features;
    int label = 1;
    bool synthetic = false;
    double score = -1.0;  // oracle score when recorded; negative = absent
};

struct Dataset {
    std::vector<LabeledSample> samples;
    std::size_t feature_dim = 0;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }

    void add(Features f, int label, bool synthetic = false);
    void add(LabeledSample s);
    // Shared dimension, labels in {1,2}, finite entries.
    void validate() const;
    bool has_both_labels() const;
    std::vector<Features> feature_list() const;
};

Dataset concat(const Dataset& a, const Dataset& b);

// Samples as matrix columns (feature_dim x n), in dataset order.
Matrix to_columns(const Dataset& data);
Matrix to_columns(const std::vector<Features>& features);

// One JSON record per line: {"counts":[...],"label":1}. Optional fields
// "synthetic" and "score" are preserved.
void save_dataset(const Dataset& data, const std::string& path);
Dataset load_dataset(const std::string& path);
std::string dataset_to_lines(const Dataset& data);
Dataset dataset_from_lines(const std::string& text);

}  // namespace amlab
