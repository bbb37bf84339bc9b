#pragma once

// Divergence between two classifiers over a labeled comparison set.
//
// The comparison set is split by the *reference* classifier's outputs:
// bucket 1 holds samples the reference labels 1, bucket 2 those it labels
// 2.  Within each bucket we count how often the candidate disagrees:
//
//   d1 = m1 / n1        disagreement on reference-label-1 samples
//   d2 = m2 / n2        disagreement on reference-label-2 samples
//   d  = (m1 + m2) / (n1 + n2)
//   d_max = max(d1, d2)
//
// Both per-class buckets must be nonempty; an empty bucket makes the
// per-class rate undefined and we refuse to report instead of guessing.

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "amlab/dataset.hpp"

namespace amlab {

// Maps a feature vector to a label in {1, 2}.
using Classifier = std::function<int(const Features&)>;

struct DivergenceReport {
    std::size_t n1 = 0;  // samples the reference assigns label 1
    std::size_t n2 = 0;
    std::size_t m1 = 0;  // of those, how many the candidate labels differently
    std::size_t m2 = 0;

    double d1() const;
    double d2() const;
    double d() const;
    double d_max() const;
};

// Runs both classifiers over every sample and tallies disagreements.
// Throws ValidationError if the set is empty or either reference bucket
// ends up empty.
DivergenceReport divergence(const Classifier& reference,
                            const Classifier& candidate,
                            const Dataset& comparison);

// As above but reuses precomputed reference labels (parallel to samples).
DivergenceReport divergence_with_reference_labels(
    const std::vector<int>& reference_labels,
    const Classifier& candidate,
    const Dataset& comparison);

// Fraction of samples where the classifier disagrees with the stored
// ground-truth labels.  Throws on an empty set.
double error_rate(const Classifier& classifier, const Dataset& labeled);

// One row of an augmentation sweep table:
//   "<total> | <n_real> | <n_synth> | d1% | d2% | d%"
// Percentages carry two decimals, rounded half away from zero.
std::string render_sweep_row(std::size_t n_real, std::size_t n_synth,
                             const DivergenceReport& report);

// "0.455964" -> "45.60%".  Exposed for the report tool.
std::string format_percent(double fraction);

// Serialization used by report files: "key value" per line, values
// printed with %.17g so parsing them back is exact.
std::string report_to_kv(const DivergenceReport& report);
DivergenceReport report_from_kv(const std::string& text);

}  // namespace amlab
