#pragma once

// The adversary's side of the lab, built on top of the oracle client:
//
//   exploratory_attack     buy labels for pool samples under a query budget
//   hyperparameter_search  pick the substitute architecture minimizing d_max
//   augment_and_train      GAN-augmented substitute training (sweep rows)
//   causative_select       label flips on extreme-score candidates
//   evaluate_causative     retrain the mock target on poisoned data, measure drift
//   evasion_select         samples the substitute scores near the threshold
//   evaluate_evasion       ground-truth error of selected vs random samples

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "amlab/dataset.hpp"
#include "amlab/gan.hpp"
#include "amlab/metrics.hpp"
#include "amlab/nn.hpp"
#include "amlab/oracle.hpp"

namespace amlab::attacks {

// One substitute architecture candidate.  The training schedule
// (epochs, learning rate) comes from the base TrainConfig.
struct GridPoint {
    std::size_t hidden_layers = 2;
    std::size_t neurons = 30;
    double weight_scale = 1.0;
    std::size_t minibatch = 20;
    double momentum = 0.9;
};

struct AttackConfig {
    std::int64_t query_budget = 100;
    double threshold = 0.5;
    std::vector<GridPoint> hyperparameter_grid;
    std::vector<std::size_t> augmentation_sizes;
    double causative_p = 10.0;  // percent
    std::uint64_t seed = 0;

    void validate() const;
};

enum class ExploratoryStatus { complete, rate_limited, network_error };

struct ExploratoryResult {
    Dataset labeled;             // pool samples with oracle labels
    std::size_t calls_consumed = 0;
    ExploratoryStatus status = ExploratoryStatus::complete;
    // Pool indices, in planned query order.  queried_order covers what
    // ran; pending_order is the resumable cursor after an interruption.
    std::vector<std::size_t> queried_order;
    std::vector<std::size_t> pending_order;
    double retry_after_seconds = 0.0;
    std::string detail;
};

// Queries `budget` pool samples chosen uniformly without replacement
// (seeded) and records the returned labels only; scores are discarded.
// Stops at the first rate-limit or transport failure and returns what
// it has.  Throws ValidationError when the pool is empty or smaller
// than the budget.
ExploratoryResult exploratory_attack(OracleClient& client, const Dataset& pool,
                                     std::size_t budget, std::uint64_t seed);

// Resume a partial run: queries pending_order in order, appending to
// the result.  Same stop conditions.
void resume_exploratory(OracleClient& client, const Dataset& pool,
                        ExploratoryResult& partial);

struct GridOutcome {
    GridPoint point;
    bool failed = false;
    std::string error;
    double d_max = 0.0;
    DivergenceReport report;
};

struct SearchResult {
    std::size_t best_index = 0;
    nn::MlpModel best_model;
    nn::TrainConfig best_config;
    std::vector<GridOutcome> outcomes;  // grid order
};

// Trains one substitute per grid point (seed derived per point) and
// keeps the one with the smallest d_max against the validation set's
// stored labels; ties go to the earlier grid point.  Points may run in
// parallel; the winner never depends on scheduling.  Throws when every
// point fails, listing the per-point errors.
SearchResult hyperparameter_search(const Dataset& train_data,
                                   const Dataset& validation,
                                   const std::vector<GridPoint>& grid,
                                   const nn::TrainConfig& base,
                                   std::uint64_t seed);

struct AugmentResult {
    nn::MlpModel substitute;
    std::vector<LabeledSample> synthetic;
    DivergenceReport report;  // vs the test set's stored oracle labels
};

// Synthesizes n_s samples from `gan` (label mix proportional to the
// real set), trains the substitute architecture on real+synthetic, and
// measures divergence against the oracle labels stored in `test`.
// n_s = 0 skips the GAN entirely, so the result is bitwise identical
// to training on the real data alone; in that case `gan` may be null.
AugmentResult augment_and_train(const Dataset& real, std::size_t n_s,
                                const gan::GanPair* gan, std::uint64_t synth_seed,
                                const nn::MlpModel& substitute_arch,
                                const nn::TrainConfig& train_config,
                                const Dataset& test);

struct CausativeSelection {
    std::vector<std::size_t> flip_indices;  // ascending
    Dataset flipped_dataset;  // all candidates, substitute labels, flips applied
    std::size_t top_count = 0;
    std::size_t bottom_count = 0;
};

// Scores every candidate with the substitute, assigns its labels, then
// flips the top ceil((p/2)% N) scores and the bottom floor((p/2)% N)
// of the rest.  Ties break toward the lower index.
CausativeSelection causative_select(const nn::MlpModel& substitute,
                                    const Dataset& candidates, double p);

// Retrains the mock target on original+poisoned and reports
// divergence(T, T-retrained) over eval_set.
DivergenceReport evaluate_causative(const TargetClassifier& original_target,
                                    const Dataset& original_data,
                                    const Dataset& poisoned,
                                    const Dataset& eval_set,
                                    const nn::TrainConfig& mlp_config = {});

enum class EvasionMode { max_error, targeted };

struct EvasionSelection {
    EvasionMode mode = EvasionMode::max_error;
    int from_label = 0;  // targeted mode only
    int to_label = 0;
    std::vector<std::size_t> indices;      // into candidates, closest first
    std::vector<LabeledSample> selected;   // substitute label + score attached
};

// max_error: the n candidates with scores closest to the threshold.
// targeted: among candidates the substitute labels `to_label`, the n
// closest to the threshold; fewer than n available is an error that
// reports the available count.  Ties break toward the lower index.
EvasionSelection evasion_select(const nn::MlpModel& substitute,
                                const Dataset& candidates, EvasionMode mode,
                                std::size_t n, double threshold,
                                int from_label = 1, int to_label = 2);

struct EvasionEvaluation {
    std::optional<double> selected_error;   // empty when selection is empty
    std::optional<double> baseline_error;
    std::vector<std::size_t> baseline_indices;
};

// Ground-truth misclassification rate of the target on the selected
// samples versus an equal-size seeded random draw from the candidates.
// ground_truth must align with candidates; passing an empty vector
// signals that truth is unavailable and raises a ValidationError.
EvasionEvaluation evaluate_evasion(const TargetClassifier& target,
                                   const Dataset& candidates,
                                   const std::vector<int>& ground_truth,
                                   const EvasionSelection& selection,
                                   std::uint64_t seed);

}  // namespace amlab::attacks
