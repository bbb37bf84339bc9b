#include "amlab/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "amlab/errors.hpp"
#include "amlab/rng.hpp"

namespace amlab::attacks {

void AttackConfig::validate() const {
    if (query_budget < 1) throw ValidationError("attack: query_budget must be >= 1");
    if (!(threshold > 0.0 && threshold < 1.0))
        throw ValidationError("attack: threshold must be in (0,1)");
    if (!(causative_p > 0.0 && causative_p <= 100.0))
        throw ValidationError("attack: causative_p must be in (0,100]");
}

namespace {

void run_queries(OracleClient& client, const Dataset& pool,
                 ExploratoryResult& result) {
    while (!result.pending_order.empty()) {
        std::size_t idx = result.pending_order.front();
        ClassifyOutcome outcome = client.classify(pool.samples[idx].features);
        if (outcome.status == ClassifyStatus::rate_limited) {
            result.status = ExploratoryStatus::rate_limited;
            result.retry_after_seconds = outcome.retry_after_seconds;
            return;
        }
        if (outcome.status != ClassifyStatus::ok) {
            result.status = ExploratoryStatus::network_error;
            result.detail = outcome.detail;
            return;
        }
        // Label-only: the adversary records T(s) and nothing else.
        LabeledSample s;
        s.features = pool.samples[idx].features;
        s.label = outcome.label;
        result.labeled.add(std::move(s));
        ++result.calls_consumed;
        result.queried_order.push_back(idx);
        result.pending_order.erase(result.pending_order.begin());
    }
    result.status = ExploratoryStatus::complete;
}

}  // namespace

ExploratoryResult exploratory_attack(OracleClient& client, const Dataset& pool,
                                     std::size_t budget, std::uint64_t seed) {
    if (pool.samples.empty())
        throw ValidationError("exploratory_attack: pool is empty");
    if (pool.samples.size() < budget)
        throw ValidationError("exploratory_attack: pool smaller than budget (" +
                              std::to_string(pool.samples.size()) + " < " +
                              std::to_string(budget) + ")");
    ExploratoryResult result;
    result.labeled.feature_dim = pool.feature_dim;
    Rng rng(seed);
    result.pending_order = rng.sample_indices(pool.samples.size(), budget);
    run_queries(client, pool, result);
    return result;
}

void resume_exploratory(OracleClient& client, const Dataset& pool,
                        ExploratoryResult& partial) {
    run_queries(client, pool, partial);
}

SearchResult hyperparameter_search(const Dataset& train_data,
                                   const Dataset& validation,
                                   const std::vector<GridPoint>& grid,
                                   const nn::TrainConfig& base,
                                   std::uint64_t seed) {
    if (grid.empty()) throw ValidationError("hyperparameter_search: empty grid");
    train_data.validate();
    validation.validate();
    if (!validation.has_both_labels())
        throw ValidationError(
            "hyperparameter_search: validation labels must include both classes");

    std::vector<int> ref_labels;
    ref_labels.reserve(validation.samples.size());
    for (const auto& s : validation.samples) ref_labels.push_back(s.label);

    struct Slot {
        GridOutcome outcome;
        nn::MlpModel model;
    };
    std::vector<Slot> slots(grid.size());

    const auto n = static_cast<std::int64_t>(grid.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < n; ++i) {
        Slot& slot = slots[static_cast<std::size_t>(i)];
        slot.outcome.point = grid[static_cast<std::size_t>(i)];
        const GridPoint& pt = slot.outcome.point;
        try {
            nn::TrainConfig cfg = base;
            cfg.minibatch_size = pt.minibatch;
            cfg.momentum = pt.momentum;
            cfg.weight_scale = pt.weight_scale;
            cfg.seed = Rng::derive(seed, static_cast<std::uint64_t>(i));
            auto arch = nn::make_classifier_mlp(train_data.feature_dim,
                                                pt.hidden_layers, pt.neurons);
            auto trained = nn::train(arch, train_data, cfg);
            Classifier cand = [&trained](const Features& x) {
                return nn::predict_with_score(trained.model, x).label;
            };
            slot.outcome.report =
                divergence_with_reference_labels(ref_labels, cand, validation);
            slot.outcome.d_max = slot.outcome.report.d_max();
            slot.model = std::move(trained.model);
        } catch (const std::exception& e) {
            slot.outcome.failed = true;
            slot.outcome.error = e.what();
        }
    }

    SearchResult result;
    bool found = false;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        result.outcomes.push_back(slots[i].outcome);
        if (slots[i].outcome.failed) continue;
        if (!found || slots[i].outcome.d_max < result.outcomes[result.best_index].d_max) {
            found = true;
            result.best_index = i;
        }
    }
    if (!found) {
        std::ostringstream msg;
        msg << "hyperparameter_search: every grid point failed:";
        for (std::size_t i = 0; i < slots.size(); ++i)
            msg << "\n  point " << i << ": " << slots[i].outcome.error;
        throw TrainingDivergedError(msg.str(), 0);
    }
    const GridPoint& best = grid[result.best_index];
    result.best_model = std::move(slots[result.best_index].model);
    result.best_config = base;
    result.best_config.minibatch_size = best.minibatch;
    result.best_config.momentum = best.momentum;
    result.best_config.weight_scale = best.weight_scale;
    result.best_config.seed = Rng::derive(seed, result.best_index);
    return result;
}

AugmentResult augment_and_train(const Dataset& real, std::size_t n_s,
                                const gan::GanPair* gan, std::uint64_t synth_seed,
                                const nn::MlpModel& substitute_arch,
                                const nn::TrainConfig& train_config,
                                const Dataset& test) {
    if (real.samples.empty())
        throw ValidationError("augment_and_train: empty real dataset");
    AugmentResult result;
    Dataset training = real;
    if (n_s > 0) {
        if (gan == nullptr)
            throw ValidationError("augment_and_train: n_s > 0 needs a trained gan");
        result.synthetic = gan::synthesize_mixture(*gan, real, n_s, synth_seed);
        for (const auto& s : result.synthetic) training.add(s);
    }
    result.substitute = nn::train(substitute_arch, training, train_config).model;

    std::vector<int> ref_labels;
    ref_labels.reserve(test.samples.size());
    for (const auto& s : test.samples) ref_labels.push_back(s.label);
    const nn::MlpModel& model = result.substitute;
    Classifier cand = [&model](const Features& x) {
        return nn::predict_with_score(model, x).label;
    };
    result.report = divergence_with_reference_labels(ref_labels, cand, test);
    return result;
}

CausativeSelection causative_select(const nn::MlpModel& substitute,
                                    const Dataset& candidates, double p) {
    if (candidates.samples.empty())
        throw ValidationError("causative_select: no candidates");
    if (!(p > 0.0 && p <= 100.0))
        throw ValidationError("causative_select: p must be in (0,100]");

    const std::size_t n = candidates.samples.size();
    std::vector<double> scores(n);
    Dataset flipped;
    flipped.feature_dim = candidates.feature_dim;
    for (std::size_t i = 0; i < n; ++i) {
        auto pred = nn::predict_with_score(substitute, candidates.samples[i].features);
        scores[i] = pred.score;
        LabeledSample s;
        s.features = candidates.samples[i].features;
        s.label = pred.label;
        s.score = pred.score;
        flipped.add(std::move(s));
    }

    const double half = p / 2.0 / 100.0 * static_cast<double>(n);
    const auto top_n = static_cast<std::size_t>(std::ceil(half));
    const auto bottom_n = static_cast<std::size_t>(std::floor(half));
    if (top_n + bottom_n == 0)
        throw ValidationError(
            "causative_select: p=" + std::to_string(p) +
            " selects zero samples; raise p above " +
            std::to_string(200.0 / static_cast<double>(n)));

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&scores](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });

    CausativeSelection sel;
    sel.top_count = std::min(top_n, n);
    for (std::size_t r = 0; r < sel.top_count; ++r)
        sel.flip_indices.push_back(order[r]);
    // Bottom ranks come from what the top picks left over.
    std::vector<std::size_t> rest(order.begin() + static_cast<std::ptrdiff_t>(sel.top_count),
                                  order.end());
    std::stable_sort(rest.begin(), rest.end(), [&scores](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] < scores[b];
        return a < b;
    });
    sel.bottom_count = std::min(bottom_n, rest.size());
    for (std::size_t r = 0; r < sel.bottom_count; ++r)
        sel.flip_indices.push_back(rest[r]);

    std::sort(sel.flip_indices.begin(), sel.flip_indices.end());
    for (std::size_t idx : sel.flip_indices) {
        auto& s = flipped.samples[idx];
        s.label = s.label == 1 ? 2 : 1;
    }
    sel.flipped_dataset = std::move(flipped);
    return sel;
}

DivergenceReport evaluate_causative(const TargetClassifier& original_target,
                                    const Dataset& original_data,
                                    const Dataset& poisoned,
                                    const Dataset& eval_set,
                                    const nn::TrainConfig& mlp_config) {
    Dataset retrain_data = concat(original_data, poisoned);
    std::size_t hidden_layers = 2, neurons = 30;
    if (original_target.kind == TargetKind::mlp) {
        hidden_layers = original_target.mlp.layers.size() - 1;
        neurons = original_target.mlp.layers.front().output_dim;
    }
    TargetClassifier retrained = train_mock_target(
        retrain_data, original_target.kind, mlp_config, hidden_layers, neurons);
    Classifier ref = [&original_target](const Features& x) {
        return original_target.classify(x).label;
    };
    Classifier cand = [&retrained](const Features& x) {
        return retrained.classify(x).label;
    };
    return divergence(ref, cand, eval_set);
}

EvasionSelection evasion_select(const nn::MlpModel& substitute,
                                const Dataset& candidates, EvasionMode mode,
                                std::size_t n, double threshold,
                                int from_label, int to_label) {
    if (candidates.samples.size() < n)
        throw ValidationError("evasion_select: asked for " + std::to_string(n) +
                              " samples from " +
                              std::to_string(candidates.samples.size()) +
                              " candidates");
    if (mode == EvasionMode::targeted) {
        if ((from_label != 1 && from_label != 2) || (to_label != 1 && to_label != 2) ||
            from_label == to_label)
            throw ValidationError("evasion_select: targeted mode needs labels 1->2 or 2->1");
    }

    const std::size_t total = candidates.samples.size();
    std::vector<double> scores(total);
    std::vector<int> labels(total);
    for (std::size_t i = 0; i < total; ++i) {
        auto pred = nn::predict_with_score(substitute, candidates.samples[i].features,
                                           threshold);
        scores[i] = pred.score;
        labels[i] = pred.label;
    }

    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < total; ++i)
        if (mode == EvasionMode::max_error || labels[i] == to_label)
            eligible.push_back(i);
    if (mode == EvasionMode::targeted && eligible.size() < n)
        throw ValidationError("evasion_select: only " +
                              std::to_string(eligible.size()) +
                              " candidates are labeled " + std::to_string(to_label) +
                              ", need " + std::to_string(n));

    std::stable_sort(eligible.begin(), eligible.end(),
                     [&scores, threshold](std::size_t a, std::size_t b) {
                         double da = std::fabs(scores[a] - threshold);
                         double db = std::fabs(scores[b] - threshold);
                         if (da != db) return da < db;
                         return a < b;
                     });

    EvasionSelection sel;
    sel.mode = mode;
    if (mode == EvasionMode::targeted) {
        sel.from_label = from_label;
        sel.to_label = to_label;
    }
    for (std::size_t r = 0; r < n; ++r) {
        std::size_t idx = eligible[r];
        sel.indices.push_back(idx);
        LabeledSample s;
        s.features = candidates.samples[idx].features;
        s.label = labels[idx];
        s.score = scores[idx];
        sel.selected.push_back(std::move(s));
    }
    return sel;
}

EvasionEvaluation evaluate_evasion(const TargetClassifier& target,
                                   const Dataset& candidates,
                                   const std::vector<int>& ground_truth,
                                   const EvasionSelection& selection,
                                   std::uint64_t seed) {
    if (ground_truth.empty())
        throw ValidationError(
            "evaluate_evasion: ground truth unavailable (simulation-only measurement)");
    if (ground_truth.size() != candidates.samples.size())
        throw ShapeError("evaluate_evasion: ground truth size mismatch");

    EvasionEvaluation eval;
    if (selection.indices.empty()) return eval;

    auto rate_on = [&](const std::vector<std::size_t>& idx) {
        std::size_t wrong = 0;
        for (std::size_t i : idx) {
            if (i >= candidates.samples.size())
                throw ValidationError("evaluate_evasion: selection index out of range");
            int lab = target.classify(candidates.samples[i].features).label;
            if (lab != ground_truth[i]) ++wrong;
        }
        return static_cast<double>(wrong) / static_cast<double>(idx.size());
    };

    eval.selected_error = rate_on(selection.indices);
    Rng rng(seed);
    eval.baseline_indices =
        rng.sample_indices(candidates.samples.size(), selection.indices.size());
    eval.baseline_error = rate_on(eval.baseline_indices);
    return eval;
}

}  // namespace amlab::attacks
