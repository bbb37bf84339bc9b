#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "amlab/attacks.hpp"
#include "amlab/rng.hpp"

using namespace amlab;

namespace {

Dataset separable_counts(std::size_t per_class, std::uint64_t seed) {
    Rng rng(seed);
    Dataset d;
    for (std::size_t i = 0; i < per_class; ++i)
        d.add({double(2 + rng.index(4)), double(rng.index(3)), 0.0}, 1);
    for (std::size_t i = 0; i < per_class; ++i)
        d.add({0.0, double(rng.index(3)), double(2 + rng.index(4))}, 2);
    return d;
}

// substitute whose score for {x} is exactly sigmoid-free: we build a
// 1-feature linear+softmax net with logits (0, logit(x)) so the class-2
// probability equals the feature value itself for x in (0,1).
nn::MlpModel score_passthrough() {
    nn::MlpModel m = nn::make_mlp({{1, 2, nn::Activation::softmax}});
    // p2 = exp(w2 x)/(1 + exp(w2 x)) has no closed passthrough, so tests
    // that need exact scores use monotonic placement instead: w2 > 0
    // makes score strictly increasing in x.
    m.weights[0](1, 0) = 8.0;
    return m;
}

double model_score(const nn::MlpModel& m, double x) {
    return nn::predict_with_score(m, {x}).score;
}

}  // namespace

TEST_CASE("exploratory attack buys exactly its budget of labels") {
    Dataset train = separable_counts(30, 1);
    TargetClassifier target = train_mock_target(train, TargetKind::naive_bayes);
    Dataset pool = separable_counts(250, 2);  // 500 samples

    ManualClock clock;
    QueryBudget budget(1000, 60.0, clock);
    InProcessOracleClient client(target, budget);

    attacks::ExploratoryResult r = attacks::exploratory_attack(client, pool, 100, 7);
    CHECK(r.status == attacks::ExploratoryStatus::complete);
    CHECK(r.calls_consumed == 100);
    CHECK(r.labeled.size() == 100);
    CHECK(r.queried_order.size() == 100);
    CHECK(r.pending_order.empty());
    CHECK(budget.remaining() == 900);

    // indices are distinct and in range
    std::set<std::size_t> seen(r.queried_order.begin(), r.queried_order.end());
    CHECK(seen.size() == 100);
    CHECK(*seen.rbegin() < pool.size());

    // labels match the oracle, scores are not recorded
    for (std::size_t i = 0; i < r.labeled.size(); ++i) {
        const auto& s = r.labeled.samples[i];
        CHECK(s.label == target.classify(pool.samples[r.queried_order[i]].features).label);
        CHECK(s.features == pool.samples[r.queried_order[i]].features);
        CHECK(s.score < 0.0);
    }

    // deterministic plan per seed
    QueryBudget budget2(1000, 60.0, clock);
    InProcessOracleClient client2(target, budget2);
    attacks::ExploratoryResult r2 = attacks::exploratory_attack(client2, pool, 100, 7);
    CHECK(r2.queried_order == r.queried_order);

    CHECK_THROWS_AS(attacks::exploratory_attack(client, Dataset{}, 10, 7), ValidationError);
    CHECK_THROWS_AS(attacks::exploratory_attack(client, pool, 501, 7), ValidationError);
}

TEST_CASE("a rate limit interrupts and the cursor resumes the same plan") {
    Dataset train = separable_counts(30, 3);
    TargetClassifier target = train_mock_target(train, TargetKind::naive_bayes);
    Dataset pool = separable_counts(150, 4);

    ManualClock clock;
    QueryBudget budget(40, 60.0, clock);
    InProcessOracleClient client(target, budget);

    attacks::ExploratoryResult r = attacks::exploratory_attack(client, pool, 100, 5);
    CHECK(r.status == attacks::ExploratoryStatus::rate_limited);
    CHECK(r.calls_consumed == 40);
    CHECK(r.labeled.size() == 40);
    CHECK(r.queried_order.size() == 40);
    CHECK(r.pending_order.size() == 60);
    CHECK(r.retry_after_seconds > 0.0);

    // the interrupted plan equals the uninterrupted one
    QueryBudget wide(1000, 60.0, clock);
    InProcessOracleClient free_client(target, wide);
    attacks::ExploratoryResult full = attacks::exploratory_attack(free_client, pool, 100, 5);
    std::vector<std::size_t> replay = r.queried_order;
    replay.insert(replay.end(), r.pending_order.begin(), r.pending_order.end());
    CHECK(replay == full.queried_order);

    clock.advance(61.0);
    attacks::resume_exploratory(client, pool, r);
    CHECK(r.status == attacks::ExploratoryStatus::rate_limited);  // 40-call window again
    CHECK(r.labeled.size() == 80);

    clock.advance(61.0);
    attacks::resume_exploratory(client, pool, r);
    CHECK(r.status == attacks::ExploratoryStatus::complete);
    CHECK(r.labeled.size() == 100);
    CHECK(r.pending_order.empty());
    CHECK(r.queried_order == full.queried_order);
    for (std::size_t i = 0; i < 100; ++i)
        CHECK(r.labeled.samples[i].label == full.labeled.samples[i].label);
}

TEST_CASE("hyperparameter search minimizes d_max with stable tie-breaks") {
    Dataset train = separable_counts(60, 11);
    TargetClassifier target = train_mock_target(train, TargetKind::naive_bayes);

    // labeled splits as the attack would see them
    Dataset fit, val;
    Dataset all = separable_counts(80, 12);
    for (std::size_t i = 0; i < all.size(); ++i) {
        LabeledSample s = all.samples[i];
        s.label = target.classify(s.features).label;
        (i % 4 == 0 ? val : fit).add(s);
    }

    std::vector<attacks::GridPoint> grid = {
        {1, 4, 1.0, 10, 0.9},
        {1, 8, 1.0, 10, 0.9},
        {2, 8, 3.0, 10, 0.9},
    };
    nn::TrainConfig base;
    base.epochs = 30;
    base.learning_rate = 0.3;

    attacks::SearchResult r = attacks::hyperparameter_search(fit, val, grid, base, 21);
    REQUIRE(r.outcomes.size() == 3);
    double best = 1e9;
    std::size_t best_idx = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        REQUIRE_FALSE(r.outcomes[i].failed);
        if (r.outcomes[i].d_max < best) {
            best = r.outcomes[i].d_max;
            best_idx = i;
        }
    }
    CHECK(r.best_index == best_idx);  // strict < keeps the earliest tie
    CHECK(r.best_config.seed == Rng::derive(21, best_idx));
    CHECK(r.best_config.minibatch_size == grid[best_idx].minibatch);

    // reruns are identical regardless of scheduling
    attacks::SearchResult r2 = attacks::hyperparameter_search(fit, val, grid, base, 21);
    CHECK(r2.best_index == r.best_index);
    CHECK(r2.best_model.same_parameters(r.best_model));

    CHECK_THROWS_AS(attacks::hyperparameter_search(fit, val, {}, base, 21), ValidationError);
}

TEST_CASE("search reports every failure when no point trains") {
    Dataset fit = separable_counts(20, 13);
    Dataset val = separable_counts(10, 14);
    // minibatch 0 makes every point fail config validation inside its
    // training attempt, exercising the per-point error aggregation
    std::vector<attacks::GridPoint> grid = {{1, 4, 1.0, 0, 0.9}, {1, 6, 1.0, 0, 0.9}};
    nn::TrainConfig base;
    base.epochs = 20;
    base.learning_rate = 0.1;
    try {
        attacks::hyperparameter_search(fit, val, grid, base, 1);
        FAIL("expected TrainingDivergedError");
    } catch (const TrainingDivergedError& e) {
        std::string msg = e.what();
        CHECK(msg.find("point 0") != std::string::npos);
        CHECK(msg.find("point 1") != std::string::npos);
    }
}

TEST_CASE("augmenting with zero synthetic samples is plain training") {
    Dataset train = separable_counts(40, 15);
    TargetClassifier target = train_mock_target(train, TargetKind::naive_bayes);
    Dataset real = separable_counts(25, 16);
    for (auto& s : real.samples) s.label = target.classify(s.features).label;
    Dataset test = separable_counts(50, 17);
    for (auto& s : test.samples) s.label = target.classify(s.features).label;

    nn::MlpModel arch = nn::make_classifier_mlp(3, 1, 6);
    nn::TrainConfig cfg;
    cfg.epochs = 25;
    cfg.learning_rate = 0.3;
    cfg.seed = 5;

    attacks::AugmentResult a = attacks::augment_and_train(real, 0, nullptr, 99, arch, cfg, test);
    nn::TrainResult plain = nn::train(arch, real, cfg);
    CHECK(a.substitute.same_parameters(plain.model));
    CHECK(a.synthetic.empty());
    CHECK(a.report.n1 + a.report.n2 == test.size());

    // with a GAN attached the synthetic block participates in training
    gan::GanConfig gcfg;
    gcfg.noise_dim = 4;
    gcfg.generator_hidden = {8};
    gcfg.discriminator_hidden = {8};
    gcfg.epochs = 4;
    gcfg.batch_size = 8;
    gcfg.learning_rate = 1e-3;
    gan::GanPair g = gan::train_gan(real, gcfg);
    attacks::AugmentResult b = attacks::augment_and_train(real, 10, &g, 99, arch, cfg, test);
    CHECK(b.synthetic.size() == 10);
    for (const auto& s : b.synthetic) CHECK(s.synthetic);
    CHECK_FALSE(b.substitute.same_parameters(plain.model));

    CHECK_THROWS_AS(attacks::augment_and_train(real, 10, nullptr, 99, arch, cfg, test),
                    ValidationError);
}

TEST_CASE("causative selection flips the extreme scores") {
    // ten candidates with strictly increasing scores
    Dataset cands;
    for (int i = 0; i < 10; ++i) cands.add({double(i) - 4.5}, 1);
    nn::MlpModel sub = score_passthrough();
    REQUIRE(model_score(sub, -4.5) < model_score(sub, 4.5));

    SUBCASE("p=20 takes one from each end") {
        attacks::CausativeSelection sel = attacks::causative_select(sub, cands, 20.0);
        CHECK(sel.top_count == 1);     // ceil(10% of 10)
        CHECK(sel.bottom_count == 1);  // floor(10% of 10)
        REQUIRE(sel.flip_indices.size() == 2);
        CHECK(sel.flip_indices[0] == 0);  // lowest score
        CHECK(sel.flip_indices[1] == 9);  // highest score
        CHECK(sel.flipped_dataset.size() == 10);

        // flips invert the substitute's label on exactly those samples
        for (std::size_t i = 0; i < 10; ++i) {
            int sub_label = nn::predict_with_score(sub, cands.samples[i].features).label;
            int expect = (i == 0 || i == 9) ? 3 - sub_label : sub_label;
            CHECK(sel.flipped_dataset.samples[i].label == expect);
        }
    }

    SUBCASE("p=30 rounds the halves apart") {
        // p/2 = 15% of 10 = 1.5: ceil -> 2 top, floor -> 1 bottom
        attacks::CausativeSelection sel = attacks::causative_select(sub, cands, 30.0);
        CHECK(sel.top_count == 2);
        CHECK(sel.bottom_count == 1);
        CHECK(sel.flip_indices == std::vector<std::size_t>({0, 8, 9}));
    }

    SUBCASE("p=100 flips everything") {
        attacks::CausativeSelection sel = attacks::causative_select(sub, cands, 100.0);
        CHECK(sel.flip_indices.size() == 10);
    }

    SUBCASE("equal scores tie toward lower indices") {
        Dataset flat;
        for (int i = 0; i < 10; ++i) flat.add({0.0}, 1);
        attacks::CausativeSelection sel = attacks::causative_select(sub, flat, 40.0);
        CHECK(sel.top_count == 2);
        CHECK(sel.bottom_count == 2);
        // top picks 0,1 by index; bottom then picks 2,3 from the rest
        CHECK(sel.flip_indices == std::vector<std::size_t>({0, 1, 2, 3}));
    }

    SUBCASE("rejects out-of-range rates and empty candidate sets") {
        CHECK_THROWS_AS(attacks::causative_select(sub, cands, 0.0), ValidationError);
        CHECK_THROWS_AS(attacks::causative_select(sub, cands, 101.0), ValidationError);
        CHECK_THROWS_AS(attacks::causative_select(sub, Dataset{}, 10.0), ValidationError);
    }
}

TEST_CASE("poisoning with agreeing labels leaves the target unchanged") {
    Dataset train = separable_counts(60, 18);
    TargetClassifier target = train_mock_target(train, TargetKind::naive_bayes);
    Dataset eval = separable_counts(40, 19);

    // "poison" that actually repeats the training labels verbatim
    DivergenceReport r = attacks::evaluate_causative(target, train, train, eval);
    CHECK(r.m1 == 0);
    CHECK(r.m2 == 0);

    // flipping every label moves the retrained target a lot
    Dataset flipped = train;
    for (auto& s : flipped.samples) s.label = 3 - s.label;
    DivergenceReport f = attacks::evaluate_causative(target, train, flipped, eval);
    CHECK(f.d() > 0.0);
}

TEST_CASE("evasion picks scores nearest the threshold") {
    Dataset cands;
    // scores are strictly increasing in the feature
    for (double x : {-0.40, -0.002, 0.30, 0.001, 0.25}) cands.add({x}, 1);
    nn::MlpModel sub = score_passthrough();

    attacks::EvasionSelection one =
        attacks::evasion_select(sub, cands, attacks::EvasionMode::max_error, 1, 0.5);
    REQUIRE(one.indices.size() == 1);
    CHECK(one.indices[0] == 3);  // x=0.001 sits closest to score 0.5

    attacks::EvasionSelection three =
        attacks::evasion_select(sub, cands, attacks::EvasionMode::max_error, 3, 0.5);
    CHECK(three.indices == std::vector<std::size_t>({3, 1, 4}));  // 0.001, -0.002, 0.25
    // selected list carries the substitute's scores, closest first
    REQUIRE(three.selected.size() == 3);
    double prev = 0.0;
    for (const auto& s : three.selected) {
        double dist = std::abs(s.score - 0.5);
        CHECK(dist >= prev);
        prev = dist;
    }

    SUBCASE("ties break toward the lower index") {
        Dataset flat;
        for (int i = 0; i < 4; ++i) flat.add({0.0}, 1);
        attacks::EvasionSelection t =
            attacks::evasion_select(sub, flat, attacks::EvasionMode::max_error, 2, 0.5);
        CHECK(t.indices == std::vector<std::size_t>({0, 1}));
    }

    SUBCASE("targeted mode filters by the substitute's label") {
        attacks::EvasionSelection t = attacks::evasion_select(
            sub, cands, attacks::EvasionMode::targeted, 2, 0.5, 1, 2);
        for (std::size_t idx : t.indices)
            CHECK(nn::predict_with_score(sub, cands.samples[idx].features).label == 2);
        // candidates with positive features score above 0.5: indices 2,3,4
        CHECK(t.indices == std::vector<std::size_t>({3, 4}));

        try {
            attacks::evasion_select(sub, cands, attacks::EvasionMode::targeted, 4, 0.5, 1, 2);
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("3") != std::string::npos);  // available count
        }
    }

    SUBCASE("asking for more than the pool holds is an error") {
        CHECK_THROWS_AS(
            attacks::evasion_select(sub, cands, attacks::EvasionMode::max_error, 6, 0.5),
            ValidationError);
        CHECK_THROWS_AS(
            attacks::evasion_select(sub, Dataset{}, attacks::EvasionMode::max_error, 1, 0.5),
            ValidationError);
    }
}

TEST_CASE("evasion evaluation compares against a seeded random baseline") {
    Dataset train = separable_counts(60, 22);
    TargetClassifier target = train_mock_target(train, TargetKind::naive_bayes);
    Dataset cands = separable_counts(50, 23);
    std::vector<int> truth;
    for (const auto& s : cands.samples) truth.push_back(s.label);

    nn::TrainConfig cfg;
    cfg.epochs = 30;
    cfg.learning_rate = 0.3;
    cfg.seed = 9;
    Dataset labeled = cands;
    for (auto& s : labeled.samples) s.label = target.classify(s.features).label;
    nn::MlpModel sub = nn::train(nn::make_classifier_mlp(3, 1, 6), labeled, cfg).model;

    attacks::EvasionSelection sel =
        attacks::evasion_select(sub, cands, attacks::EvasionMode::max_error, 10, 0.5);
    attacks::EvasionEvaluation ev = attacks::evaluate_evasion(target, cands, truth, sel, 31);
    REQUIRE(ev.selected_error.has_value());
    REQUIRE(ev.baseline_error.has_value());
    CHECK(ev.baseline_indices.size() == 10);
    CHECK(*ev.selected_error >= 0.0);
    CHECK(*ev.selected_error <= 1.0);

    attacks::EvasionEvaluation ev2 = attacks::evaluate_evasion(target, cands, truth, sel, 31);
    CHECK(ev2.baseline_indices == ev.baseline_indices);
    CHECK(*ev2.baseline_error == *ev.baseline_error);

    attacks::EvasionSelection empty_sel;
    attacks::EvasionEvaluation none =
        attacks::evaluate_evasion(target, cands, truth, empty_sel, 31);
    CHECK_FALSE(none.selected_error.has_value());
    CHECK_FALSE(none.baseline_error.has_value());

    CHECK_THROWS_AS(attacks::evaluate_evasion(target, cands, {}, sel, 31), ValidationError);
    std::vector<int> short_truth(10, 1);
    CHECK_THROWS_AS(attacks::evaluate_evasion(target, cands, short_truth, sel, 31),
                    ValidationError);
}
