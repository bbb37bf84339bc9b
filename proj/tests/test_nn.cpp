#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "amlab/dataset.hpp"
#include "amlab/nn.hpp"
#include "amlab/rng.hpp"

using namespace amlab;
using nn::Activation;

namespace {

nn::MlpModel identity_model() {
    nn::MlpModel m = nn::make_mlp({{2, 2, Activation::linear}});
    m.weights[0](0, 0) = 1.0;
    m.weights[0](1, 1) = 1.0;
    return m;
}

// Two well-separated Gaussian blobs, labels 1 and 2.
Dataset blob_dataset(std::size_t per_class, std::uint64_t seed, double spread = 0.5) {
    Rng rng(seed);
    Dataset d;
    for (std::size_t i = 0; i < per_class; ++i)
        d.add({-2.0 + spread * rng.normal(), -2.0 + spread * rng.normal()}, 1);
    for (std::size_t i = 0; i < per_class; ++i)
        d.add({2.0 + spread * rng.normal(), 2.0 + spread * rng.normal()}, 2);
    return d;
}

double loss_at(const nn::MlpModel& model, const Features& x, std::size_t cls) {
    return nn::cross_entropy(nn::forward(model, x), cls);
}

// Central-difference gradient check over every parameter.
void check_gradients(nn::MlpModel model, const Features& x, std::size_t cls) {
    const double h = 1e-5;
    nn::Gradients g = nn::backward(model, x, cls);
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        for (std::size_t i = 0; i < model.weights[l].data.size(); ++i) {
            double saved = model.weights[l].data[i];
            model.weights[l].data[i] = saved + h;
            double up = loss_at(model, x, cls);
            model.weights[l].data[i] = saved - h;
            double dn = loss_at(model, x, cls);
            model.weights[l].data[i] = saved;
            double fd = (up - dn) / (2.0 * h);
            CHECK(std::abs(g.w[l].data[i] - fd) <= 1e-6 + 1e-4 * std::abs(fd));
        }
        for (std::size_t i = 0; i < model.biases[l].size(); ++i) {
            double saved = model.biases[l][i];
            model.biases[l][i] = saved + h;
            double up = loss_at(model, x, cls);
            model.biases[l][i] = saved - h;
            double dn = loss_at(model, x, cls);
            model.biases[l][i] = saved;
            double fd = (up - dn) / (2.0 * h);
            CHECK(std::abs(g.b[l][i] - fd) <= 1e-6 + 1e-4 * std::abs(fd));
        }
    }
}

}  // namespace

TEST_CASE("identity network reproduces its input") {
    nn::MlpModel m = identity_model();
    Vector out = nn::forward(m, {3.5, -1.25});
    CHECK(out[0] == 3.5);
    CHECK(out[1] == -1.25);

    Matrix batch(2, 3);
    batch(0, 0) = 1;
    batch(1, 1) = 2;
    batch(0, 2) = -4;
    Matrix outs = nn::forward_batch(m, batch);
    CHECK(outs == batch);
}

TEST_CASE("zero-weight softmax head is maximally uncertain") {
    nn::MlpModel m = nn::make_mlp({{3, 2, Activation::softmax}});
    Vector p = nn::forward(m, {1.0, -2.0, 0.5});
    CHECK(p[0] == 0.5);
    CHECK(p[1] == 0.5);
}

TEST_CASE("cross entropy reference values") {
    CHECK(nn::cross_entropy({0.5, 0.5}, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(nn::cross_entropy({1.0, 0.0}, 0) == 0.0);
    // probability floor caps the loss instead of producing inf
    CHECK(nn::cross_entropy({0.0, 1.0}, 0) ==
          doctest::Approx(-std::log(nn::kProbabilityFloor)).epsilon(1e-15));
}

TEST_CASE("softmax cross-entropy backward on a worked example") {
    // 1 -> 2 softmax, all parameters zero, input 1.0, true class 0.
    // p = (0.5, 0.5), so dL/dz = p - onehot = (-0.5, +0.5).
    nn::MlpModel m = nn::make_mlp({{1, 2, Activation::softmax}});
    nn::Gradients g = nn::backward(m, {1.0}, 0);
    CHECK(g.w[0](0, 0) == -0.5);
    CHECK(g.w[0](1, 0) == 0.5);
    CHECK(g.b[0][0] == -0.5);
    CHECK(g.b[0][1] == 0.5);
    CHECK(g.input(0, 0) == 0.0);  // W = 0 blocks the input gradient
}

TEST_CASE("analytic gradients agree with finite differences") {
    Rng rng(7);
    SUBCASE("sigmoid hidden layer") {
        nn::MlpModel m = nn::make_mlp(
            {{3, 4, Activation::sigmoid}, {4, 2, Activation::softmax}});
        nn::initialize_parameters(m, rng);
        check_gradients(m, {0.3, -0.8, 1.1}, 1);
    }
    SUBCASE("relu and tanh stack") {
        nn::MlpModel m = nn::make_mlp({{2, 5, Activation::relu},
                                       {5, 4, Activation::tanh},
                                       {4, 2, Activation::softmax}});
        nn::initialize_parameters(m, rng);
        check_gradients(m, {0.9, -0.4}, 0);
    }
}

TEST_CASE("sgd momentum follows the closed form") {
    nn::MlpModel m = nn::make_mlp({{1, 1, Activation::linear}});
    m.weights[0](0, 0) = 1.0;
    nn::OptimizerState st = nn::OptimizerState::zeros_like(m, nn::Optimizer::sgd_momentum);
    nn::Gradients g;
    g.w = {Matrix(1, 1, 1.0)};
    g.b = {Vector(1, 0.0)};

    nn::sgd_momentum_step(m, g, st, 0.1, 0.9);
    CHECK(m.weights[0](0, 0) == doctest::Approx(0.9).epsilon(1e-12));
    nn::sgd_momentum_step(m, g, st, 0.1, 0.9);
    // v2 = 0.9 * 1 + 1 = 1.9, p2 = 0.9 - 0.19 = 0.71
    CHECK(m.weights[0](0, 0) == doctest::Approx(0.71).epsilon(1e-12));
    CHECK(m.biases[0][0] == 0.0);
}

TEST_CASE("adam follows the closed form") {
    const double lr = 0.001, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    nn::MlpModel m = nn::make_mlp({{1, 1, Activation::linear}});
    m.weights[0](0, 0) = 1.0;
    nn::OptimizerState st = nn::OptimizerState::zeros_like(m, nn::Optimizer::adam);
    nn::Gradients g;
    g.w = {Matrix(1, 1, 1.0)};
    g.b = {Vector(1, 0.0)};

    nn::adam_step(m, g, st, lr, b1, b2, eps);
    // bias-corrected moments are exactly 1 after the first unit-gradient step
    CHECK(m.weights[0](0, 0) == doctest::Approx(1.0 - lr / (1.0 + eps)).epsilon(1e-12));
    CHECK(st.step == 1);

    SUBCASE("zero gradient from a fresh state is an exact no-op") {
        nn::MlpModel m2 = nn::make_mlp({{1, 1, Activation::linear}});
        m2.weights[0](0, 0) = 0.7;
        nn::OptimizerState st2 = nn::OptimizerState::zeros_like(m2, nn::Optimizer::adam);
        nn::Gradients z;
        z.w = {Matrix(1, 1, 0.0)};
        z.b = {Vector(1, 0.0)};
        nn::adam_step(m2, z, st2, lr, b1, b2, eps);
        CHECK(m2.weights[0](0, 0) == 0.7);
    }

    SUBCASE("constant gradient converges to a step of lr") {
        double prev = m.weights[0](0, 0);
        double step_size = 0.0;
        for (int i = 0; i < 10000; ++i) {
            nn::adam_step(m, g, st, lr, b1, b2, eps);
            step_size = prev - m.weights[0](0, 0);
            prev = m.weights[0](0, 0);
        }
        CHECK(std::abs(step_size - lr) <= 1e-3 * lr);
    }
}

TEST_CASE("minmax normalizer maps the coordinate range onto [0,1]") {
    Dataset d;
    d.add({0.0, 5.0}, 1);
    d.add({10.0, 5.0}, 2);
    nn::Normalizer n = nn::fit_minmax_normalizer(d);
    CHECK(n.shift[0] == 0.0);
    CHECK(n.scale[0] == 0.1);
    CHECK(n.shift[1] == 5.0);
    CHECK(n.scale[1] == 1.0);  // constant feature: the shift alone sends it to 0

    nn::MlpModel m = identity_model();
    m.input_normalizer = n;
    Vector out = nn::forward(m, {10.0, 5.0});
    CHECK(out[0] == 1.0);
    CHECK(out[1] == 0.0);
}

TEST_CASE("training separates two gaussian blobs") {
    Dataset d = blob_dataset(100, 11);
    nn::MlpModel arch = nn::make_classifier_mlp(2, 1, 8);
    nn::TrainConfig cfg;
    cfg.epochs = 60;
    cfg.learning_rate = 0.5;
    cfg.seed = 3;
    nn::TrainResult r = nn::train(arch, d, cfg);

    std::size_t correct = 0;
    for (const auto& s : d.samples)
        if (nn::predict_with_score(r.model, s.features).label == s.label) ++correct;
    CHECK(double(correct) / double(d.samples.size()) >= 0.95);

    CHECK(r.loss_history.size() == cfg.epochs);
    double first = std::accumulate(r.loss_history.begin(), r.loss_history.begin() + 10, 0.0) / 10.0;
    double last = std::accumulate(r.loss_history.end() - 10, r.loss_history.end(), 0.0) / 10.0;
    CHECK(first >= last);
}

TEST_CASE("training is bitwise reproducible per seed") {
    Dataset d = blob_dataset(40, 21);
    nn::MlpModel arch = nn::make_classifier_mlp(2, 1, 6);
    nn::TrainConfig cfg;
    cfg.epochs = 5;
    cfg.seed = 99;
    nn::TrainResult a = nn::train(arch, d, cfg);
    nn::TrainResult b = nn::train(arch, d, cfg);
    CHECK(a.model.same_parameters(b.model));
    CHECK(a.loss_history == b.loss_history);

    cfg.seed = 100;
    nn::TrainResult c = nn::train(arch, d, cfg);
    CHECK_FALSE(a.model.same_parameters(c.model));
}

TEST_CASE("training config validation") {
    Dataset d = blob_dataset(10, 5);
    nn::MlpModel arch = nn::make_classifier_mlp(2, 1, 4);
    nn::TrainConfig cfg;
    cfg.epochs = 0;
    CHECK_THROWS_AS(nn::train(arch, d, cfg), ValidationError);
    cfg.epochs = 1;
    cfg.minibatch_size = 0;
    CHECK_THROWS_AS(nn::train(arch, d, cfg), ValidationError);
    cfg.minibatch_size = 20;
    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(nn::train(arch, d, cfg), ValidationError);
}

TEST_CASE("diverging runs raise a typed error that names the epoch") {
    // The clamped cross-entropy keeps saturated networks at a finite
    // loss no matter how large the step, so the reachable non-finite
    // path is arithmetic overflow: weights drawn at the edge of double
    // range turn the first forward pass into NaN.
    Dataset d = blob_dataset(40, 31);
    nn::MlpModel arch = nn::make_classifier_mlp(2, 2, 10, Activation::relu);
    nn::TrainConfig cfg;
    cfg.epochs = 50;
    cfg.learning_rate = 0.1;
    cfg.weight_scale = std::numeric_limits<double>::max();
    cfg.seed = 1;
    try {
        nn::train(arch, d, cfg);
        FAIL("expected TrainingDivergedError");
    } catch (const TrainingDivergedError& e) {
        CHECK(e.epoch >= 1);
        CHECK(std::string(e.what()).find(std::to_string(e.epoch)) != std::string::npos);
    }
}

TEST_CASE("prediction thresholding") {
    nn::MlpModel m = nn::make_mlp({{1, 2, Activation::softmax}});
    nn::Prediction p = nn::predict_with_score(m, {0.0});
    CHECK(p.score == 0.5);
    CHECK(p.label == 2);  // score == threshold is not below it

    CHECK(nn::predict_with_score(m, {0.0}, 0.9).label == 1);
    m.threshold = 0.4;
    CHECK(nn::predict_with_score(m, {0.0}).label == 2);
    m.threshold = 0.51;
    CHECK(nn::predict_with_score(m, {0.0}).label == 1);

    // tilt the head toward class 2
    m.threshold = 0.5;
    m.biases[0][1] = 2.0;
    nn::Prediction q = nn::predict_with_score(m, {0.0});
    CHECK(q.label == 2);
    CHECK(q.score == doctest::Approx(std::exp(2.0) / (1.0 + std::exp(2.0))).epsilon(1e-12));
}

TEST_CASE("model files round-trip byte for byte") {
    Rng rng(55);
    nn::MlpModel m = nn::make_mlp(
        {{3, 5, Activation::relu}, {5, 2, Activation::softmax}});
    nn::initialize_parameters(m, rng);
    m.threshold = 0.37;
    m.input_normalizer = nn::Normalizer{{1.0, 2.0, 3.0}, {0.5, 0.25, 0.125}};

    std::ostringstream first;
    nn::write_model(m, first);
    std::istringstream back(first.str());
    nn::MlpModel loaded = nn::read_model(back);
    CHECK(loaded.same_parameters(m));
    CHECK(loaded.threshold == m.threshold);
    REQUIRE(loaded.input_normalizer.has_value());
    CHECK(loaded.input_normalizer->shift == m.input_normalizer->shift);
    CHECK(loaded.input_normalizer->scale == m.input_normalizer->scale);

    std::ostringstream second;
    nn::write_model(loaded, second);
    CHECK(first.str() == second.str());

    auto path = std::filesystem::temp_directory_path() / "amlab_test_model.amlm";
    nn::save_model(m, path.string());
    nn::MlpModel from_disk = nn::load_model(path.string());
    CHECK(from_disk.same_parameters(m));
    std::filesystem::remove(path);
}

TEST_CASE("model validation rejects inconsistent shapes") {
    nn::MlpModel m = nn::make_mlp({{2, 3, Activation::sigmoid}, {3, 2, Activation::softmax}});
    CHECK_NOTHROW(m.validate());
    m.weights[0].resize(2, 2);
    CHECK_THROWS_AS(m.validate(), ValidationError);

    CHECK_THROWS_AS(nn::make_mlp({{2, 2, Activation::softmax}, {2, 2, Activation::sigmoid}}),
                    ValidationError);  // softmax only as the head
    CHECK_THROWS_AS(nn::make_mlp({{2, 3, Activation::sigmoid}, {4, 2, Activation::softmax}}),
                    ValidationError);  // dims must chain
}
