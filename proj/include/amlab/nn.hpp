#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "amlab/dataset.hpp"
#include "amlab/matrix.hpp"
#include "amlab/rng.hpp"

namespace amlab::nn {

enum class Activation : std::uint8_t {
    sigmoid = 0,
    relu = 1,
    tanh = 2,
    softmax = 3,
    linear = 4,
};

enum class Optimizer : std::uint8_t {
    sgd_momentum = 0,
    adam = 1,
};

struct LayerSpec {
    std::size_t input_dim = 0;
    std::size_t output_dim = 0;
    Activation activation = Activation::sigmoid;
};

// Per-feature affine transform applied before the first layer:
// x' = (x - shift) * scale
struct Normalizer {
    Vector shift;
    Vector scale;
};

struct MlpModel {
    std::vector<LayerSpec> layers;
    std::vector<Matrix> weights;  // per layer, output_dim x input_dim
    std::vector<Vector> biases;   // per layer, output_dim
    std::optional<Normalizer> input_normalizer;
    double threshold = 0.5;  // score threshold for predict_with_score

    std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().input_dim; }
    std::size_t output_dim() const { return layers.empty() ? 0 : layers.back().output_dim; }

    // Dim chaining, shape agreement, softmax only last, finite parameters.
    void validate() const;
    bool same_parameters(const MlpModel& o) const;
};

// Zero-initialized model from layer specs.
MlpModel make_mlp(const std::vector<LayerSpec>& layers);
// input -> hidden_layers x neurons (hidden_act) -> 2-way softmax head.
MlpModel make_classifier_mlp(std::size_t input_dim, std::size_t hidden_layers, std::size_t neurons,
                             Activation hidden_act = Activation::sigmoid);
// Draw weights and biases from uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)),
// scaled by weight_scale.  Used by train(); exposed for custom loops.
void initialize_parameters(MlpModel& model, Rng& rng, double weight_scale = 1.0);

struct TrainConfig {
    std::size_t epochs = 10;
    std::size_t minibatch_size = 20;
    double learning_rate = 0.1;
    Optimizer optimizer = Optimizer::sgd_momentum;
    double momentum = 0.9;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    double weight_scale = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

// Momentum velocity or Adam moment accumulators, shaped like the model.
struct OptimizerState {
    std::vector<Matrix> w_m1, w_m2;
    std::vector<Vector> b_m1, b_m2;
    std::uint64_t step = 0;

    static OptimizerState zeros_like(const MlpModel& model, Optimizer opt);
};

struct ForwardTrace {
    Matrix input;             // after the normalizer, input_dim x batch
    std::vector<Matrix> pre;  // pre-activations per layer
    std::vector<Matrix> act;  // activations per layer
    const Matrix& output() const { return act.back(); }
};

struct Gradients {
    std::vector<Matrix> w;
    std::vector<Vector> b;
    Matrix input;  // dL/d(first-layer input), post-normalizer space
};

// Single-sample forward pass; returns final-layer activations.
Vector forward(const MlpModel& model, const Features& input);
// Batched: inputs are matrix columns.
Matrix forward_batch(const MlpModel& model, const Matrix& inputs);
ForwardTrace forward_trace(const MlpModel& model, const Matrix& inputs);

// -log(p[true_class]) with the probability floored at 1e-12.
double cross_entropy(const Vector& probabilities, std::size_t true_class);
inline constexpr double kProbabilityFloor = 1e-12;

// Exact gradients of cross_entropy(forward(x)) for a softmax-headed model.
Gradients backward(const MlpModel& model, const Features& input, std::size_t true_class);
// General path: caller supplies dL/d(pre-activation) of the last layer,
// one column per batch element.
Gradients backward_from_output_delta(const MlpModel& model, const ForwardTrace& trace,
                                     const Matrix& output_delta);
// Convert dL/d(final activations) into the final pre-activation delta.
// Valid for sigmoid/relu/tanh/linear heads (softmax heads pair with
// cross-entropy and never need this).
Matrix output_grad_to_delta(const MlpModel& model, const ForwardTrace& trace, const Matrix& dl_dout);

// v' = momentum * v + g;  p' = p - lr * v'
void sgd_momentum_step(MlpModel& model, const Gradients& grads, OptimizerState& state,
                       double learning_rate, double momentum);
// Adam with bias-corrected moments; the step counter increments first.
void adam_step(MlpModel& model, const Gradients& grads, OptimizerState& state, double learning_rate,
               double beta1, double beta2, double epsilon);
// Dispatch on config.optimizer.
void optimizer_step(MlpModel& model, const Gradients& grads, OptimizerState& state,
                    const TrainConfig& config);

// Min-max per feature onto [0,1]; constant features map to 0.
Normalizer fit_minmax_normalizer(const Dataset& data);

struct TrainResult {
    MlpModel model;
    std::vector<double> loss_history;  // mean cross-entropy per epoch
};

// Deterministic minibatch training. The input model supplies the
// architecture and threshold; weights and biases are re-drawn from
// uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) scaled by config.weight_scale,
// and the input normalizer is fitted on the full training set before the
// first epoch.
TrainResult train(const MlpModel& architecture, const Dataset& data, const TrainConfig& config);

struct Prediction {
    int label;     // 1 or 2
    double score;  // probability of label 2
};

// Requires a 2-way softmax head. score < threshold -> label 1, else label 2.
Prediction predict_with_score(const MlpModel& model, const Features& input);
Prediction predict_with_score(const MlpModel& model, const Features& input, double threshold);

// Versioned binary model format, little-endian, byte-stable across
// save/load/save. Layout:
//   "AMLM" | u32 version=1 | u32 n_layers
//   per layer: u32 input_dim | u32 output_dim | u8 activation
//   f64 threshold | u8 has_normalizer
//   if normalizer: u32 dim | f64 shift[dim] | f64 scale[dim]
//   per layer: f64 weights[output_dim*input_dim] row-major | f64 bias[output_dim]
void save_model(const MlpModel& model, const std::string& path);
MlpModel load_model(const std::string& path);
void write_model(const MlpModel& model, std::ostream& os);
MlpModel read_model(std::istream& is);

}  // namespace amlab::nn
