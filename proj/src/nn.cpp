#include "amlab/nn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "amlab/errors.hpp"
#include "amlab/io.hpp"
#include "amlab/kernels.hpp"
#include "amlab/rng.hpp"

namespace amlab::nn {

namespace {

void apply_activation(Activation act, const Matrix& z, Matrix& a) {
    switch (act) {
        case Activation::sigmoid: kernels::sigmoid(z, a); break;
        case Activation::relu: kernels::relu(z, a); break;
        case Activation::tanh: kernels::tanh_act(z, a); break;
        case Activation::softmax: kernels::softmax_cols(z, a); break;
        case Activation::linear: a = z; break;
    }
}

// delta currently holds dL/d(activation); turn it into dL/d(pre-activation).
void apply_activation_deriv(Activation act, const Matrix& z, const Matrix& a, Matrix& delta) {
    switch (act) {
        case Activation::sigmoid: kernels::sigmoid_deriv_mul(delta, a); break;
        case Activation::relu: kernels::relu_deriv_mul(delta, z); break;
        case Activation::tanh: kernels::tanh_deriv_mul(delta, a); break;
        case Activation::linear: break;
        case Activation::softmax:
            throw ValidationError("softmax derivative is only handled fused with cross-entropy");
    }
}

Matrix apply_normalizer(const MlpModel& model, const Matrix& inputs) {
    if (!model.input_normalizer) return inputs;
    const Normalizer& n = *model.input_normalizer;
    if (n.shift.size() != inputs.rows)
        throw ShapeError("normalizer dimension does not match input");
    Matrix out(inputs.rows, inputs.cols);
    for (std::size_t i = 0; i < inputs.rows; ++i)
        for (std::size_t j = 0; j < inputs.cols; ++j)
            out(i, j) = (inputs(i, j) - n.shift[i]) * n.scale[i];
    return out;
}

void check_input(const MlpModel& model, const Features& input) {
    if (input.size() != model.input_dim())
        throw ShapeError("input length " + std::to_string(input.size()) +
                         " does not match first layer input_dim " +
                         std::to_string(model.input_dim()));
    if (!all_finite(input)) throw ValidationError("non-finite input value");
}

}  // namespace

void MlpModel::validate() const {
    if (layers.empty()) throw ValidationError("model has no layers");
    if (weights.size() != layers.size() || biases.size() != layers.size())
        throw ShapeError("model parameter count does not match layer specs");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const LayerSpec& spec = layers[l];
        if (spec.input_dim < 1 || spec.output_dim < 1)
            throw ValidationError("layer dims must be >= 1");
        if (spec.activation == Activation::softmax && l + 1 != layers.size())
            throw ValidationError("softmax is only permitted as the final layer");
        if (l > 0 && layers[l - 1].output_dim != spec.input_dim)
            throw ShapeError("consecutive layer dims do not chain");
        if (weights[l].rows != spec.output_dim || weights[l].cols != spec.input_dim)
            throw ShapeError("weight matrix shape does not match layer spec");
        if (biases[l].size() != spec.output_dim)
            throw ShapeError("bias length does not match layer spec");
        if (!weights[l].all_finite() || !all_finite(biases[l]))
            throw ValidationError("non-finite model parameter");
    }
    if (input_normalizer) {
        if (input_normalizer->shift.size() != layers.front().input_dim ||
            input_normalizer->scale.size() != layers.front().input_dim)
            throw ShapeError("normalizer dimension does not match first layer");
    }
}

bool MlpModel::same_parameters(const MlpModel& o) const {
    if (weights.size() != o.weights.size()) return false;
    for (std::size_t l = 0; l < weights.size(); ++l)
        if (!(weights[l] == o.weights[l]) || biases[l] != o.biases[l]) return false;
    return true;
}

MlpModel make_mlp(const std::vector<LayerSpec>& layers) {
    MlpModel m;
    m.layers = layers;
    for (const LayerSpec& spec : layers) {
        m.weights.emplace_back(spec.output_dim, spec.input_dim);
        m.biases.emplace_back(spec.output_dim, 0.0);
    }
    m.validate();
    return m;
}

MlpModel make_classifier_mlp(std::size_t input_dim, std::size_t hidden_layers, std::size_t neurons,
                             Activation hidden_act) {
    std::vector<LayerSpec> specs;
    std::size_t in = input_dim;
    for (std::size_t i = 0; i < hidden_layers; ++i) {
        specs.push_back({in, neurons, hidden_act});
        in = neurons;
    }
    specs.push_back({in, 2, Activation::softmax});
    return make_mlp(specs);
}

void TrainConfig::validate() const {
    if (epochs < 1) throw ValidationError("epochs must be >= 1");
    if (minibatch_size < 1) throw ValidationError("minibatch_size must be >= 1");
    if (learning_rate <= 0.0) throw ValidationError("learning_rate must be positive");
    if (momentum < 0.0 || momentum >= 1.0) throw ValidationError("momentum must be in [0,1)");
    if (adam_beta1 <= 0.0 || adam_beta1 >= 1.0 || adam_beta2 <= 0.0 || adam_beta2 >= 1.0)
        throw ValidationError("adam betas must be in (0,1)");
    if (adam_epsilon <= 0.0) throw ValidationError("adam_epsilon must be positive");
    if (weight_scale <= 0.0) throw ValidationError("weight_scale must be positive");
}

OptimizerState OptimizerState::zeros_like(const MlpModel& model, Optimizer opt) {
    OptimizerState s;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        s.w_m1.emplace_back(model.weights[l].rows, model.weights[l].cols);
        s.b_m1.emplace_back(model.biases[l].size(), 0.0);
        if (opt == Optimizer::adam) {
            s.w_m2.emplace_back(model.weights[l].rows, model.weights[l].cols);
            s.b_m2.emplace_back(model.biases[l].size(), 0.0);
        }
    }
    return s;
}

ForwardTrace forward_trace(const MlpModel& model, const Matrix& inputs) {
    if (inputs.rows != model.input_dim())
        throw ShapeError("batch input rows do not match first layer input_dim");
    if (!inputs.all_finite()) throw ValidationError("non-finite input value");
    ForwardTrace t;
    t.input = apply_normalizer(model, inputs);
    const Matrix* cur = &t.input;
    t.pre.resize(model.layers.size());
    t.act.resize(model.layers.size());
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        kernels::gemm_nn(model.weights[l], *cur, t.pre[l]);
        kernels::add_bias_cols(t.pre[l], model.biases[l]);
        apply_activation(model.layers[l].activation, t.pre[l], t.act[l]);
        cur = &t.act[l];
    }
    return t;
}

Matrix forward_batch(const MlpModel& model, const Matrix& inputs) {
    return forward_trace(model, inputs).act.back();
}

Vector forward(const MlpModel& model, const Features& input) {
    check_input(model, input);
    Matrix col(input.size(), 1);
    for (std::size_t i = 0; i < input.size(); ++i) col(i, 0) = input[i];
    Matrix out = forward_batch(model, col);
    Vector v(out.rows);
    for (std::size_t i = 0; i < out.rows; ++i) v[i] = out(i, 0);
    return v;
}

double cross_entropy(const Vector& probabilities, std::size_t true_class) {
    if (true_class >= probabilities.size())
        throw ValidationError("cross_entropy: label index out of range");
    double sum = 0.0;
    for (double p : probabilities) sum += p;
    if (std::fabs(sum - 1.0) > 1e-6)
        throw ValidationError("cross_entropy: probabilities do not sum to 1");
    const double p = std::max(probabilities[true_class], kProbabilityFloor);
    return -std::log(p);
}

Gradients backward_from_output_delta(const MlpModel& model, const ForwardTrace& trace,
                                     const Matrix& output_delta) {
    const std::size_t L = model.layers.size();
    if (output_delta.rows != model.output_dim() || output_delta.cols != trace.input.cols)
        throw ShapeError("output delta shape does not match model/batch");
    Gradients g;
    g.w.resize(L);
    g.b.resize(L);
    Matrix delta = output_delta;
    Matrix prev_delta;
    for (std::size_t l = L; l-- > 0;) {
        const Matrix& layer_input = (l == 0) ? trace.input : trace.act[l - 1];
        kernels::gemm_nt(delta, layer_input, g.w[l]);
        kernels::row_sums(delta, g.b[l]);
        // dL/d(layer input)
        kernels::gemm_tn(model.weights[l], delta, prev_delta);
        if (l > 0) {
            apply_activation_deriv(model.layers[l - 1].activation, trace.pre[l - 1],
                                   trace.act[l - 1], prev_delta);
            delta = std::move(prev_delta);
            prev_delta = Matrix{};
        } else {
            g.input = std::move(prev_delta);
        }
    }
    return g;
}

Matrix output_grad_to_delta(const MlpModel& model, const ForwardTrace& trace, const Matrix& dl_dout) {
    Matrix delta = dl_dout;
    apply_activation_deriv(model.layers.back().activation, trace.pre.back(), trace.act.back(), delta);
    return delta;
}

Gradients backward(const MlpModel& model, const Features& input, std::size_t true_class) {
    if (model.layers.back().activation != Activation::softmax)
        throw ValidationError("backward: final layer must be softmax");
    if (true_class >= model.output_dim())
        throw ValidationError("backward: label index out of range");
    check_input(model, input);
    Matrix col(input.size(), 1);
    for (std::size_t i = 0; i < input.size(); ++i) col(i, 0) = input[i];
    ForwardTrace trace = forward_trace(model, col);
    // Fused softmax + cross-entropy: delta = p - onehot
    Matrix delta = trace.act.back();
    delta(true_class, 0) -= 1.0;
    return backward_from_output_delta(model, trace, delta);
}

namespace {

void check_state_shapes(const MlpModel& model, const Gradients& grads, const OptimizerState& state,
                        bool adam) {
    const std::size_t L = model.layers.size();
    if (grads.w.size() != L || grads.b.size() != L || state.w_m1.size() != L ||
        state.b_m1.size() != L || (adam && (state.w_m2.size() != L || state.b_m2.size() != L)))
        throw ShapeError("optimizer: layer counts disagree");
    for (std::size_t l = 0; l < L; ++l) {
        if (!grads.w[l].same_shape(model.weights[l]) || grads.b[l].size() != model.biases[l].size())
            throw ShapeError("optimizer: gradient shapes disagree with parameters");
        if (!state.w_m1[l].same_shape(model.weights[l]) ||
            state.b_m1[l].size() != model.biases[l].size())
            throw ShapeError("optimizer: state shapes disagree with parameters");
        if (adam && (!state.w_m2[l].same_shape(model.weights[l]) ||
                     state.b_m2[l].size() != model.biases[l].size()))
            throw ShapeError("optimizer: adam state shapes disagree with parameters");
    }
}

}  // namespace

void sgd_momentum_step(MlpModel& model, const Gradients& grads, OptimizerState& state,
                       double learning_rate, double momentum) {
    check_state_shapes(model, grads, state, false);
    state.step += 1;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        auto& w = model.weights[l].data;
        auto& vw = state.w_m1[l].data;
        const auto& gw = grads.w[l].data;
        for (std::size_t i = 0; i < w.size(); ++i) {
            vw[i] = momentum * vw[i] + gw[i];
            w[i] -= learning_rate * vw[i];
        }
        auto& b = model.biases[l];
        auto& vb = state.b_m1[l];
        const auto& gb = grads.b[l];
        for (std::size_t i = 0; i < b.size(); ++i) {
            vb[i] = momentum * vb[i] + gb[i];
            b[i] -= learning_rate * vb[i];
        }
    }
}

void adam_step(MlpModel& model, const Gradients& grads, OptimizerState& state, double learning_rate,
               double beta1, double beta2, double epsilon) {
    check_state_shapes(model, grads, state, true);
    state.step += 1;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
    auto update = [&](double& p, double g, double& m1, double& m2) {
        m1 = beta1 * m1 + (1.0 - beta1) * g;
        m2 = beta2 * m2 + (1.0 - beta2) * g * g;
        const double mhat = m1 / c1;
        const double vhat = m2 / c2;
        p -= learning_rate * mhat / (std::sqrt(vhat) + epsilon);
    };
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        auto& w = model.weights[l].data;
        const auto& gw = grads.w[l].data;
        for (std::size_t i = 0; i < w.size(); ++i)
            update(w[i], gw[i], state.w_m1[l].data[i], state.w_m2[l].data[i]);
        auto& b = model.biases[l];
        const auto& gb = grads.b[l];
        for (std::size_t i = 0; i < b.size(); ++i)
            update(b[i], gb[i], state.b_m1[l][i], state.b_m2[l][i]);
    }
}

void optimizer_step(MlpModel& model, const Gradients& grads, OptimizerState& state,
                    const TrainConfig& config) {
    if (config.optimizer == Optimizer::sgd_momentum)
        sgd_momentum_step(model, grads, state, config.learning_rate, config.momentum);
    else
        adam_step(model, grads, state, config.learning_rate, config.adam_beta1, config.adam_beta2,
                  config.adam_epsilon);
}

Normalizer fit_minmax_normalizer(const Dataset& data) {
    if (data.empty()) throw ValidationError("cannot fit normalizer on empty dataset");
    const std::size_t dim = data.feature_dim;
    Vector lo(dim, 0.0), hi(dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
        lo[i] = hi[i] = data.samples[0].features[i];
    }
    for (const auto& s : data.samples) {
        for (std::size_t i = 0; i < dim; ++i) {
            lo[i] = std::min(lo[i], s.features[i]);
            hi[i] = std::max(hi[i], s.features[i]);
        }
    }
    Normalizer n;
    n.shift = lo;
    n.scale.resize(dim);
    for (std::size_t i = 0; i < dim; ++i)
        n.scale[i] = hi[i] > lo[i] ? 1.0 / (hi[i] - lo[i]) : 1.0;
    return n;
}

void initialize_parameters(MlpModel& model, Rng& rng, double weight_scale) {
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const double limit = 1.0 / std::sqrt(static_cast<double>(model.layers[l].input_dim));
        for (double& w : model.weights[l].data)
            w = rng.uniform(-limit, limit) * weight_scale;
        for (double& b : model.biases[l])
            b = rng.uniform(-limit, limit) * weight_scale;
    }
}

TrainResult train(const MlpModel& architecture, const Dataset& data, const TrainConfig& config) {
    config.validate();
    architecture.validate();
    if (data.empty()) throw ValidationError("train: dataset is empty");
    data.validate();
    if (data.feature_dim != architecture.input_dim())
        throw ShapeError("train: dataset dimension does not match model input");
    if (architecture.layers.back().activation != Activation::softmax)
        throw ValidationError("train: classifier model needs a softmax head");
    const std::size_t n_classes = architecture.output_dim();

    TrainResult result;
    result.model = architecture;
    Rng rng(config.seed);
    initialize_parameters(result.model, rng, config.weight_scale);
    result.model.input_normalizer = fit_minmax_normalizer(data);

    OptimizerState state = OptimizerState::zeros_like(result.model, config.optimizer);
    const std::size_t n = data.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < n; start += config.minibatch_size) {
            const std::size_t bs = std::min(config.minibatch_size, n - start);
            Matrix x(data.feature_dim, bs);
            std::vector<std::size_t> classes(bs);
            for (std::size_t j = 0; j < bs; ++j) {
                const LabeledSample& s = data.samples[order[start + j]];
                for (std::size_t i = 0; i < data.feature_dim; ++i) x(i, j) = s.features[i];
                classes[j] = static_cast<std::size_t>(s.label - 1);
                if (classes[j] >= n_classes)
                    throw ValidationError("train: label outside model classes");
            }
            ForwardTrace trace = forward_trace(result.model, x);
            // fused softmax + cross-entropy, averaged over the minibatch
            Matrix delta = trace.act.back();
            const double inv_bs = 1.0 / static_cast<double>(bs);
            for (std::size_t j = 0; j < bs; ++j) {
                const double p = std::max(delta(classes[j], j), kProbabilityFloor);
                loss_sum += -std::log(p);
                delta(classes[j], j) -= 1.0;
            }
            for (double& v : delta.data) v *= inv_bs;
            Gradients grads = backward_from_output_delta(result.model, trace, delta);
            optimizer_step(result.model, grads, state, config);
        }
        const double epoch_loss = loss_sum / static_cast<double>(n);
        if (!std::isfinite(epoch_loss))
            throw TrainingDivergedError(
                "training diverged (non-finite loss) at epoch " + std::to_string(epoch), epoch);
        result.loss_history.push_back(epoch_loss);
    }
    return result;
}

Prediction predict_with_score(const MlpModel& model, const Features& input) {
    return predict_with_score(model, input, model.threshold);
}

Prediction predict_with_score(const MlpModel& model, const Features& input, double threshold) {
    if (model.layers.back().activation != Activation::softmax || model.output_dim() != 2)
        throw ValidationError("predict_with_score needs a 2-way softmax head");
    Vector out = forward(model, input);
    const double score = out[1];
    // score < threshold -> label 1; ties go to label 2
    return Prediction{score < threshold ? 1 : 2, score};
}

// ---------------------------------------------------------------------------
// model file format
// ---------------------------------------------------------------------------

namespace {
constexpr char kModelMagic[4] = {'A', 'M', 'L', 'M'};
constexpr std::uint32_t kModelVersion = 1;
}  // namespace

void write_model(const MlpModel& model, std::ostream& os) {
    model.validate();
    bin::write_magic(os, kModelMagic);
    bin::write_u32(os, kModelVersion);
    bin::write_u32(os, static_cast<std::uint32_t>(model.layers.size()));
    for (const LayerSpec& spec : model.layers) {
        bin::write_u32(os, static_cast<std::uint32_t>(spec.input_dim));
        bin::write_u32(os, static_cast<std::uint32_t>(spec.output_dim));
        bin::write_u8(os, static_cast<std::uint8_t>(spec.activation));
    }
    bin::write_f64(os, model.threshold);
    bin::write_u8(os, model.input_normalizer ? 1 : 0);
    if (model.input_normalizer) {
        bin::write_u32(os, static_cast<std::uint32_t>(model.input_normalizer->shift.size()));
        bin::write_f64_array(os, model.input_normalizer->shift);
        bin::write_f64_array(os, model.input_normalizer->scale);
    }
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        bin::write_f64_array(os, model.weights[l].data);
        bin::write_f64_array(os, model.biases[l]);
    }
}

MlpModel read_model(std::istream& is) {
    bin::expect_magic(is, kModelMagic, "model");
    const std::uint32_t version = bin::read_u32(is);
    if (version != kModelVersion)
        throw IoError("unsupported model format version " + std::to_string(version));
    const std::uint32_t n_layers = bin::read_u32(is);
    MlpModel model;
    for (std::uint32_t l = 0; l < n_layers; ++l) {
        LayerSpec spec;
        spec.input_dim = bin::read_u32(is);
        spec.output_dim = bin::read_u32(is);
        const std::uint8_t act = bin::read_u8(is);
        if (act > 4) throw IoError("bad activation code in model file");
        spec.activation = static_cast<Activation>(act);
        model.layers.push_back(spec);
    }
    model.threshold = bin::read_f64(is);
    if (bin::read_u8(is) == 1) {
        const std::uint32_t dim = bin::read_u32(is);
        Normalizer n;
        n.shift = bin::read_f64_array(is, dim);
        n.scale = bin::read_f64_array(is, dim);
        model.input_normalizer = std::move(n);
    }
    for (const LayerSpec& spec : model.layers) {
        Matrix w(spec.output_dim, spec.input_dim);
        w.data = bin::read_f64_array(is, spec.output_dim * spec.input_dim);
        model.weights.push_back(std::move(w));
        model.biases.push_back(bin::read_f64_array(is, spec.output_dim));
    }
    model.validate();
    return model;
}

void save_model(const MlpModel& model, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write " + path);
    write_model(model, os);
    if (!os) throw IoError("write failed: " + path);
}

MlpModel load_model(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot read " + path);
    return read_model(is);
}

}  // namespace amlab::nn
