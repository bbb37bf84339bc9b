#include "amlab/gan.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "amlab/errors.hpp"
#include "amlab/io.hpp"
#include "amlab/rng.hpp"

namespace amlab::gan {

namespace {

constexpr double kLogFloor = 1e-12;

double clamped_log(double p) { return std::log(std::max(p, kLogFloor)); }

void one_hot_into(Matrix& m, std::size_t first_row, std::size_t col, int label) {
    m(first_row, col) = label == 1 ? 1.0 : 0.0;
    m(first_row + 1, col) = label == 2 ? 1.0 : 0.0;
}

}  // namespace

void GanConfig::validate() const {
    if (noise_dim == 0) throw ValidationError("gan: noise_dim must be >= 1");
    if (label_dim != 2) throw ValidationError("gan: label_dim must be 2");
    if (epochs == 0) throw ValidationError("gan: epochs must be >= 1");
    if (batch_size == 0) throw ValidationError("gan: batch_size must be >= 1");
    if (d_steps_per_g_step == 0)
        throw ValidationError("gan: d_steps_per_g_step must be >= 1");
    if (!(learning_rate > 0.0))
        throw ValidationError("gan: learning_rate must be positive");
    if (generator_hidden.empty() || discriminator_hidden.empty())
        throw ValidationError("gan: both networks need at least one hidden layer");
    for (std::size_t h : generator_hidden)
        if (h == 0) throw ValidationError("gan: generator hidden sizes must be >= 1");
    for (std::size_t h : discriminator_hidden)
        if (h == 0) throw ValidationError("gan: discriminator hidden sizes must be >= 1");
}

FeatureScaler FeatureScaler::fit(const Dataset& real) {
    real.validate();
    if (real.samples.empty())
        throw ValidationError("scaler: empty dataset");
    FeatureScaler s;
    s.fmin.assign(real.feature_dim, 0.0);
    s.fmax.assign(real.feature_dim, 0.0);
    for (std::size_t f = 0; f < real.feature_dim; ++f) {
        double lo = real.samples[0].features[f];
        double hi = lo;
        for (const auto& sample : real.samples) {
            lo = std::min(lo, sample.features[f]);
            hi = std::max(hi, sample.features[f]);
        }
        s.fmin[f] = lo;
        s.fmax[f] = hi;
    }
    return s;
}

Features FeatureScaler::to_unit(const Features& x) const {
    if (x.size() != dim())
        throw ShapeError("scaler: expected " + std::to_string(dim()) +
                         " features, got " + std::to_string(x.size()));
    Features u(x.size());
    for (std::size_t f = 0; f < x.size(); ++f) {
        double span = fmax[f] - fmin[f];
        u[f] = span > 0.0 ? -1.0 + 2.0 * (x[f] - fmin[f]) / span : 0.0;
    }
    return u;
}

Features FeatureScaler::from_unit(const Features& u) const {
    if (u.size() != dim())
        throw ShapeError("scaler: expected " + std::to_string(dim()) +
                         " values, got " + std::to_string(u.size()));
    Features x(u.size());
    for (std::size_t f = 0; f < u.size(); ++f) {
        double span = fmax[f] - fmin[f];
        double v = span > 0.0 ? fmin[f] + (u[f] + 1.0) * 0.5 * span : fmin[f];
        double lo = std::max(0.0, fmin[f]);
        double hi = std::max(lo, fmax[f]);
        v = std::clamp(v, lo, hi);
        x[f] = std::round(v);
    }
    return x;
}

std::size_t GanPair::noise_dim() const {
    return generator.input_dim() >= 2 ? generator.input_dim() - 2 : 0;
}

std::size_t GanPair::label_dim() const { return 2; }

double gan_value(const std::vector<double>& d_real, const std::vector<double>& d_fake) {
    if (d_real.empty() || d_fake.empty())
        throw ValidationError("gan_value: empty probability batch");
    double real_sum = 0.0;
    for (double p : d_real) real_sum += clamped_log(p);
    double fake_sum = 0.0;
    for (double p : d_fake) fake_sum += clamped_log(1.0 - p);
    return real_sum / static_cast<double>(d_real.size()) +
           fake_sum / static_cast<double>(d_fake.size());
}

double generator_objective(const std::vector<double>& d_fake) {
    if (d_fake.empty())
        throw ValidationError("generator_objective: empty probability batch");
    double sum = 0.0;
    for (double p : d_fake) sum += clamped_log(p);
    return sum / static_cast<double>(d_fake.size());
}

namespace {

nn::MlpModel build_generator(const GanConfig& cfg, std::size_t feature_dim) {
    std::vector<nn::LayerSpec> specs;
    std::size_t in = cfg.noise_dim + cfg.label_dim;
    for (std::size_t h : cfg.generator_hidden) {
        specs.push_back({in, h, nn::Activation::relu});
        in = h;
    }
    specs.push_back({in, feature_dim, nn::Activation::tanh});
    return nn::make_mlp(specs);
}

nn::MlpModel build_discriminator(const GanConfig& cfg, std::size_t feature_dim) {
    std::vector<nn::LayerSpec> specs;
    std::size_t in = feature_dim + cfg.label_dim;
    for (std::size_t h : cfg.discriminator_hidden) {
        specs.push_back({in, h, nn::Activation::relu});
        in = h;
    }
    specs.push_back({in, 1, nn::Activation::sigmoid});
    return nn::make_mlp(specs);
}

// Scaled real features + one-hot labels for minibatch `idx`.
Matrix real_columns(const Matrix& scaled, const std::vector<int>& labels,
                    const std::vector<std::size_t>& idx) {
    const std::size_t d = scaled.rows;
    Matrix out(d + 2, idx.size());
    for (std::size_t c = 0; c < idx.size(); ++c) {
        for (std::size_t f = 0; f < d; ++f) out(f, c) = scaled(f, idx[c]);
        one_hot_into(out, d, c, labels[idx[c]]);
    }
    return out;
}

// Noise batch z~N(0,I) with the given conditioning labels appended.
Matrix noise_columns(Rng& rng, std::size_t noise_dim, const std::vector<int>& batch_labels) {
    Matrix out(noise_dim + 2, batch_labels.size());
    for (std::size_t c = 0; c < batch_labels.size(); ++c) {
        for (std::size_t k = 0; k < noise_dim; ++k) out(k, c) = rng.normal();
        one_hot_into(out, noise_dim, c, batch_labels[c]);
    }
    return out;
}

Matrix with_labels(const Matrix& features, const std::vector<int>& labels) {
    Matrix out(features.rows + 2, features.cols);
    for (std::size_t c = 0; c < features.cols; ++c) {
        for (std::size_t f = 0; f < features.rows; ++f) out(f, c) = features(f, c);
        one_hot_into(out, features.rows, c, labels[c]);
    }
    return out;
}

}  // namespace

GanPair train_gan(const Dataset& real, const GanConfig& config) {
    config.validate();
    real.validate();
    if (real.samples.empty()) throw ValidationError("train_gan: empty dataset");
    if (real.feature_dim == 0) throw ValidationError("train_gan: zero feature dimension");
    if (!real.has_both_labels())
        throw ValidationError("train_gan: need samples from both classes");

    const std::size_t n = real.samples.size();
    const std::size_t d = real.feature_dim;
    const std::size_t bs = std::min(config.batch_size, n);

    GanPair gan;
    gan.scaler = FeatureScaler::fit(real);
    gan.generator = build_generator(config, d);
    gan.discriminator = build_discriminator(config, d);

    Matrix scaled(d, n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        Features u = gan.scaler.to_unit(real.samples[i].features);
        for (std::size_t f = 0; f < d; ++f) scaled(f, i) = u[f];
        labels[i] = real.samples[i].label;
    }

    Rng rng(config.seed);
    nn::initialize_parameters(gan.generator, rng);
    nn::initialize_parameters(gan.discriminator, rng);
    auto g_state = nn::OptimizerState::zeros_like(gan.generator, nn::Optimizer::adam);
    auto d_state = nn::OptimizerState::zeros_like(gan.discriminator, nn::Optimizer::adam);
    const double lr = config.learning_rate;
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double inv_bs = 1.0 / static_cast<double>(bs);

    gan.loss_history.reserve(config.epochs);
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        double d_loss_sum = 0.0;
        for (std::size_t step = 0; step < config.d_steps_per_g_step; ++step) {
            auto idx = rng.sample_indices(n, bs);
            std::vector<int> batch_labels(bs);
            for (std::size_t c = 0; c < bs; ++c) batch_labels[c] = labels[idx[c]];

            Matrix real_in = real_columns(scaled, labels, idx);
            Matrix g_in = noise_columns(rng, config.noise_dim, batch_labels);
            Matrix fake_feat = nn::forward_batch(gan.generator, g_in);

            Matrix fake_in = with_labels(fake_feat, batch_labels);
            Matrix d_in(d + 2, 2 * bs);
            for (std::size_t c = 0; c < bs; ++c)
                for (std::size_t f = 0; f < d + 2; ++f) {
                    d_in(f, c) = real_in(f, c);
                    d_in(f, bs + c) = fake_in(f, c);
                }

            auto trace = nn::forward_trace(gan.discriminator, d_in);
            const Matrix& p = trace.output();  // 1 x 2bs

            double loss = 0.0;
            Matrix delta(1, 2 * bs);
            for (std::size_t c = 0; c < bs; ++c) {
                double pr = p(0, c);
                double pf = p(0, bs + c);
                loss += -clamped_log(pr) - clamped_log(1.0 - pf);
                delta(0, c) = (pr - 1.0) * inv_bs;
                delta(0, bs + c) = pf * inv_bs;
            }
            loss *= inv_bs;
            d_loss_sum += loss;

            auto grads = nn::backward_from_output_delta(gan.discriminator, trace, delta);
            nn::adam_step(gan.discriminator, grads, d_state, lr, b1, b2, eps);
        }

        // Generator step: fresh labels, frozen discriminator.
        auto idx = rng.sample_indices(n, bs);
        std::vector<int> batch_labels(bs);
        for (std::size_t c = 0; c < bs; ++c) batch_labels[c] = labels[idx[c]];
        Matrix g_in = noise_columns(rng, config.noise_dim, batch_labels);
        auto g_trace = nn::forward_trace(gan.generator, g_in);
        Matrix fake_in = with_labels(g_trace.output(), batch_labels);
        auto d_trace = nn::forward_trace(gan.discriminator, fake_in);
        const Matrix& p = d_trace.output();

        double g_loss = 0.0;
        Matrix d_delta(1, bs);
        for (std::size_t c = 0; c < bs; ++c) {
            g_loss += -clamped_log(p(0, c));
            d_delta(0, c) = (p(0, c) - 1.0) * inv_bs;
        }
        g_loss *= inv_bs;

        auto d_grads = nn::backward_from_output_delta(gan.discriminator, d_trace, d_delta);
        Matrix dl_dfake(d, bs);
        for (std::size_t c = 0; c < bs; ++c)
            for (std::size_t f = 0; f < d; ++f) dl_dfake(f, c) = d_grads.input(f, c);
        Matrix g_delta = nn::output_grad_to_delta(gan.generator, g_trace, dl_dfake);
        auto g_grads = nn::backward_from_output_delta(gan.generator, g_trace, g_delta);
        nn::adam_step(gan.generator, g_grads, g_state, lr, b1, b2, eps);

        double d_loss = d_loss_sum / static_cast<double>(config.d_steps_per_g_step);
        if (!std::isfinite(d_loss) || !std::isfinite(g_loss))
            throw TrainingDivergedError(
                "gan training diverged (non-finite loss) at epoch " + std::to_string(epoch),
                epoch);
        gan.loss_history.emplace_back(d_loss, g_loss);
    }
    return gan;
}

std::vector<LabeledSample> synthesize(const GanPair& gan, int label, std::size_t n,
                                      std::uint64_t seed) {
    if (label != 1 && label != 2)
        throw ValidationError("synthesize: label must be 1 or 2");
    if (gan.generator.layers.empty())
        throw ValidationError("synthesize: generator is untrained");
    std::vector<LabeledSample> out;
    if (n == 0) return out;
    const std::size_t noise = gan.noise_dim();
    Rng rng(seed);
    std::vector<int> batch_labels(n, label);
    Matrix g_in = noise_columns(rng, noise, batch_labels);
    Matrix feat = nn::forward_batch(gan.generator, g_in);
    out.reserve(n);
    for (std::size_t c = 0; c < n; ++c) {
        Features u(feat.rows);
        for (std::size_t f = 0; f < feat.rows; ++f) u[f] = feat(f, c);
        LabeledSample s;
        s.features = gan.scaler.from_unit(u);
        s.label = label;
        s.synthetic = true;
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<LabeledSample> synthesize_mixture(const GanPair& gan, const Dataset& real,
                                              std::size_t total, std::uint64_t seed) {
    if (real.samples.empty())
        throw ValidationError("synthesize_mixture: empty real dataset");
    std::vector<LabeledSample> out;
    if (total == 0) return out;
    std::size_t c1 = 0, c2 = 0;
    for (const auto& s : real.samples) (s.label == 1 ? c1 : c2)++;
    const std::size_t n = real.samples.size();
    std::size_t n1 = total * c1 / n;
    std::size_t n2 = total * c2 / n;
    n1 += total - n1 - n2;  // remainder to label 1
    auto block1 = synthesize(gan, 1, n1, Rng::derive(seed, 1));
    auto block2 = synthesize(gan, 2, n2, Rng::derive(seed, 2));
    out.reserve(total);
    for (auto& s : block1) out.push_back(std::move(s));
    for (auto& s : block2) out.push_back(std::move(s));
    return out;
}

static constexpr char kGanMagic[] = "AMLG";
static constexpr std::uint32_t kGanVersion = 1;

void write_gan(std::ostream& out, const GanPair& gan) {
    bin::write_magic(out, kGanMagic);
    bin::write_u32(out, kGanVersion);
    nn::write_model(gan.generator, out);
    nn::write_model(gan.discriminator, out);
    bin::write_u32(out, static_cast<std::uint32_t>(gan.scaler.dim()));
    bin::write_f64_array(out, gan.scaler.fmin);
    bin::write_f64_array(out, gan.scaler.fmax);
}

GanPair read_gan(std::istream& in) {
    bin::expect_magic(in, kGanMagic, "gan checkpoint");
    std::uint32_t version = bin::read_u32(in);
    if (version != kGanVersion)
        throw IoError("unsupported gan checkpoint version " + std::to_string(version));
    GanPair gan;
    gan.generator = nn::read_model(in);
    gan.discriminator = nn::read_model(in);
    std::uint32_t dim = bin::read_u32(in);
    gan.scaler.fmin = bin::read_f64_array(in, dim);
    gan.scaler.fmax = bin::read_f64_array(in, dim);
    return gan;
}

void save_gan(const GanPair& gan, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    write_gan(out, gan);
    if (!out) throw IoError("write failed: " + path);
}

GanPair load_gan(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return read_gan(in);
}

}  // namespace amlab::gan
