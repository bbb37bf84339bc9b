#pragma once

// Conditional GAN over count-feature vectors.
//
// Both networks see the class as a one-hot vector appended to their
// input: the generator maps noise+label to a feature vector through a
// tanh head, the discriminator maps features+label to one sigmoid unit.
// Real features are min-max scaled to [-1,1] for training; synthesis
// inverts the scaling, clips, and rounds back to nonnegative integer
// counts.
//
// One training epoch = d_steps_per_g_step discriminator minibatch
// updates followed by one generator minibatch update, Adam on both.
// The discriminator descends the binary-cross-entropy form of the
// minimax value; the generator descends -mean log D(G(z,y)), the
// non-saturating objective.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "amlab/dataset.hpp"
#include "amlab/nn.hpp"

namespace amlab::gan {

struct GanConfig {
    std::size_t noise_dim = 100;
    std::size_t label_dim = 2;  // one-hot classes
    std::vector<std::size_t> generator_hidden = {100, 500};
    std::vector<std::size_t> discriminator_hidden = {500, 500};
    std::size_t epochs = 500;
    std::size_t batch_size = 32;
    std::size_t d_steps_per_g_step = 2;
    double learning_rate = 1e-5;
    std::uint64_t seed = 0;

    void validate() const;
};

// Per-feature min-max map between count space and the generator's
// tanh range.  from_unit clips into [max(0,min), max] and rounds, so
// synthetic features are always nonnegative integers.
struct FeatureScaler {
    std::vector<double> fmin;
    std::vector<double> fmax;

    static FeatureScaler fit(const Dataset& real);
    std::size_t dim() const { return fmin.size(); }
    Features to_unit(const Features& x) const;
    Features from_unit(const Features& u) const;
};

struct GanPair {
    nn::MlpModel generator;      // noise+label -> features, tanh head
    nn::MlpModel discriminator;  // features+label -> 1, sigmoid head
    FeatureScaler scaler;
    std::vector<std::pair<double, double>> loss_history;  // (d_loss, g_loss)

    std::size_t noise_dim() const;
    std::size_t label_dim() const;
    std::size_t feature_dim() const { return scaler.dim(); }
};

// Empirical minimax value: mean log D(real) + mean log(1 - D(fake)),
// probabilities clamped at 1e-12.  Throws on an empty batch.
double gan_value(const std::vector<double>& d_real, const std::vector<double>& d_fake);

// Non-saturating generator objective: mean log D(fake), same clamping.
double generator_objective(const std::vector<double>& d_fake);

// Trains from scratch; deterministic per config.seed.  Throws
// ValidationError on single-label data, TrainingDivergedError when an
// epoch loss goes non-finite.
GanPair train_gan(const Dataset& real, const GanConfig& config);

// n samples conditioned on `label`: z ~ N(0,I), one-hot label, run the
// generator, inverse-scale.  All outputs carry synthetic=true.
std::vector<LabeledSample> synthesize(const GanPair& gan, int label, std::size_t n,
                                      std::uint64_t seed);

// total samples split across labels proportionally to the real set's
// label frequencies; any remainder goes to label 1.  Label-1 block
// first, then label-2.
std::vector<LabeledSample> synthesize_mixture(const GanPair& gan, const Dataset& real,
                                              std::size_t total, std::uint64_t seed);

// Checkpoint: both networks in the shared model format plus the scaler.
void save_gan(const GanPair& gan, const std::string& path);
GanPair load_gan(const std::string& path);
void write_gan(std::ostream& out, const GanPair& gan);
GanPair read_gan(std::istream& in);

}  // namespace amlab::gan
