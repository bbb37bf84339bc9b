#pragma once

// Manifest-driven attack runs: exfiltrate -> label test set ->
// (optional) grid search -> (optional) GAN augmentation sweep ->
// (optional) causative and evasion stages, with every artifact written
// under one output directory.  Reruns of the same manifest produce
// byte-identical files; nothing here records wall-clock time.
//
// Manifest schema (all keys optional unless noted):
//   [run]        seed, output_dir
//   [data]       pool*, test*, candidates, target_train, target_model
//   [oracle]     endpoint (http://host:port, empty = in-process),
//                limit, window
//   [attack]     budget, threshold
//   [grid]       point = "<layers> <neurons> <scale> <minibatch> <momentum>"
//                (repeatable; omit the section to use [substitute])
//   [substitute] hidden_layers, neurons, weight_scale, minibatch, momentum
//   [train]      epochs, learning_rate, optimizer (sgd_momentum | adam)
//   [gan]        noise_dim, generator_hidden, discriminator_hidden,
//                epochs, batch_size, d_steps, learning_rate
//   [augment]    sizes = "0 50 100"
//   [causative]  enabled, p
//   [evasion]    enabled, n, mode (max_error | targeted), from_label, to_label
// Relative [data] paths resolve against the manifest's directory.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "amlab/manifest.hpp"

namespace amlab::pipeline {

inline constexpr char kToolVersion[] = "amlab 0.1.0";

struct AttackOptions {
    std::string manifest_dir;  // base for relative [data] paths
    std::string output_dir;    // required
    std::optional<std::uint64_t> seed_override;
    std::optional<std::string> endpoint_override;
};

struct AttackArtifacts {
    std::string output_dir;
    std::vector<std::string> files;  // names relative to output_dir
    double best_sweep_d = 0.0;
    std::size_t best_sweep_row = 0;
};

AttackArtifacts run_attack(const Manifest& manifest, const AttackOptions& options);

// Renders the human-readable summary of a completed (or partial) run
// directory.  Pure function of the artifact files.
std::string render_report(const std::string& run_dir);

}  // namespace amlab::pipeline
