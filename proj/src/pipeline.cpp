#include "amlab/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>

#include "amlab/attacks.hpp"
#include "amlab/errors.hpp"
#include "amlab/gan.hpp"
#include "amlab/metrics.hpp"
#include "amlab/oracle.hpp"
#include "amlab/rng.hpp"

namespace amlab::pipeline {

namespace fs = std::filesystem;

namespace {

// Seed streams for the independent random decisions of one run.
enum Stream : std::uint64_t {
    kStreamExfiltrate = 10,
    kStreamSplit = 11,
    kStreamGrid = 12,
    kStreamGan = 13,
    kStreamSynth = 14,
    kStreamSubstitute = 15,
    kStreamEvasionBaseline = 18,
};

std::string resolve(const std::string& base, const std::string& path) {
    if (path.empty() || fs::path(path).is_absolute() || base.empty()) return path;
    return (fs::path(base) / path).string();
}

// Rethrows any known error class with "stage=<name>: " prefixed, so the
// CLI can report which stage failed while keeping the exit-code class.
template <typename F>
auto stage(const char* name, F&& f) {
    auto tag = [&](const std::string& msg) {
        return "stage=" + std::string(name) + ": " + msg;
    };
    try {
        return f();
    } catch (const ShapeError& e) {
        throw ShapeError(tag(e.what()));
    } catch (const ValidationError& e) {
        throw ValidationError(tag(e.what()));
    } catch (const IoError& e) {
        throw IoError(tag(e.what()));
    } catch (const RateLimitError& e) {
        throw RateLimitError(tag(e.what()), e.retry_after_seconds);
    } catch (const NetworkError& e) {
        throw NetworkError(tag(e.what()));
    } catch (const TrainingDivergedError& e) {
        throw TrainingDivergedError(tag(e.what()), e.epoch);
    } catch (const Error& e) {
        throw Error(tag(e.what()));
    } catch (const std::exception& e) {
        throw Error(tag(e.what()));
    }
}

struct Endpoint {
    std::string host;
    int port = 0;
};

Endpoint parse_endpoint(const std::string& url) {
    std::string rest = url;
    auto scheme = rest.find("://");
    if (scheme != std::string::npos) {
        if (rest.substr(0, scheme) != "http")
            throw ValidationError("oracle endpoint must be http://host:port, got " + url);
        rest = rest.substr(scheme + 3);
    }
    if (!rest.empty() && rest.back() == '/') rest.pop_back();
    auto colon = rest.rfind(':');
    if (colon == std::string::npos || colon + 1 >= rest.size())
        throw ValidationError("oracle endpoint needs an explicit port: " + url);
    Endpoint ep;
    ep.host = rest.substr(0, colon);
    try {
        ep.port = std::stoi(rest.substr(colon + 1));
    } catch (const std::exception&) {
        throw ValidationError("bad port in oracle endpoint " + url);
    }
    if (ep.host.empty() || ep.port <= 0 || ep.port > 65535)
        throw ValidationError("bad oracle endpoint " + url);
    return ep;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << text;
    if (!out) throw IoError("write failed: " + path);
}

std::optional<std::string> read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

nn::TrainConfig train_config_from(const Manifest& m, std::uint64_t seed) {
    nn::TrainConfig cfg;
    cfg.epochs = m.get_u64("train", "epochs", 200);
    cfg.learning_rate = m.get_double("train", "learning_rate", 0.1);
    std::string opt = m.get_string("train", "optimizer", "sgd_momentum");
    if (opt == "sgd_momentum") {
        cfg.optimizer = nn::Optimizer::sgd_momentum;
    } else if (opt == "adam") {
        cfg.optimizer = nn::Optimizer::adam;
    } else {
        throw ValidationError("manifest [train] optimizer must be sgd_momentum or adam");
    }
    cfg.seed = seed;
    return cfg;
}

std::vector<std::size_t> hidden_list(const Manifest& m, const char* section,
                                     const char* key,
                                     std::initializer_list<std::size_t> fallback) {
    auto raw = m.get_u64_list(section, key);
    if (raw.empty()) return std::vector<std::size_t>(fallback);
    std::vector<std::size_t> out;
    for (auto v : raw) out.push_back(static_cast<std::size_t>(v));
    return out;
}

gan::GanConfig gan_config_from(const Manifest& m, std::uint64_t seed) {
    gan::GanConfig cfg;
    cfg.noise_dim = m.get_u64("gan", "noise_dim", 100);
    cfg.generator_hidden = hidden_list(m, "gan", "generator_hidden", {100, 500});
    cfg.discriminator_hidden = hidden_list(m, "gan", "discriminator_hidden", {500, 500});
    cfg.epochs = m.get_u64("gan", "epochs", 500);
    cfg.batch_size = m.get_u64("gan", "batch_size", 32);
    cfg.d_steps_per_g_step = m.get_u64("gan", "d_steps", 2);
    cfg.learning_rate = m.get_double("gan", "learning_rate", 1e-5);
    cfg.seed = seed;
    return cfg;
}

attacks::GridPoint grid_point_from_line(const std::string& line) {
    std::istringstream in(line);
    attacks::GridPoint pt;
    if (!(in >> pt.hidden_layers >> pt.neurons >> pt.weight_scale >> pt.minibatch >>
          pt.momentum))
        throw ValidationError(
            "manifest [grid] point must be \"<layers> <neurons> <weight_scale> "
            "<minibatch> <momentum>\", got \"" + line + "\"");
    std::string extra;
    if (in >> extra)
        throw ValidationError("manifest [grid] point has trailing tokens: \"" + line +
                              "\"");
    return pt;
}

// Seeded 80/20 split, both halves nonempty when n >= 2.
std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double train_fraction,
                                          std::uint64_t seed) {
    std::vector<std::size_t> order(data.samples.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);
    auto cut = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(order.size())));
    cut = std::clamp<std::size_t>(cut, 1, order.size() - 1);
    Dataset train, val;
    train.feature_dim = val.feature_dim = data.feature_dim;
    for (std::size_t i = 0; i < order.size(); ++i)
        (i < cut ? train : val).add(data.samples[order[i]]);
    return {std::move(train), std::move(val)};
}

}  // namespace

AttackArtifacts run_attack(const Manifest& manifest, const AttackOptions& options) {
    if (options.output_dir.empty())
        throw ValidationError("attack: output directory is required");

    AttackArtifacts artifacts;
    artifacts.output_dir = options.output_dir;
    std::error_code ec;
    fs::create_directories(options.output_dir, ec);
    if (ec)
        throw IoError("cannot create directory " + options.output_dir + ": " +
                      ec.message());
    auto out_path = [&](const std::string& name) {
        return (fs::path(options.output_dir) / name).string();
    };
    auto emit = [&](const std::string& name) { artifacts.files.push_back(name); };

    const std::uint64_t seed =
        options.seed_override ? *options.seed_override
                              : manifest.get_u64("run", "seed", 0);

    // ---- load stage: data files and oracle access -------------------
    const std::string base = options.manifest_dir;
    Dataset pool, test_features, candidates, target_train;
    bool have_candidates = false, have_target_train = false;
    TargetClassifier white_box_target;
    bool have_target_model = false;

    std::string endpoint = options.endpoint_override
                               ? *options.endpoint_override
                               : manifest.get_string("oracle", "endpoint", "");

    stage("load", [&] {
        auto pool_path = manifest.get("data", "pool");
        if (!pool_path) throw ValidationError("manifest [data] pool is required");
        pool = load_dataset(resolve(base, *pool_path));
        auto test_path = manifest.get("data", "test");
        if (!test_path) throw ValidationError("manifest [data] test is required");
        test_features = load_dataset(resolve(base, *test_path));
        if (auto p = manifest.get("data", "candidates")) {
            candidates = load_dataset(resolve(base, *p));
            have_candidates = true;
        }
        if (auto p = manifest.get("data", "target_train")) {
            target_train = load_dataset(resolve(base, *p));
            have_target_train = true;
        }
        if (auto p = manifest.get("data", "target_model")) {
            white_box_target = load_target(resolve(base, *p));
            have_target_model = true;
        }
        if (endpoint.empty() && !have_target_model)
            throw ValidationError(
                "in-process oracle needs [data] target_model (or set [oracle] endpoint)");
        return 0;
    });

    SystemClock clock;
    const std::int64_t limit = manifest.get_int("oracle", "limit", 1000);
    const double window = manifest.get_double("oracle", "window", 86400.0);

    std::unique_ptr<QueryBudget> attack_budget;
    std::unique_ptr<QueryBudget> eval_budget;
    std::unique_ptr<OracleClient> attack_client;
    std::unique_ptr<OracleClient> eval_client;
    if (endpoint.empty()) {
        attack_budget = std::make_unique<QueryBudget>(limit, window, clock);
        attack_client =
            std::make_unique<InProcessOracleClient>(white_box_target, *attack_budget);
        // Evaluation queries are metered separately from the attack.
        eval_budget = std::make_unique<QueryBudget>(
            static_cast<std::int64_t>(test_features.size()), window, clock);
        eval_client =
            std::make_unique<InProcessOracleClient>(white_box_target, *eval_budget);
    } else {
        Endpoint ep = parse_endpoint(endpoint);
        attack_client = std::make_unique<HttpOracleClient>(ep.host, ep.port);
        eval_client = std::make_unique<HttpOracleClient>(ep.host, ep.port);
    }

    // ---- exfiltrate -----------------------------------------------
    const auto budget =
        static_cast<std::size_t>(manifest.get_int("attack", "budget", 100));
    const double threshold = manifest.get_double("attack", "threshold", 0.5);
    attacks::ExploratoryResult exfil = stage("exfiltrate", [&] {
        auto r = attacks::exploratory_attack(*attack_client, pool, budget,
                                             Rng::derive(seed, kStreamExfiltrate));
        save_dataset(r.labeled, out_path("exfiltrated.jsonl"));
        emit("exfiltrated.jsonl");
        if (r.status != attacks::ExploratoryStatus::complete) {
            std::ostringstream cursor;
            for (std::size_t idx : r.pending_order) cursor << idx << '\n';
            write_text(out_path("exfiltrate_cursor.txt"), cursor.str());
            emit("exfiltrate_cursor.txt");
        }
        if (r.status == attacks::ExploratoryStatus::rate_limited)
            throw RateLimitError("query budget exhausted after " +
                                     std::to_string(r.calls_consumed) +
                                     " calls; partial data saved",
                                 r.retry_after_seconds);
        if (r.status == attacks::ExploratoryStatus::network_error)
            throw NetworkError("oracle unreachable after " +
                               std::to_string(r.calls_consumed) + " calls: " +
                               r.detail);
        return r;
    });

    // ---- test labels (evaluation budget, not the attack's) ---------
    Dataset test = stage("test-labels", [&] {
        Dataset labeled;
        labeled.feature_dim = test_features.feature_dim;
        for (const auto& s : test_features.samples) {
            ClassifyOutcome o = eval_client->classify(s.features);
            if (o.status == ClassifyStatus::rate_limited)
                throw RateLimitError("evaluation queries rate-limited", o.retry_after_seconds);
            if (o.status != ClassifyStatus::ok)
                throw NetworkError("evaluation query failed: " + o.detail);
            labeled.add(s.features, o.label);
        }
        save_dataset(labeled, out_path("test_oracle_labels.jsonl"));
        emit("test_oracle_labels.jsonl");
        return labeled;
    });

    // ---- substitute architecture (grid search or fixed) ------------
    auto grid_lines = manifest.get_all("grid", "point");
    nn::TrainConfig train_cfg =
        train_config_from(manifest, Rng::derive(seed, kStreamSubstitute));
    attacks::GridPoint chosen;
    if (grid_lines.empty()) {
        chosen.hidden_layers = manifest.get_u64("substitute", "hidden_layers", 3);
        chosen.neurons = manifest.get_u64("substitute", "neurons", 50);
        chosen.weight_scale = manifest.get_double("substitute", "weight_scale", 3.0);
        chosen.minibatch = manifest.get_u64("substitute", "minibatch", 25);
        chosen.momentum = manifest.get_double("substitute", "momentum", 0.1);
    } else {
        std::vector<attacks::GridPoint> grid;
        for (const auto& line : grid_lines) grid.push_back(grid_point_from_line(line));
        auto search = stage("grid-search", [&] {
            auto [train_split, val_split] =
                split_dataset(exfil.labeled, 0.8, Rng::derive(seed, kStreamSplit));
            auto base_cfg = train_config_from(manifest, 0);
            auto result = attacks::hyperparameter_search(
                train_split, val_split, grid, base_cfg, Rng::derive(seed, kStreamGrid));
            std::ostringstream txt;
            txt << "# layers neurons weight_scale minibatch momentum -> d_max\n";
            for (std::size_t i = 0; i < result.outcomes.size(); ++i) {
                const auto& o = result.outcomes[i];
                txt << i << ": " << o.point.hidden_layers << ' ' << o.point.neurons
                    << ' ' << fmt6(o.point.weight_scale) << ' ' << o.point.minibatch
                    << ' ' << fmt6(o.point.momentum) << " -> ";
                if (o.failed)
                    txt << "FAILED " << o.error << '\n';
                else
                    txt << fmt6(o.d_max) << (i == result.best_index ? "  (best)\n" : "\n");
            }
            write_text(out_path("grid_results.txt"), txt.str());
            emit("grid_results.txt");
            return result;
        });
        chosen = search.outcomes[search.best_index].point;
    }
    train_cfg.minibatch_size = chosen.minibatch;
    train_cfg.momentum = chosen.momentum;
    train_cfg.weight_scale = chosen.weight_scale;
    auto substitute_arch = nn::make_classifier_mlp(
        pool.feature_dim, chosen.hidden_layers, chosen.neurons);
    substitute_arch.threshold = threshold;

    // ---- augmentation sweep ----------------------------------------
    auto sizes64 = manifest.get_u64_list("augment", "sizes");
    std::vector<std::size_t> sizes;
    for (auto v : sizes64) sizes.push_back(static_cast<std::size_t>(v));
    if (sizes.empty()) sizes.push_back(0);

    gan::GanPair trained_gan;
    bool have_gan = false;
    if (std::any_of(sizes.begin(), sizes.end(), [](std::size_t s) { return s > 0; })) {
        stage("gan", [&] {
            trained_gan =
                gan::train_gan(exfil.labeled, gan_config_from(manifest, Rng::derive(seed, kStreamGan)));
            have_gan = true;
            gan::save_gan(trained_gan, out_path("gan.amlg"));
            emit("gan.amlg");
            return 0;
        });
    }

    nn::MlpModel best_substitute;
    bool have_best = false;
    std::size_t best_row = 0;
    double best_d = 0.0;
    stage("augment", [&] {
        std::ostringstream sweep;
        sweep << "# total | N_r | N_s | d1 | d2 | d\n";
        for (std::size_t row = 0; row < sizes.size(); ++row) {
            const std::size_t n_s = sizes[row];
            auto result = attacks::augment_and_train(
                exfil.labeled, n_s, have_gan ? &trained_gan : nullptr,
                Rng::derive(seed, kStreamSynth), substitute_arch, train_cfg, test);
            if (n_s > 0) {
                Dataset synth;
                synth.feature_dim = exfil.labeled.feature_dim;
                for (const auto& s : result.synthetic) synth.add(s);
                std::string name = "synthetic_" + std::to_string(n_s) + ".jsonl";
                save_dataset(synth, out_path(name));
                emit(name);
            }
            sweep << render_sweep_row(exfil.labeled.size(), n_s, result.report) << '\n';
            double d = result.report.d();
            if (!have_best || d < best_d) {
                have_best = true;
                best_d = d;
                best_row = row;
                best_substitute = std::move(result.substitute);
            }
        }
        write_text(out_path("sweep.txt"), sweep.str());
        emit("sweep.txt");
        nn::save_model(best_substitute, out_path("substitute.amlm"));
        emit("substitute.amlm");
        return 0;
    });
    artifacts.best_sweep_d = best_d;
    artifacts.best_sweep_row = best_row;

    // ---- causative stage -------------------------------------------
    if (manifest.get_bool("causative", "enabled", false)) {
        stage("causative", [&] {
            if (!have_candidates)
                throw ValidationError("causative stage needs [data] candidates");
            const double p = manifest.get_double("causative", "p", 10.0);
            auto sel = attacks::causative_select(best_substitute, candidates, p);
            save_dataset(sel.flipped_dataset, out_path("causative_poisoned.jsonl"));
            emit("causative_poisoned.jsonl");

            std::ostringstream rep;
            rep << "p " << fmt(p) << "\n";
            rep << "flips " << sel.flip_indices.size() << "\n";
            rep << "top_flips " << sel.top_count << "\n";
            rep << "bottom_flips " << sel.bottom_count << "\n";
            if (have_target_model && have_target_train) {
                auto div = attacks::evaluate_causative(
                    white_box_target, target_train, sel.flipped_dataset, candidates);
                rep << report_to_kv(div);
            } else {
                rep << "evaluation skipped (needs [data] target_model and target_train)\n";
            }
            write_text(out_path("causative_report.txt"), rep.str());
            emit("causative_report.txt");
            return 0;
        });
    }

    // ---- evasion stage ---------------------------------------------
    if (manifest.get_bool("evasion", "enabled", false)) {
        stage("evasion", [&] {
            if (!have_candidates)
                throw ValidationError("evasion stage needs [data] candidates");
            const auto n =
                static_cast<std::size_t>(manifest.get_int("evasion", "n", 50));
            std::string mode_str = manifest.get_string("evasion", "mode", "max_error");
            attacks::EvasionMode mode;
            if (mode_str == "max_error") {
                mode = attacks::EvasionMode::max_error;
            } else if (mode_str == "targeted") {
                mode = attacks::EvasionMode::targeted;
            } else {
                throw ValidationError("manifest [evasion] mode must be max_error or targeted");
            }
            const int from_label =
                static_cast<int>(manifest.get_int("evasion", "from_label", 1));
            const int to_label =
                static_cast<int>(manifest.get_int("evasion", "to_label", 2));
            auto sel = attacks::evasion_select(best_substitute, candidates, mode, n,
                                               threshold, from_label, to_label);
            Dataset selected;
            selected.feature_dim = candidates.feature_dim;
            for (const auto& s : sel.selected) selected.add(s);
            save_dataset(selected, out_path("evasion_selected.jsonl"));
            emit("evasion_selected.jsonl");

            std::ostringstream rep;
            rep << "mode " << mode_str << "\n";
            rep << "n " << sel.indices.size() << "\n";
            if (have_target_model) {
                std::vector<int> truth;
                truth.reserve(candidates.samples.size());
                for (const auto& s : candidates.samples) truth.push_back(s.label);
                auto eval = attacks::evaluate_evasion(
                    white_box_target, candidates, truth, sel,
                    Rng::derive(seed, kStreamEvasionBaseline));
                rep << "selected_error "
                    << (eval.selected_error ? fmt(*eval.selected_error) : "undefined")
                    << "\n";
                rep << "baseline_error "
                    << (eval.baseline_error ? fmt(*eval.baseline_error) : "undefined")
                    << "\n";
                if (eval.selected_error && eval.baseline_error &&
                    *eval.baseline_error > 0.0)
                    rep << "ratio " << fmt(*eval.selected_error / *eval.baseline_error)
                        << "\n";
            } else {
                rep << "evaluation skipped (needs [data] target_model)\n";
            }
            write_text(out_path("evasion_report.txt"), rep.str());
            emit("evasion_report.txt");
            return 0;
        });
    }

    // ---- resolved manifest -----------------------------------------
    Manifest resolved = manifest;
    resolved.set("run", "seed", std::to_string(seed));
    resolved.set("provenance", "tool", kToolVersion);
    resolved.set("provenance", "command", "attack");
    resolved.set("result", "best_sweep_row", std::to_string(best_row));
    resolved.set("result", "best_sweep_d", fmt(best_d));
    resolved.save(out_path("resolved.manifest"));
    emit("resolved.manifest");
    return artifacts;
}

std::string render_report(const std::string& run_dir) {
    if (!fs::exists(run_dir)) throw IoError("no such run directory: " + run_dir);
    std::ostringstream out;
    out << "attack run: " << run_dir << "\n";

    bool any = false;
    if (auto sweep = read_text((fs::path(run_dir) / "sweep.txt").string())) {
        out << "\nsubstitute divergence sweep (total | N_r | N_s | d1 | d2 | d):\n";
        std::istringstream in(*sweep);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line.front() == '#') continue;
            out << "  " << line << "\n";
        }
        any = true;
    }
    if (auto grid = read_text((fs::path(run_dir) / "grid_results.txt").string())) {
        out << "\nhyperparameter grid:\n";
        std::istringstream in(*grid);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line.front() == '#') continue;
            out << "  " << line << "\n";
        }
        any = true;
    }
    if (auto rep = read_text((fs::path(run_dir) / "causative_report.txt").string())) {
        out << "\ncausative attack:\n";
        std::istringstream in(*rep);
        std::string line;
        while (std::getline(in, line))
            if (!line.empty()) out << "  " << line << "\n";
        any = true;
    }
    if (auto rep = read_text((fs::path(run_dir) / "evasion_report.txt").string())) {
        out << "\nevasion attack:\n";
        std::istringstream in(*rep);
        std::string line;
        while (std::getline(in, line))
            if (!line.empty()) out << "  " << line << "\n";
        any = true;
    }
    if (!any) out << "\n(no reports found; run the attack command first)\n";
    return out.str();
}

}  // namespace amlab::pipeline
