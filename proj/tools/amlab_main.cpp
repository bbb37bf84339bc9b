// amlab: adversarial-ML laboratory against a rate-limited classifier API.
//
// Subcommands:
//   make-fixtures  generate the bundled synthetic corpora and datasets
//   train-target   train and save the mock target classifier
//   serve          expose a target over HTTP with a query budget
//   attack         run a manifest-driven attack pipeline
//   report         render the human-readable summary of a run
//
// Exit codes: 0 ok, 2 validation, 3 I/O, 4 network, 5 rate limit
// exhausted, 6 training diverged, 1 anything else.

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <thread>

#include "amlab/attacks.hpp"
#include "amlab/errors.hpp"
#include "amlab/fixtures.hpp"
#include "amlab/manifest.hpp"
#include "amlab/metrics.hpp"
#include "amlab/oracle.hpp"
#include "amlab/pipeline.hpp"

namespace {

std::atomic<bool> g_stop{false};

void request_stop(int) { g_stop.store(true); }

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const amlab::ValidationError*>(&e)) return 2;
    if (dynamic_cast<const amlab::IoError*>(&e)) return 3;
    if (dynamic_cast<const amlab::RateLimitError*>(&e)) return 5;
    if (dynamic_cast<const amlab::NetworkError*>(&e)) return 4;
    if (dynamic_cast<const amlab::TrainingDivergedError*>(&e)) return 6;
    return 1;
}

struct FixtureArgs {
    std::string out_dir;
    amlab::fixtures::FixtureSpec spec;
};

int cmd_make_fixtures(const FixtureArgs& args) {
    auto paths = amlab::fixtures::make_fixtures(args.out_dir, args.spec);
    std::printf("vocab: %s\n", paths.vocab.c_str());
    std::printf("frequency report: %s\n", paths.frequency_report.c_str());
    std::printf("datasets: %s %s %s %s\n", paths.target_train.c_str(),
                paths.pool.c_str(), paths.test.c_str(), paths.candidates.c_str());
    std::printf("corpus files: %zu\n", paths.corpus_files.size());
    return 0;
}

struct TrainTargetArgs {
    std::string data_path;
    std::string out_path;
    std::string kind = "nb";
    double threshold = 0.5;
    amlab::nn::TrainConfig mlp_config;
    std::size_t hidden_layers = 2;
    std::size_t neurons = 30;
};

int cmd_train_target(const TrainTargetArgs& args) {
    amlab::Dataset data = amlab::load_dataset(args.data_path);
    amlab::TargetKind kind;
    if (args.kind == "nb") {
        kind = amlab::TargetKind::naive_bayes;
    } else if (args.kind == "mlp") {
        kind = amlab::TargetKind::mlp;
    } else {
        throw amlab::ValidationError("--kind must be nb or mlp");
    }
    auto target = amlab::train_mock_target(data, kind, args.mlp_config,
                                           args.hidden_layers, args.neurons);
    target.threshold = args.threshold;
    if (kind == amlab::TargetKind::mlp) target.mlp.threshold = args.threshold;
    amlab::save_target(target, args.out_path);

    std::size_t correct = 0;
    for (const auto& s : data.samples)
        if (target.classify(s.features).label == s.label) ++correct;
    std::printf("trained %s target on %zu samples, training accuracy %.4f\n",
                args.kind.c_str(), data.size(),
                static_cast<double>(correct) / static_cast<double>(data.size()));
    std::printf("saved %s\n", args.out_path.c_str());
    return 0;
}

struct ServeArgs {
    std::string target_path;
    std::string host = "127.0.0.1";
    int port = 8080;
    std::int64_t limit = 1000;
    bool limit_from_flag = false;
    double window = 86400.0;
};

int cmd_serve(const ServeArgs& args) {
    std::int64_t limit = args.limit;
    // Precedence: --limit flag, then AMLAB_ORACLE_LIMIT, then default.
    if (!args.limit_from_flag) {
        if (const char* env = std::getenv("AMLAB_ORACLE_LIMIT")) {
            try {
                limit = std::stoll(env);
            } catch (const std::exception&) {
                throw amlab::ValidationError(
                    std::string("AMLAB_ORACLE_LIMIT is not an integer: ") + env);
            }
        }
    }
    auto target = amlab::load_target(args.target_path);
    amlab::SystemClock clock;
    amlab::OracleService service(std::move(target), limit, args.window, clock);
    int port = service.start(args.host, args.port);
    std::printf("listening on %s:%d (limit %lld per %.0f s)\n", args.host.c_str(),
                port, static_cast<long long>(limit), args.window);
    std::fflush(stdout);
    std::signal(SIGINT, request_stop);
    std::signal(SIGTERM, request_stop);
    while (!g_stop.load())
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
    service.stop();
    std::printf("stopped\n");
    return 0;
}

struct AttackArgs {
    std::string manifest_path;
    std::string output_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> endpoint;
};

int cmd_attack(const AttackArgs& args) {
    amlab::Manifest manifest = amlab::Manifest::load(args.manifest_path);
    amlab::pipeline::AttackOptions options;
    options.manifest_dir =
        std::filesystem::path(args.manifest_path).parent_path().string();
    options.output_dir = args.output_dir;
    if (options.output_dir.empty())
        options.output_dir = manifest.get_string("run", "output_dir", "");
    options.seed_override = args.seed;
    options.endpoint_override = args.endpoint;
    auto artifacts = amlab::pipeline::run_attack(manifest, options);
    for (const auto& f : artifacts.files)
        std::printf("wrote %s\n",
                    (std::filesystem::path(artifacts.output_dir) / f).string().c_str());
    std::printf("best sweep row %zu, d = %s\n", artifacts.best_sweep_row,
                amlab::format_percent(artifacts.best_sweep_d).c_str());
    return 0;
}

struct ReportArgs {
    std::string run_dir;
    std::string out_path;
};

int cmd_report(const ReportArgs& args) {
    std::string text = amlab::pipeline::render_report(args.run_dir);
    if (!args.out_path.empty()) {
        std::ofstream out(args.out_path, std::ios::binary);
        if (!out) throw amlab::IoError("cannot open " + args.out_path + " for writing");
        out << text;
    }
    std::fputs(text.c_str(), stdout);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"adversarial-ML lab: extraction, augmentation, poisoning, evasion"};
    app.set_version_flag("--version", amlab::pipeline::kToolVersion);
    app.require_subcommand(1);

    FixtureArgs fixture_args;
    auto* fixtures = app.add_subcommand("make-fixtures",
                                        "generate synthetic corpora and datasets");
    fixtures->add_option("--out", fixture_args.out_dir, "output directory")->required();
    fixtures->add_option("--k", fixture_args.spec.vocab_k, "vocabulary size");
    fixtures->add_option("--seed", fixture_args.spec.seed, "corpus seed");
    fixtures->add_option("--target-train", fixture_args.spec.n_target_train,
                         "target training documents");
    fixtures->add_option("--pool", fixture_args.spec.n_pool, "query pool documents");
    fixtures->add_option("--test", fixture_args.spec.n_test, "test documents");
    fixtures->add_option("--candidates", fixture_args.spec.n_candidates,
                         "attack candidate documents");
    fixtures->add_option("--overlap", fixture_args.spec.other_prob,
                         "cross-class word probability");
    fixtures->add_option("--report-top", fixture_args.spec.report_top,
                         "frequency report rows");

    TrainTargetArgs train_args;
    auto* train_target =
        app.add_subcommand("train-target", "train and save the mock target");
    train_target->add_option("--data", train_args.data_path, "training dataset (jsonl)")
        ->required();
    train_target->add_option("--out", train_args.out_path, "target model file")
        ->required();
    train_target->add_option("--kind", train_args.kind, "nb or mlp");
    train_target->add_option("--threshold", train_args.threshold, "score threshold");
    train_target->add_option("--epochs", train_args.mlp_config.epochs, "mlp epochs");
    train_target->add_option("--lr", train_args.mlp_config.learning_rate,
                             "mlp learning rate");
    train_target->add_option("--minibatch", train_args.mlp_config.minibatch_size,
                             "mlp minibatch size");
    train_target->add_option("--momentum", train_args.mlp_config.momentum,
                             "mlp momentum");
    train_target->add_option("--hidden-layers", train_args.hidden_layers,
                             "mlp hidden layers");
    train_target->add_option("--neurons", train_args.neurons, "mlp neurons per layer");
    train_target->add_option("--seed", train_args.mlp_config.seed, "mlp training seed");

    ServeArgs serve_args;
    auto* serve = app.add_subcommand("serve", "serve a target over HTTP");
    serve->add_option("--target", serve_args.target_path, "target model file")
        ->required();
    serve->add_option("--host", serve_args.host, "bind host");
    serve->add_option("--port", serve_args.port, "bind port (0 = any)");
    auto* limit_opt =
        serve->add_option("--limit", serve_args.limit, "calls per window");
    serve->add_option("--window", serve_args.window, "window seconds");

    AttackArgs attack_args;
    std::uint64_t attack_seed = 0;
    std::string attack_endpoint;
    auto* attack = app.add_subcommand("attack", "run a manifest-driven attack");
    attack->add_option("--manifest", attack_args.manifest_path, "run manifest")
        ->required();
    attack->add_option("--output-dir", attack_args.output_dir, "artifact directory");
    auto* seed_opt = attack->add_option("--seed", attack_seed, "override [run] seed");
    auto* endpoint_opt = attack->add_option("--endpoint", attack_endpoint,
                                            "override [oracle] endpoint");

    ReportArgs report_args;
    auto* report = app.add_subcommand("report", "summarize a completed run");
    report->add_option("--run", report_args.run_dir, "run directory")->required();
    report->add_option("--out", report_args.out_path, "also write the summary here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;  // usage problems are validation errors
    }

    try {
        if (fixtures->parsed()) return cmd_make_fixtures(fixture_args);
        if (train_target->parsed()) return cmd_train_target(train_args);
        if (serve->parsed()) {
            serve_args.limit_from_flag = limit_opt->count() > 0;
            return cmd_serve(serve_args);
        }
        if (attack->parsed()) {
            if (seed_opt->count() > 0) attack_args.seed = attack_seed;
            if (endpoint_opt->count() > 0) attack_args.endpoint = attack_endpoint;
            return cmd_attack(attack_args);
        }
        if (report->parsed()) return cmd_report(report_args);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "amlab: %s\n", e.what());
        return exit_code_for(e);
    }
    return 0;
}
