#include "amlab/oracle.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include "amlab/errors.hpp"
#include "amlab/io.hpp"

namespace amlab {

using nlohmann::json;

std::size_t TargetClassifier::input_dim() const {
    return kind == TargetKind::naive_bayes ? n_features : mlp.input_dim();
}

nn::Prediction TargetClassifier::classify(const Features& x) const {
    if (kind == TargetKind::mlp) return nn::predict_with_score(mlp, x, threshold);
    if (x.size() != n_features)
        throw ShapeError("classify: expected " + std::to_string(n_features) +
                         " features, got " + std::to_string(x.size()));
    double lp1 = log_prior[0];
    double lp2 = log_prior[1];
    for (std::size_t w = 0; w < n_features; ++w) {
        lp1 += x[w] * log_likelihood[w];
        lp2 += x[w] * log_likelihood[n_features + w];
    }
    // Posterior of label 2; exp overflow saturates harmlessly to 0 or 1.
    double score = 1.0 / (1.0 + std::exp(lp1 - lp2));
    nn::Prediction p;
    p.score = score;
    p.label = score < threshold ? 1 : 2;
    return p;
}

TargetClassifier train_mock_target(const Dataset& data, TargetKind kind,
                                   const nn::TrainConfig& mlp_config,
                                   std::size_t mlp_hidden_layers,
                                   std::size_t mlp_neurons) {
    data.validate();
    if (data.samples.empty())
        throw ValidationError("train_mock_target: empty dataset");
    if (!data.has_both_labels())
        throw ValidationError("train_mock_target: need samples from both classes");

    TargetClassifier t;
    t.kind = kind;
    if (kind == TargetKind::mlp) {
        auto arch = nn::make_classifier_mlp(data.feature_dim, mlp_hidden_layers,
                                            mlp_neurons);
        arch.threshold = t.threshold;
        t.mlp = nn::train(arch, data, mlp_config).model;
        return t;
    }

    const std::size_t V = data.feature_dim;
    t.n_features = V;
    t.log_likelihood.assign(2 * V, 0.0);
    double class_count[2] = {0.0, 0.0};
    std::vector<double> word_count(2 * V, 0.0);
    double token_total[2] = {0.0, 0.0};
    for (const auto& s : data.samples) {
        const std::size_t c = static_cast<std::size_t>(s.label - 1);
        class_count[c] += 1.0;
        for (std::size_t w = 0; w < V; ++w) {
            double v = s.features[w];
            if (!(v >= 0.0) || !std::isfinite(v))
                throw ValidationError(
                    "train_mock_target: naive bayes needs nonnegative finite counts");
            word_count[c * V + w] += v;
            token_total[c] += v;
        }
    }
    const double n = class_count[0] + class_count[1];
    t.log_prior[0] = std::log(class_count[0] / n);
    t.log_prior[1] = std::log(class_count[1] / n);
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t w = 0; w < V; ++w)
            t.log_likelihood[c * V + w] =
                std::log((word_count[c * V + w] + 1.0) /
                         (token_total[c] + static_cast<double>(V)));
    return t;
}

static constexpr char kTargetMagic[] = "AMLT";
static constexpr std::uint32_t kTargetVersion = 1;

void write_target(std::ostream& out, const TargetClassifier& target) {
    bin::write_magic(out, kTargetMagic);
    bin::write_u32(out, kTargetVersion);
    bin::write_u8(out, static_cast<std::uint8_t>(target.kind));
    bin::write_f64(out, target.threshold);
    if (target.kind == TargetKind::naive_bayes) {
        bin::write_u32(out, static_cast<std::uint32_t>(target.n_features));
        bin::write_f64(out, target.log_prior[0]);
        bin::write_f64(out, target.log_prior[1]);
        bin::write_f64_array(out, target.log_likelihood);
    } else {
        nn::write_model(target.mlp, out);
    }
}

TargetClassifier read_target(std::istream& in) {
    bin::expect_magic(in, kTargetMagic, "target model");
    std::uint32_t version = bin::read_u32(in);
    if (version != kTargetVersion)
        throw IoError("unsupported target file version " + std::to_string(version));
    TargetClassifier t;
    std::uint8_t kind = bin::read_u8(in);
    if (kind > 1) throw IoError("unknown target kind " + std::to_string(kind));
    t.kind = static_cast<TargetKind>(kind);
    t.threshold = bin::read_f64(in);
    if (t.kind == TargetKind::naive_bayes) {
        t.n_features = bin::read_u32(in);
        t.log_prior[0] = bin::read_f64(in);
        t.log_prior[1] = bin::read_f64(in);
        t.log_likelihood = bin::read_f64_array(in, 2 * t.n_features);
    } else {
        t.mlp = nn::read_model(in);
    }
    return t;
}

void save_target(const TargetClassifier& target, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    write_target(out, target);
    if (!out) throw IoError("write failed: " + path);
}

TargetClassifier load_target(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return read_target(in);
}

double SystemClock::now() {
    return std::chrono::duration<double>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

QueryBudget::QueryBudget(std::int64_t limit, double window_seconds, Clock& clock)
    : limit_(limit), window_(window_seconds), clock_(clock) {
    if (limit < 0) throw ValidationError("budget limit must be >= 0");
    if (!(window_seconds > 0.0))
        throw ValidationError("budget window must be positive");
    window_start_ = clock_.now();
}

void QueryBudget::roll_locked(double now) {
    if (now >= window_start_ + window_) {
        double k = std::floor((now - window_start_) / window_);
        window_start_ += k * window_;
        consumed_ = 0;
    }
}

BudgetDecision QueryBudget::check_and_consume() {
    std::lock_guard<std::mutex> lock(mu_);
    double now = clock_.now();
    roll_locked(now);
    BudgetDecision d;
    if (consumed_ < limit_) {
        ++consumed_;
        d.allowed = true;
        d.remaining = limit_ - consumed_;
    } else {
        d.allowed = false;
        d.remaining = 0;
        d.retry_after_seconds = window_start_ + window_ - now;
    }
    return d;
}

std::int64_t QueryBudget::remaining() {
    std::lock_guard<std::mutex> lock(mu_);
    roll_locked(clock_.now());
    return limit_ - consumed_;
}

ClassifyOutcome classify(const TargetClassifier& target, QueryBudget& budget,
                         const Features& x) {
    // Validate before consuming: a bad request never costs a call.
    if (x.size() != target.input_dim())
        throw ShapeError("classify: expected " +
                         std::to_string(target.input_dim()) + " features, got " +
                         std::to_string(x.size()));
    for (double v : x)
        if (!std::isfinite(v))
            throw ValidationError("classify: features must be finite");
    ClassifyOutcome out;
    BudgetDecision d = budget.check_and_consume();
    if (!d.allowed) {
        out.status = ClassifyStatus::rate_limited;
        out.remaining = 0;
        out.retry_after_seconds = d.retry_after_seconds;
        return out;
    }
    nn::Prediction p = target.classify(x);
    out.status = ClassifyStatus::ok;
    out.label = p.label;
    out.score = p.score;
    out.remaining = d.remaining;
    return out;
}

ClassifyOutcome InProcessOracleClient::classify(const Features& x) {
    return amlab::classify(target_, budget_, x);
}

// JSON body shared by the client and the service handler.
static json features_to_body(const Features& x) {
    json arr = json::array();
    for (double v : x) {
        if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 9.007199254740992e15)
            arr.push_back(static_cast<long long>(v));
        else
            arr.push_back(v);
    }
    return json{{"counts", std::move(arr)}};
}

HttpOracleClient::HttpOracleClient(std::string host, int port)
    : host_(std::move(host)), port_(port) {}

ClassifyOutcome HttpOracleClient::classify(const Features& x) {
    httplib::Client cli(host_, port_);
    cli.set_connection_timeout(5, 0);
    cli.set_read_timeout(60, 0);
    ClassifyOutcome out;
    auto res = cli.Post("/classify", features_to_body(x).dump(), "application/json");
    if (!res) {
        out.status = ClassifyStatus::network_error;
        out.detail = httplib::to_string(res.error());
        return out;
    }
    json body = json::parse(res->body, nullptr, false);
    if (res->status == 200) {
        if (body.is_discarded() || !body.contains("label") ||
            !body.contains("score") || !body.contains("remaining")) {
            out.status = ClassifyStatus::protocol_error;
            out.detail = "malformed 200 response";
            return out;
        }
        out.status = ClassifyStatus::ok;
        out.label = body["label"].get<int>();
        out.score = body["score"].get<double>();
        out.remaining = body["remaining"].get<std::int64_t>();
        return out;
    }
    if (res->status == 429) {
        out.status = ClassifyStatus::rate_limited;
        out.remaining = 0;
        if (!body.is_discarded() && body.contains("retry_after_seconds"))
            out.retry_after_seconds = body["retry_after_seconds"].get<double>();
        return out;
    }
    out.status = ClassifyStatus::protocol_error;
    out.detail = "HTTP " + std::to_string(res->status) +
                 (res->body.empty() ? "" : ": " + res->body);
    return out;
}

struct OracleService::Impl {
    Impl(TargetClassifier t, std::int64_t limit, double window, Clock& clock)
        : target(std::move(t)), budget(limit, window, clock) {}

    TargetClassifier target;
    QueryBudget budget;
    httplib::Server server;
    std::thread thread;
};

OracleService::OracleService(TargetClassifier target, std::int64_t limit,
                             double window_seconds, Clock& clock)
    : impl_(std::make_unique<Impl>(std::move(target), limit, window_seconds,
                                   clock)) {}

OracleService::~OracleService() { stop(); }

int OracleService::start(const std::string& host, int port) {
    auto* impl = impl_.get();
    auto& server = impl->server;

    server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("{\"status\":\"ok\"}", "application/json");
    });
    server.Post("/classify", [impl](const httplib::Request& req,
                                    httplib::Response& res) {
        auto bad = [&res](const std::string& msg) {
            res.status = 400;
            res.set_content(json{{"error", msg}}.dump(), "application/json");
        };
        json body = json::parse(req.body, nullptr, false);
        if (body.is_discarded() || !body.is_object()) {
            bad("body must be a JSON object");
            return;
        }
        if (!body.contains("counts") || !body["counts"].is_array()) {
            bad("missing \"counts\" array");
            return;
        }
        Features x;
        x.reserve(body["counts"].size());
        for (const auto& v : body["counts"]) {
            if (!v.is_number()) {
                bad("counts entries must be numbers");
                return;
            }
            x.push_back(v.get<double>());
        }
        if (x.size() != impl->target.input_dim()) {
            bad("expected " + std::to_string(impl->target.input_dim()) +
                " counts, got " + std::to_string(x.size()));
            return;
        }
        BudgetDecision d = impl->budget.check_and_consume();
        if (!d.allowed) {
            res.status = 429;
            res.set_content(
                json{{"retry_after_seconds",
                      static_cast<std::int64_t>(std::ceil(d.retry_after_seconds))}}
                    .dump(),
                "application/json");
            return;
        }
        nn::Prediction p = impl->target.classify(x);
        res.set_content(json{{"label", p.label},
                             {"score", p.score},
                             {"remaining", d.remaining}}
                            .dump(),
                        "application/json");
    });

    int bound = port == 0 ? server.bind_to_any_port(host)
                          : (server.bind_to_port(host, port) ? port : -1);
    if (bound <= 0)
        throw NetworkError("cannot bind " + host + ":" + std::to_string(port));
    port_ = bound;
    impl->thread = std::thread([&server] { server.listen_after_bind(); });
    server.wait_until_ready();
    return port_;
}

void OracleService::stop() {
    if (!impl_) return;
    if (impl_->thread.joinable()) {
        impl_->server.stop();
        impl_->thread.join();
    }
}

}  // namespace amlab
