#pragma once

// The black-box side of the lab: a trainable target classifier, a
// fixed-window query budget, and a classify service exposed both
// in-process and over HTTP.
//
// Wire protocol (HTTP/1.1):
//   POST /classify  body {"counts":[ints]}
//     -> 200 {"label":1|2,"score":x,"remaining":n}
//     -> 429 {"retry_after_seconds":n}   budget exhausted
//     -> 400 {"error":"..."}             malformed body (budget untouched)
//   GET /healthz -> 200 {"status":"ok"}

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "amlab/dataset.hpp"
#include "amlab/nn.hpp"

namespace amlab {

enum class TargetKind : std::uint8_t { naive_bayes = 0, mlp = 1 };

// A frozen classifier behind the API.  Naive Bayes keeps explicit
// log-parameters; the mlp variant wraps an MlpModel.  Either way,
// classify is a pure function of the stored parameters.
struct TargetClassifier {
    TargetKind kind = TargetKind::naive_bayes;
    double threshold = 0.5;

    // naive_bayes parameters
    std::size_t n_features = 0;
    double log_prior[2] = {0.0, 0.0};
    std::vector<double> log_likelihood;  // 2 x n_features, class-major

    // mlp parameters
    nn::MlpModel mlp;

    std::size_t input_dim() const;
    // score = posterior probability of label 2; label from score vs threshold.
    nn::Prediction classify(const Features& x) const;
};

// Multinomial NB with add-one smoothing, or an MLP via the shared
// training loop.  Throws ValidationError on an empty or single-class
// dataset.
TargetClassifier train_mock_target(const Dataset& data, TargetKind kind,
                                   const nn::TrainConfig& mlp_config = {},
                                   std::size_t mlp_hidden_layers = 2,
                                   std::size_t mlp_neurons = 30);

void save_target(const TargetClassifier& target, const std::string& path);
TargetClassifier load_target(const std::string& path);
void write_target(std::ostream& out, const TargetClassifier& target);
TargetClassifier read_target(std::istream& in);

// Injectable time source, in seconds.  Tests drive ManualClock by hand
// so rate-limit windows roll without waiting.
class Clock {
public:
    virtual ~Clock() = default;
    virtual double now() = 0;
};

class SystemClock : public Clock {
public:
    double now() override;
};

class ManualClock : public Clock {
public:
    explicit ManualClock(double start = 0.0) : t_(start) {}
    double now() override { return t_; }
    void advance(double seconds) { t_ += seconds; }
    void set(double seconds) { t_ = seconds; }

private:
    double t_;
};

struct BudgetDecision {
    bool allowed = false;
    std::int64_t remaining = 0;       // after this call
    double retry_after_seconds = 0.0; // meaningful when denied
};

// Fixed-window counter: `limit` calls per `window` seconds, counted
// from window_start; the window rolls forward in whole multiples when
// time passes it.  check_and_consume is atomic.
class QueryBudget {
public:
    QueryBudget(std::int64_t limit, double window_seconds, Clock& clock);

    BudgetDecision check_and_consume();
    std::int64_t remaining();  // rolls the window first, consumes nothing
    std::int64_t limit() const { return limit_; }
    double window_seconds() const { return window_; }

private:
    void roll_locked(double now);

    std::int64_t limit_;
    double window_;
    Clock& clock_;
    std::int64_t consumed_ = 0;
    double window_start_;
    std::mutex mu_;
};

enum class ClassifyStatus { ok, rate_limited, protocol_error, network_error };

struct ClassifyOutcome {
    ClassifyStatus status = ClassifyStatus::ok;
    int label = 0;
    double score = 0.0;
    std::int64_t remaining = 0;
    double retry_after_seconds = 0.0;
    std::string detail;  // error text for protocol/network failures
};

// One metered query.  Validates the input before touching the budget,
// so a dimension mismatch never costs a call.
ClassifyOutcome classify(const TargetClassifier& target, QueryBudget& budget,
                         const Features& x);

// Adversary-side view of the API.  Implementations never retry.
class OracleClient {
public:
    virtual ~OracleClient() = default;
    virtual ClassifyOutcome classify(const Features& x) = 0;
};

class InProcessOracleClient : public OracleClient {
public:
    InProcessOracleClient(const TargetClassifier& target, QueryBudget& budget)
        : target_(target), budget_(budget) {}
    ClassifyOutcome classify(const Features& x) override;

private:
    const TargetClassifier& target_;
    QueryBudget& budget_;
};

class HttpOracleClient : public OracleClient {
public:
    HttpOracleClient(std::string host, int port);
    ClassifyOutcome classify(const Features& x) override;

private:
    std::string host_;
    int port_;
};

// HTTP front end.  start() binds and serves on a background thread;
// stop() joins it.  The target is immutable while serving.
class OracleService {
public:
    OracleService(TargetClassifier target, std::int64_t limit,
                  double window_seconds, Clock& clock);
    ~OracleService();

    // Binds host:port (port 0 picks a free port).  Returns the bound
    // port, or throws NetworkError.
    int start(const std::string& host, int port);
    void stop();
    int port() const { return port_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    int port_ = 0;
};

}  // namespace amlab
