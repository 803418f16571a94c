#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "am/promptgen.hpp"
#include "am/types.hpp"

namespace am {

enum class BackendKind : uint8_t { HttpChat, MockScripted, MockStochastic };

inline const char* to_string(BackendKind k) {
    switch (k) {
        case BackendKind::HttpChat: return "HttpChat";
        case BackendKind::MockScripted: return "MockScripted";
        case BackendKind::MockStochastic: return "MockStochastic";
    }
    return "?";
}

std::optional<BackendKind> backend_kind_from_string(const std::string& s);

struct BackoffSchedule {
    int initial_ms = 500;
    double multiplier = 2.0;
    int max_ms = 8000;

    int delay_for_attempt(int attempt) const;  // attempt is 1-based
};

struct StochasticMockConfig {
    // Probability of answering correctly, per gold class.
    std::map<Label, double> accuracy = {{Label::For, 0.7},
                                        {Label::Against, 0.7},
                                        {Label::NoArgument, 0.7}};
    // Self-rated certainty: uniform integer percent in the range matching
    // whether the answer was in fact correct.
    int certainty_correct_min = 60, certainty_correct_max = 95;
    int certainty_wrong_min = 30, certainty_wrong_max = 85;
};

struct BackendProfile {
    std::string name;
    BackendKind kind = BackendKind::MockScripted;
    std::string base_url;                    // HttpChat
    std::string chat_path = "/v1/chat/completions";
    std::string model;
    std::string api_key_env;                 // environment variable holding the key
    double temperature = 0.6;
    int max_new_tokens = 4096;
    std::optional<std::string> system_prompt;
    int timeout_sec = 120;
    int max_attempts = 3;
    BackoffSchedule backoff;
    std::string scripted_fixture_path;       // MockScripted
    std::optional<std::string> scripted_default;
    StochasticMockConfig stochastic;         // MockStochastic
    uint64_t mock_seed = 0;

    void validate() const;
};

enum class TurnKind : uint8_t { Answer, Certainty };

inline const char* to_string(TurnKind t) {
    return t == TurnKind::Answer ? "answer" : "certainty";
}

struct ExchangeKey {
    std::string dataset;
    std::string record_id;
    PromptId prompt_id = PromptId::P1;
    int repeat = 0;
    TurnKind turn = TurnKind::Answer;

    std::string str() const;
    bool operator<(const ExchangeKey& o) const { return str() < o.str(); }
    bool operator==(const ExchangeKey& o) const { return str() == o.str(); }
};

struct ChatTask {
    ExchangeKey key;
    std::vector<ChatMessage> messages;
    std::optional<Label> gold;  // mock metadata; real backends ignore it
    Mode mode = Mode::ThreeClass;
    AnswerFormat format = AnswerFormat::Words;
};

struct ChatResult {
    bool ok = false;
    std::string text;
    int attempts = 0;
    std::string error;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual ChatResult chat(const ChatTask& task) = 0;
};

// Deterministic lookup keyed by a hash of the message sequence.
class ScriptedBackend : public Backend {
public:
    explicit ScriptedBackend(std::optional<std::string> default_response = std::nullopt)
        : default_(std::move(default_response)) {}

    static uint64_t messages_hash(const std::vector<ChatMessage>& messages);

    void script(const std::vector<ChatMessage>& messages, std::string response);
    void script_hash(uint64_t hash, std::string response);
    void load_fixture(const std::string& path);  // JSON: {"<hash>": "<response>", ...}

    ChatResult chat(const ChatTask& task) override;

private:
    std::map<uint64_t, std::string> responses_;
    std::optional<std::string> default_;
};

// Answers correctly with configured per-class probability; errors uniform
// over the wrong labels; certainty drawn from the configured ranges. Seeded
// per exchange key, so output is independent of concurrency and call order.
class StochasticBackend : public Backend {
public:
    StochasticBackend(StochasticMockConfig cfg, uint64_t seed)
        : cfg_(std::move(cfg)), seed_(seed) {}

    ChatResult chat(const ChatTask& task) override;

private:
    Label draw_answer(const ChatTask& task) const;
    StochasticMockConfig cfg_;
    uint64_t seed_;
};

// Chat-completions client with bounded retries and exponential backoff.
// Transient failures (timeouts, 429, 5xx) are retried; auth failures are
// terminal immediately; a malformed reply is retried once.
class HttpChatBackend : public Backend {
public:
    explicit HttpChatBackend(BackendProfile profile);
    ChatResult chat(const ChatTask& task) override;

    // Test seam: replaces the actual HTTP POST. Returns (status, body);
    // status 0 means a transport error.
    using Transport = std::function<std::pair<int, std::string>(const std::string& body)>;
    void set_transport(Transport t) { transport_ = std::move(t); }
    void set_sleeper(std::function<void(int)> s) { sleeper_ = std::move(s); }

    std::string build_request_body(const std::vector<ChatMessage>& messages) const;

private:
    std::pair<int, std::string> post(const std::string& body);
    BackendProfile profile_;
    Transport transport_;
    std::function<void(int)> sleeper_;
};

std::unique_ptr<Backend> make_backend(const BackendProfile& profile);

// One completed (or terminally failed) request/response pair.
struct Exchange {
    ExchangeKey key;
    std::vector<ChatMessage> request;
    std::string response;
    int attempts = 0;
    double latency_ms = 0.0;
    int64_t timestamp = 0;  // unix seconds; 0 in deterministic runs
    bool ok = false;
};

// Append-only JSONL ledger; the unit of resumability.
class LedgerWriter {
public:
    explicit LedgerWriter(const std::string& path);
    void append(const Exchange& e);

private:
    std::string path_;
    std::mutex mu_;
};

std::string exchange_to_json_line(const Exchange& e);
Exchange exchange_from_json_line(const std::string& line);

// Parses a whole ledger; throws IoError with the line number on corruption.
std::map<std::string, Exchange> read_ledger(const std::string& path);

struct BatchTask {
    ChatTask answer;
    bool with_certainty = false;
};

struct BatchOptions {
    int concurrency = 1;
    bool deterministic_timestamps = false;
    size_t max_exchanges = 0;  // 0 = unlimited; >0 stops early (tests/resume)
};

struct BatchStats {
    size_t executed = 0;
    size_t skipped = 0;
    size_t failed = 0;
    int max_in_flight = 0;
};

// Executes every (task, certainty follow-up) not already terminal in the
// ledger at `ledger_path`. Answer responses are reused verbatim in the
// certainty follow-up conversation.
BatchStats run_batch(Backend& backend, const std::vector<BatchTask>& tasks,
                     const std::string& ledger_path, const BatchOptions& options);

}  // namespace am
