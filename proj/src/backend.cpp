#include "am/backend.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "httplib.h"

#include "am/rng.hpp"

using json = nlohmann::json;

namespace am {

std::optional<BackendKind> backend_kind_from_string(const std::string& s) {
    if (s == "HttpChat") return BackendKind::HttpChat;
    if (s == "MockScripted") return BackendKind::MockScripted;
    if (s == "MockStochastic") return BackendKind::MockStochastic;
    return std::nullopt;
}

int BackoffSchedule::delay_for_attempt(int attempt) const {
    double d = initial_ms * std::pow(multiplier, attempt - 1);
    return static_cast<int>(std::min(d, static_cast<double>(max_ms)));
}

void BackendProfile::validate() const {
    if (name.empty()) throw ConfigError("backend profile needs a name");
    if (temperature < 0) throw ConfigError("temperature must be >= 0");
    if (max_new_tokens <= 0) throw ConfigError("max_new_tokens must be > 0");
    if (max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
    if (kind == BackendKind::HttpChat && (base_url.empty() || model.empty()))
        throw ConfigError("HttpChat backend '" + name + "' needs endpoint and model id");
    for (const auto& [l, a] : stochastic.accuracy)
        if (a < 0.0 || a > 1.0)
            throw ConfigError("mock accuracy for " + std::string(to_string(l)) +
                              " outside [0,1]");
}

std::string ExchangeKey::str() const {
    return dataset + "|" + record_id + "|" + to_string(prompt_id) + "|" +
           std::to_string(repeat) + "|" + to_string(turn);
}

// --- ScriptedBackend ---------------------------------------------------

uint64_t ScriptedBackend::messages_hash(const std::vector<ChatMessage>& messages) {
    uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::string_view s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        h ^= 0x1f;
        h *= 0x100000001b3ULL;
    };
    for (const auto& m : messages) {
        mix(m.role);
        mix(m.content);
    }
    return h;
}

void ScriptedBackend::script(const std::vector<ChatMessage>& messages,
                             std::string response) {
    responses_[messages_hash(messages)] = std::move(response);
}

void ScriptedBackend::script_hash(uint64_t hash, std::string response) {
    responses_[hash] = std::move(response);
}

void ScriptedBackend::load_fixture(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scripted fixture: " + path);
    json j = json::parse(in);
    for (auto& [k, v] : j.items())
        responses_[std::stoull(k)] = v.get<std::string>();
}

ChatResult ScriptedBackend::chat(const ChatTask& task) {
    ChatResult r;
    r.attempts = 1;
    auto it = responses_.find(messages_hash(task.messages));
    if (it != responses_.end()) {
        r.ok = true;
        r.text = it->second;
    } else if (default_) {
        r.ok = true;
        r.text = *default_;
    } else {
        r.error = "no scripted response for message hash";
    }
    return r;
}

// --- StochasticBackend -------------------------------------------------

Label StochasticBackend::draw_answer(const ChatTask& task) const {
    if (!task.gold) throw ConfigError("stochastic mock needs gold labels");
    ExchangeKey answer_key = task.key;
    answer_key.turn = TurnKind::Answer;
    Rng rng(derive_seed(seed_, "mock/answer/" + answer_key.str()));
    double acc = 0.7;
    if (auto it = cfg_.accuracy.find(*task.gold); it != cfg_.accuracy.end())
        acc = it->second;
    if (rng.unit() < acc) return *task.gold;
    auto labels = labels_for(task.mode);
    std::vector<Label> wrong;
    for (Label l : labels)
        if (l != *task.gold) wrong.push_back(l);
    return wrong[static_cast<size_t>(rng.below(wrong.size()))];
}

ChatResult StochasticBackend::chat(const ChatTask& task) {
    ChatResult r;
    r.attempts = 1;
    r.ok = true;
    if (task.key.turn == TurnKind::Answer) {
        Label a = draw_answer(task);
        switch (task.format) {
            case AnswerFormat::Letters:
                r.text = a == Label::For ? "F" : a == Label::Against ? "A" : "N";
                break;
            case AnswerFormat::CoTFinalLine:
                r.text = std::string("Considering the sentence step by step.\nFINAL: ") +
                         (a == Label::NoArgument ? "No Argument" : to_string(a));
                break;
            default:
                r.text = a == Label::NoArgument ? "No argument" : to_string(a);
        }
        return r;
    }
    // Certainty turn: reproduce the answer draw to know whether it was right.
    bool correct = draw_answer(task) == *task.gold;
    Rng rng(derive_seed(seed_, "mock/certainty/" + task.key.str()));
    int lo = correct ? cfg_.certainty_correct_min : cfg_.certainty_wrong_min;
    int hi = correct ? cfg_.certainty_correct_max : cfg_.certainty_wrong_max;
    r.text = std::to_string(rng.range(lo, hi));
    return r;
}

// --- HttpChatBackend ---------------------------------------------------

HttpChatBackend::HttpChatBackend(BackendProfile profile) : profile_(std::move(profile)) {
    profile_.validate();
    sleeper_ = [](int ms) { std::this_thread::sleep_for(std::chrono::milliseconds(ms)); };
}

std::string HttpChatBackend::build_request_body(
    const std::vector<ChatMessage>& messages) const {
    json body;
    body["model"] = profile_.model;
    body["temperature"] = profile_.temperature;
    body["max_tokens"] = profile_.max_new_tokens;
    json msgs = json::array();
    if (profile_.system_prompt)
        msgs.push_back({{"role", "system"}, {"content", *profile_.system_prompt}});
    for (const auto& m : messages)
        msgs.push_back({{"role", m.role}, {"content", m.content}});
    body["messages"] = std::move(msgs);
    return body.dump();
}

ChatResult HttpChatBackend::chat(const ChatTask& task) {
    const std::string body = build_request_body(task.messages);
    ChatResult r;
    bool malformed_retry_used = false;
    while (r.attempts < profile_.max_attempts) {
        ++r.attempts;
        auto [status, reply] = post(body);
        if (status == 401 || status == 403) {
            r.error = "authentication failure (HTTP " + std::to_string(status) + ")";
            return r;
        }
        bool transient = status == 0 || status == 408 || status == 429 || status >= 500;
        if (status == 200) {
            try {
                json j = json::parse(reply);
                r.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
                r.ok = true;
                return r;
            } catch (const std::exception& e) {
                r.error = std::string("malformed endpoint reply: ") + e.what();
                if (malformed_retry_used) return r;
                malformed_retry_used = true;
                transient = true;
            }
        } else if (!transient) {
            r.error = "HTTP " + std::to_string(status) + ": " + reply;
            return r;
        } else {
            r.error = status == 0 ? ("transport error: " + reply)
                                  : ("HTTP " + std::to_string(status));
        }
        if (r.attempts < profile_.max_attempts)
            sleeper_(profile_.backoff.delay_for_attempt(r.attempts));
    }
    return r;
}

std::pair<int, std::string> HttpChatBackend::post(const std::string& body) {
    if (transport_) return transport_(body);
    httplib::Client cli(profile_.base_url);
    cli.set_connection_timeout(profile_.timeout_sec, 0);
    cli.set_read_timeout(profile_.timeout_sec, 0);
    httplib::Headers headers;
    if (!profile_.api_key_env.empty()) {
        const char* key = std::getenv(profile_.api_key_env.c_str());
        if (!key)
            throw ConfigError("credential environment variable " + profile_.api_key_env +
                              " is not set");
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }
    auto res = cli.Post(profile_.chat_path, headers, body, "application/json");
    if (!res) return {0, httplib::to_string(res.error())};
    return {res->status, res->body};
}

std::unique_ptr<Backend> make_backend(const BackendProfile& profile) {
    profile.validate();
    switch (profile.kind) {
        case BackendKind::HttpChat:
            return std::make_unique<HttpChatBackend>(profile);
        case BackendKind::MockScripted: {
            auto b = std::make_unique<ScriptedBackend>(profile.scripted_default);
            if (!profile.scripted_fixture_path.empty())
                b->load_fixture(profile.scripted_fixture_path);
            return b;
        }
        case BackendKind::MockStochastic:
            return std::make_unique<StochasticBackend>(profile.stochastic,
                                                       profile.mock_seed);
    }
    throw ConfigError("unknown backend kind");
}

// --- Ledger ------------------------------------------------------------

std::string exchange_to_json_line(const Exchange& e) {
    json j;
    j["v"] = 1;
    j["dataset"] = e.key.dataset;
    j["record"] = e.key.record_id;
    j["prompt"] = to_string(e.key.prompt_id);
    j["repeat"] = e.key.repeat;
    j["turn"] = to_string(e.key.turn);
    json req = json::array();
    for (const auto& m : e.request) req.push_back({{"role", m.role}, {"content", m.content}});
    j["request"] = std::move(req);
    j["response"] = e.response;
    j["attempts"] = e.attempts;
    j["latency_ms"] = e.latency_ms;
    j["ts"] = e.timestamp;
    j["status"] = e.ok ? "ok" : "failed";
    return j.dump();
}

Exchange exchange_from_json_line(const std::string& line) {
    json j = json::parse(line);
    if (j.at("v").get<int>() != 1) throw std::runtime_error("unknown ledger schema version");
    Exchange e;
    e.key.dataset = j.at("dataset").get<std::string>();
    e.key.record_id = j.at("record").get<std::string>();
    auto pid = prompt_id_from_string(j.at("prompt").get<std::string>());
    if (!pid) throw std::runtime_error("unknown prompt id in ledger");
    e.key.prompt_id = *pid;
    e.key.repeat = j.at("repeat").get<int>();
    e.key.turn = j.at("turn").get<std::string>() == "certainty" ? TurnKind::Certainty
                                                                : TurnKind::Answer;
    for (const auto& m : j.at("request"))
        e.request.push_back({m.at("role").get<std::string>(),
                             m.at("content").get<std::string>()});
    e.response = j.at("response").get<std::string>();
    e.attempts = j.at("attempts").get<int>();
    e.latency_ms = j.at("latency_ms").get<double>();
    e.timestamp = j.at("ts").get<int64_t>();
    e.ok = j.at("status").get<std::string>() == "ok";
    return e;
}

LedgerWriter::LedgerWriter(const std::string& path) : path_(path) {
    std::ofstream probe(path_, std::ios::app);
    if (!probe) throw IoError("ledger path not writable: " + path_);
}

void LedgerWriter::append(const Exchange& e) {
    std::lock_guard<std::mutex> lock(mu_);
    std::ofstream out(path_, std::ios::app);
    out << exchange_to_json_line(e) << '\n';
    if (!out) throw IoError("failed to append to ledger: " + path_);
}

std::map<std::string, Exchange> read_ledger(const std::string& path) {
    std::map<std::string, Exchange> out;
    std::ifstream in(path);
    if (!in) return out;  // no ledger yet
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            Exchange e = exchange_from_json_line(line);
            out[e.key.str()] = std::move(e);
        } catch (const std::exception& ex) {
            throw IoError("corrupt ledger " + path + " at line " +
                          std::to_string(lineno) + ": " + ex.what());
        }
    }
    return out;
}

// --- run_batch ---------------------------------------------------------

namespace {

ChatTask certainty_task(const ChatTask& answer, const std::string& answer_text) {
    ChatTask t = answer;
    t.key.turn = TurnKind::Certainty;
    t.format = AnswerFormat::Number;
    t.messages.push_back({"assistant", answer_text});
    t.messages.push_back({"user", PromptRenderer::certainty_prompt_text()});
    return t;
}

}  // namespace

BatchStats run_batch(Backend& backend, const std::vector<BatchTask>& tasks,
                     const std::string& ledger_path, const BatchOptions& options) {
    if (options.concurrency < 1) throw ConfigError("concurrency limit must be >= 1");
    auto existing = read_ledger(ledger_path);
    LedgerWriter writer(ledger_path);

    BatchStats stats;
    std::atomic<size_t> next{0};
    std::atomic<size_t> executed{0}, skipped{0}, failed{0};
    std::atomic<size_t> budget_used{0};
    std::atomic<int> in_flight{0}, max_in_flight{0};
    std::mutex err_mu;
    std::exception_ptr first_error;

    auto over_budget = [&]() {
        return options.max_exchanges > 0 &&
               budget_used.load() >= options.max_exchanges;
    };

    auto timed_chat = [&](const ChatTask& task) -> Exchange {
        int now_in = ++in_flight;
        int seen = max_in_flight.load();
        while (now_in > seen && !max_in_flight.compare_exchange_weak(seen, now_in)) {
        }
        auto t0 = std::chrono::steady_clock::now();
        ChatResult res = backend.chat(task);
        auto t1 = std::chrono::steady_clock::now();
        --in_flight;
        Exchange e;
        e.key = task.key;
        e.request = task.messages;
        e.response = res.ok ? res.text : "";
        e.attempts = res.attempts;
        e.ok = res.ok;
        if (!options.deterministic_timestamps) {
            e.latency_ms =
                std::chrono::duration<double, std::milli>(t1 - t0).count();
            e.timestamp = static_cast<int64_t>(std::time(nullptr));
        }
        return e;
    };

    auto worker = [&]() {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            try {
                const BatchTask& bt = tasks[i];
                ExchangeKey akey = bt.answer.key;
                ExchangeKey ckey = akey;
                ckey.turn = TurnKind::Certainty;

                auto ait = existing.find(akey.str());
                bool have_answer = ait != existing.end();
                bool have_cert =
                    !bt.with_certainty || existing.count(ckey.str()) > 0;
                if (have_answer && have_cert) {
                    ++skipped;
                    continue;
                }

                std::string answer_text;
                bool answer_ok = false;
                if (have_answer) {
                    answer_text = ait->second.response;
                    answer_ok = ait->second.ok;
                } else {
                    if (over_budget()) continue;
                    ++budget_used;
                    Exchange e = timed_chat(bt.answer);
                    writer.append(e);
                    ++executed;
                    if (!e.ok) ++failed;
                    answer_text = e.response;
                    answer_ok = e.ok;
                }
                if (bt.with_certainty && !have_cert) {
                    if (over_budget()) continue;
                    ++budget_used;
                    if (answer_ok) {
                        Exchange e = timed_chat(certainty_task(bt.answer, answer_text));
                        writer.append(e);
                        ++executed;
                        if (!e.ok) ++failed;
                    } else {
                        // No usable prior turn to continue from; record a
                        // terminal failure so the key set stays complete.
                        Exchange e;
                        e.key = ckey;
                        e.request = bt.answer.messages;
                        e.ok = false;
                        e.attempts = 0;
                        writer.append(e);
                        ++executed;
                        ++failed;
                    }
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    int n_threads = std::min<int>(options.concurrency, static_cast<int>(tasks.size()));
    for (int t = 0; t < std::max(1, n_threads); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);

    stats.executed = executed;
    stats.skipped = skipped;
    stats.failed = failed;
    stats.max_in_flight = max_in_flight;
    return stats;
}

}  // namespace am
