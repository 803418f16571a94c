#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "am/backend.hpp"
#include "am/parsing.hpp"

using namespace am;
using json = nlohmann::json;

namespace {

std::string temp_path(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("am_backend_" + name);
    std::filesystem::remove(p);
    return p.string();
}

ChatTask make_task(const std::string& record, PromptId prompt, Label gold,
                   int repeat = 0) {
    ChatTask t;
    t.key = {"ds", record, prompt, repeat, TurnKind::Answer};
    t.messages = {{"user", "classify record " + record + " " + to_string(prompt)}};
    t.gold = gold;
    t.mode = Mode::ThreeClass;
    t.format = AnswerFormat::Words;
    return t;
}

BackendProfile http_profile() {
    BackendProfile p;
    p.name = "endpoint";
    p.kind = BackendKind::HttpChat;
    p.base_url = "http://localhost:1";
    p.model = "test-model";
    p.max_attempts = 3;
    return p;
}

std::string good_reply(const std::string& content) {
    json j;
    j["choices"] = json::array({{{"message", {{"role", "assistant"},
                                              {"content", content}}}}});
    return j.dump();
}

// Counts chat() invocations around an inner backend.
class CountingBackend : public Backend {
public:
    explicit CountingBackend(Backend& inner) : inner_(inner) {}
    ChatResult chat(const ChatTask& t) override {
        ++calls;
        return inner_.chat(t);
    }
    Backend& inner_;
    int calls = 0;
};

}  // namespace

TEST_CASE("scripted backend answers by message hash, then default, then fails") {
    ScriptedBackend b(std::optional<std::string>{"fallback"});
    std::vector<ChatMessage> msgs = {{"user", "hello"}};
    b.script(msgs, "scripted answer");
    ChatTask t;
    t.messages = msgs;
    CHECK(b.chat(t).text == "scripted answer");
    t.messages = {{"user", "unseen"}};
    CHECK(b.chat(t).text == "fallback");

    ScriptedBackend strict;
    auto r = strict.chat(t);
    CHECK_FALSE(r.ok);
    CHECK(r.error.find("no scripted response") != std::string::npos);
}

TEST_CASE("backoff grows geometrically and caps at the maximum") {
    BackoffSchedule s;
    CHECK(s.delay_for_attempt(1) == 500);
    CHECK(s.delay_for_attempt(2) == 1000);
    CHECK(s.delay_for_attempt(3) == 2000);
    CHECK(s.delay_for_attempt(10) == 8000);
}

TEST_CASE("http backend retries transient failures with backoff") {
    HttpChatBackend b(http_profile());
    std::vector<int> delays;
    b.set_sleeper([&](int ms) { delays.push_back(ms); });
    int call = 0;
    b.set_transport([&](const std::string&) -> std::pair<int, std::string> {
        ++call;
        if (call < 3) return {429, "slow down"};
        return {200, good_reply("For")};
    });
    ChatTask t;
    t.messages = {{"user", "q"}};
    auto r = b.chat(t);
    CHECK(r.ok);
    CHECK(r.text == "For");
    CHECK(r.attempts == 3);
    CHECK(delays == std::vector<int>{500, 1000});
}

TEST_CASE("http backend gives up after max attempts") {
    HttpChatBackend b(http_profile());
    b.set_sleeper([](int) {});
    int calls = 0;
    b.set_transport([&](const std::string&) -> std::pair<int, std::string> {
        ++calls;
        return {500, "boom"};
    });
    ChatTask t;
    t.messages = {{"user", "q"}};
    auto r = b.chat(t);
    CHECK_FALSE(r.ok);
    CHECK(r.attempts == 3);
    CHECK(calls == 3);
    CHECK(r.error.find("HTTP 500") != std::string::npos);
}

TEST_CASE("transport errors are retried like server errors") {
    HttpChatBackend b(http_profile());
    b.set_sleeper([](int) {});
    int call = 0;
    b.set_transport([&](const std::string&) -> std::pair<int, std::string> {
        return ++call == 1 ? std::pair<int, std::string>{0, "connection reset"}
                           : std::pair<int, std::string>{200, good_reply("A")};
    });
    ChatTask t;
    t.messages = {{"user", "q"}};
    auto r = b.chat(t);
    CHECK(r.ok);
    CHECK(r.attempts == 2);
}

TEST_CASE("authentication failures are terminal on the first attempt") {
    for (int status : {401, 403}) {
        HttpChatBackend b(http_profile());
        b.set_sleeper([](int) { FAIL("no backoff expected"); });
        b.set_transport([&](const std::string&) -> std::pair<int, std::string> {
            return {status, "denied"};
        });
        ChatTask t;
        t.messages = {{"user", "q"}};
        auto r = b.chat(t);
        CHECK_FALSE(r.ok);
        CHECK(r.attempts == 1);
        CHECK(r.error.find("authentication") != std::string::npos);
    }
}

TEST_CASE("other client errors do not retry") {
    HttpChatBackend b(http_profile());
    b.set_sleeper([](int) { FAIL("no backoff expected"); });
    b.set_transport([](const std::string&) -> std::pair<int, std::string> {
        return {400, "bad request"};
    });
    ChatTask t;
    t.messages = {{"user", "q"}};
    auto r = b.chat(t);
    CHECK_FALSE(r.ok);
    CHECK(r.attempts == 1);
}

TEST_CASE("a malformed 200 reply is retried exactly once") {
    SUBCASE("recovers on the second attempt") {
        HttpChatBackend b(http_profile());
        b.set_sleeper([](int) {});
        int call = 0;
        b.set_transport([&](const std::string&) -> std::pair<int, std::string> {
            return ++call == 1 ? std::pair<int, std::string>{200, "not json"}
                               : std::pair<int, std::string>{200, good_reply("N")};
        });
        ChatTask t;
        t.messages = {{"user", "q"}};
        auto r = b.chat(t);
        CHECK(r.ok);
        CHECK(r.attempts == 2);
    }
    SUBCASE("fails terminally on the second malformed reply") {
        HttpChatBackend b(http_profile());
        b.set_sleeper([](int) {});
        int calls = 0;
        b.set_transport([&](const std::string&) -> std::pair<int, std::string> {
            ++calls;
            return {200, "{\"choices\": []}"};
        });
        ChatTask t;
        t.messages = {{"user", "q"}};
        auto r = b.chat(t);
        CHECK_FALSE(r.ok);
        CHECK(calls == 2);
        CHECK(r.error.find("malformed") != std::string::npos);
    }
}

TEST_CASE("request body carries model, sampling settings and the system prompt") {
    BackendProfile p = http_profile();
    p.system_prompt = "be terse";
    HttpChatBackend b(p);
    json body = json::parse(b.build_request_body({{"user", "question"}}));
    CHECK(body.at("model") == "test-model");
    CHECK(body.at("temperature").get<double>() == doctest::Approx(0.6));
    CHECK(body.at("max_tokens") == 4096);
    REQUIRE(body.at("messages").size() == 2);
    CHECK(body["messages"][0]["role"] == "system");
    CHECK(body["messages"][1]["content"] == "question");
}

TEST_CASE("ledger lines round-trip") {
    Exchange e;
    e.key = {"ukp", "rec-7", PromptId::P3, 2, TurnKind::Certainty};
    e.request = {{"user", "a\nb"}, {"assistant", "For"}, {"user", "how sure?"}};
    e.response = "85";
    e.attempts = 2;
    e.latency_ms = 12.5;
    e.timestamp = 1700000000;
    e.ok = true;
    Exchange back = exchange_from_json_line(exchange_to_json_line(e));
    CHECK(back.key.str() == "ukp|rec-7|P3|2|certainty");
    CHECK(back.request.size() == 3);
    CHECK(back.request[0].content == "a\nb");
    CHECK(back.response == "85");
    CHECK(back.attempts == 2);
    CHECK(back.latency_ms == doctest::Approx(12.5));
    CHECK(back.timestamp == 1700000000);
    CHECK(back.ok);
}

TEST_CASE("ledger corruption reports the line number") {
    std::string path = temp_path("corrupt.jsonl");
    {
        Exchange e;
        e.key = {"ds", "r", PromptId::P1, 0, TurnKind::Answer};
        std::ofstream out(path);
        out << exchange_to_json_line(e) << "\n{broken\n";
    }
    try {
        read_ledger(path);
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    std::filesystem::remove(path);
}

TEST_CASE("run_batch executes answers plus certainty follow-ups and resumes") {
    StochasticBackend backend({}, 99);
    std::vector<BatchTask> tasks;
    for (int r = 0; r < 2; ++r)
        for (PromptId p : {PromptId::P1, PromptId::P2, PromptId::P3, PromptId::P4})
            tasks.push_back({make_task("rec" + std::to_string(r), p,
                                       r == 0 ? Label::For : Label::Against),
                             true});
    std::string path = temp_path("batch.jsonl");
    BatchOptions opts;
    opts.deterministic_timestamps = true;

    auto stats = run_batch(backend, tasks, path, opts);
    CHECK(stats.executed == 16);
    CHECK(stats.failed == 0);
    CHECK(stats.skipped == 0);
    CHECK(read_ledger(path).size() == 16);

    // A second run touches nothing: same bytes, all tasks skipped.
    std::ifstream in1(path, std::ios::binary);
    std::string before((std::istreambuf_iterator<char>(in1)), {});
    auto again = run_batch(backend, tasks, path, opts);
    CHECK(again.executed == 0);
    CHECK(again.skipped == 8);
    std::ifstream in2(path, std::ios::binary);
    std::string after((std::istreambuf_iterator<char>(in2)), {});
    CHECK(before == after);
    std::filesystem::remove(path);
}

TEST_CASE("an interrupted batch resumes to the identical final ledger state") {
    StochasticBackend backend({}, 1234);
    std::vector<BatchTask> tasks;
    for (int r = 0; r < 4; ++r)
        for (PromptId p : {PromptId::P1, PromptId::P2, PromptId::P3, PromptId::P4})
            tasks.push_back({make_task("rec" + std::to_string(r), p, Label(r % 3)),
                             true});

    BatchOptions opts;
    opts.deterministic_timestamps = true;

    std::string full_path = temp_path("full.jsonl");
    run_batch(backend, tasks, full_path, opts);
    auto full = read_ledger(full_path);
    REQUIRE(full.size() == 32);

    std::string part_path = temp_path("part.jsonl");
    BatchOptions capped = opts;
    capped.max_exchanges = 5;
    auto first = run_batch(backend, tasks, part_path, capped);
    CHECK(first.executed == 5);
    CHECK(read_ledger(part_path).size() == 5);
    auto second = run_batch(backend, tasks, part_path, opts);
    CHECK(first.executed + second.executed == 32);

    auto resumed = read_ledger(part_path);
    REQUIRE(resumed.size() == full.size());
    for (const auto& [key, e] : full) {
        REQUIRE(resumed.count(key) == 1);
        CHECK(resumed.at(key).response == e.response);
        CHECK(resumed.at(key).ok == e.ok);
    }
    std::filesystem::remove(full_path);
    std::filesystem::remove(part_path);
}

TEST_CASE("concurrent batches respect the in-flight limit and the seeded outputs") {
    StochasticBackend backend({}, 7);
    std::vector<BatchTask> tasks;
    for (int r = 0; r < 30; ++r)
        tasks.push_back({make_task("rec" + std::to_string(r), PromptId::P1,
                                   Label(r % 3)),
                         true});

    std::string serial_path = temp_path("serial.jsonl");
    BatchOptions serial;
    serial.deterministic_timestamps = true;
    run_batch(backend, tasks, serial_path, serial);

    std::string par_path = temp_path("parallel.jsonl");
    BatchOptions par = serial;
    par.concurrency = 4;
    auto stats = run_batch(backend, tasks, par_path, par);
    CHECK(stats.max_in_flight <= 4);
    CHECK(stats.max_in_flight >= 1);

    auto a = read_ledger(serial_path);
    auto b = read_ledger(par_path);
    REQUIRE(a.size() == b.size());
    for (const auto& [key, e] : a) CHECK(b.at(key).response == e.response);
    std::filesystem::remove(serial_path);
    std::filesystem::remove(par_path);
}

TEST_CASE("a failed answer writes a terminal certainty failure without a call") {
    ScriptedBackend inner;  // no script, no default: every call fails
    CountingBackend counting(inner);
    std::vector<BatchTask> tasks = {{make_task("r0", PromptId::P1, Label::For), true}};
    std::string path = temp_path("failed.jsonl");
    BatchOptions opts;
    opts.deterministic_timestamps = true;
    auto stats = run_batch(counting, tasks, path, opts);
    CHECK(counting.calls == 1);  // only the answer turn reached the backend
    CHECK(stats.executed == 2);
    CHECK(stats.failed == 2);
    auto ledger = read_ledger(path);
    REQUIRE(ledger.size() == 2);
    CHECK_FALSE(ledger.at("ds|r0|P1|0|answer").ok);
    CHECK_FALSE(ledger.at("ds|r0|P1|0|certainty").ok);
    CHECK(ledger.at("ds|r0|P1|0|certainty").attempts == 0);
    std::filesystem::remove(path);
}

TEST_CASE("stochastic mock hits its configured accuracy and certainty ranges") {
    StochasticBackend backend({}, 31337);
    const int n = 10000;
    int correct = 0;
    for (int i = 0; i < n; ++i) {
        ChatTask t = make_task("mc" + std::to_string(i), PromptId::P1, Label(i % 3));
        auto r = backend.chat(t);
        REQUIRE(r.ok);
        auto pred = parse_answer(r.text, AnswerFormat::Words, Mode::ThreeClass);
        REQUIRE(pred.answer_valid());
        bool was_correct = *pred.label == *t.gold;
        if (was_correct) ++correct;

        if (i < 2000) {
            ChatTask c = t;
            c.key.turn = TurnKind::Certainty;
            auto cr = backend.chat(c);
            REQUIRE(cr.ok);
            auto v = parse_certainty(cr.text);
            REQUIRE(v.has_value());
            int pct = int(*v * 100.0 + 0.5);
            if (was_correct) {
                CHECK(pct >= 60);
                CHECK(pct <= 95);
            } else {
                CHECK(pct >= 30);
                CHECK(pct <= 85);
            }
        }
    }
    double acc = double(correct) / n;
    CHECK(acc > 0.68);
    CHECK(acc < 0.72);
}

TEST_CASE("stochastic mock answers every format in its expected surface") {
    StochasticBackend backend({}, 4);
    ChatTask t = make_task("fmt", PromptId::P2, Label::Against);
    t.format = AnswerFormat::Letters;
    auto letters = parse_answer(backend.chat(t).text, AnswerFormat::Letters,
                                Mode::ThreeClass);
    CHECK(letters.answer_valid());
    t.format = AnswerFormat::CoTFinalLine;
    auto cot = parse_answer(backend.chat(t).text, AnswerFormat::CoTFinalLine,
                            Mode::ThreeClass);
    CHECK(cot.answer_valid());
    CHECK(cot.matched_rule == MatchedRule::FinalLine);
}

TEST_CASE("profile validation catches bad settings") {
    BackendProfile p = http_profile();
    p.base_url.clear();
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = http_profile();
    p.temperature = -0.1;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = http_profile();
    p.stochastic.accuracy[Label::For] = 1.5;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    CHECK_NOTHROW(http_profile().validate());
}
