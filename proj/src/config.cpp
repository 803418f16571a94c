#include "am/config.hpp"

#include <algorithm>
#include <fstream>

using json = nlohmann::json;

namespace am {

std::vector<PromptId> ExperimentConfig::voting_prompts() const {
    std::vector<PromptId> out;
    for (PromptId p : {PromptId::P1, PromptId::P2, PromptId::P3, PromptId::P4})
        if (std::find(prompts.begin(), prompts.end(), p) != prompts.end())
            out.push_back(p);
    return out;
}

void ExperimentConfig::validate() const {
    if (repeats < 1) throw ConfigError("repeats must be >= 1");
    if (concurrency < 1) throw ConfigError("concurrency must be >= 1");
    if (datasets.empty()) throw ConfigError("at least one dataset is required");
    if (backends.empty()) throw ConfigError("at least one backend is required");
    if (prompts.empty()) throw ConfigError("at least one prompt is required");
    if (certainty && voting_prompts().empty())
        throw ConfigError("certainty requires at least one of P1-P4");
    for (const auto& b : backends) b.validate();
    std::vector<std::string> names;
    for (const auto& d : datasets) {
        if (d.name.empty()) throw ConfigError("dataset without a name");
        if (d.crop_limit == 0) throw ConfigError("crop limit must be > 0");
        names.push_back(d.name);
    }
    std::sort(names.begin(), names.end());
    if (std::adjacent_find(names.begin(), names.end()) != names.end())
        throw ConfigError("duplicate dataset name");
}

namespace {

DatasetSpec dataset_from_json(const json& j) {
    DatasetSpec d;
    d.name = j.at("name").get<std::string>();
    auto mode = mode_from_string(j.value("mode", "ThreeClass"));
    if (!mode) throw ConfigError("dataset '" + d.name + "': unknown mode");
    d.mode = *mode;
    d.path = j.at("path").get<std::string>();
    d.format = j.value("format", "canonical");
    d.crop_limit = j.value("crop_limit", 2000u);
    d.trim_target = j.value("trim_target", 2000u);
    d.topic = j.value("topic", "");
    if (j.contains("adapter")) {
        const json& a = j["adapter"];
        std::string delim = a.value("delimiter", "\t");
        if (delim.size() != 1) throw ConfigError("adapter delimiter must be one character");
        d.adapter.delimiter = delim[0];
        d.adapter.has_header = a.value("has_header", true);
        if (a.contains("columns"))
            for (auto& [k, v] : a["columns"].items())
                d.adapter.columns[k] = v.get<std::string>();
        if (a.contains("label_aliases"))
            for (auto& [k, v] : a["label_aliases"].items())
                d.adapter.label_aliases[k] = v.get<std::string>();
    }
    return d;
}

json dataset_to_json(const DatasetSpec& d) {
    json j;
    j["name"] = d.name;
    j["mode"] = to_string(d.mode);
    j["path"] = d.path;
    j["format"] = d.format;
    j["crop_limit"] = d.crop_limit;
    j["trim_target"] = d.trim_target;
    if (!d.topic.empty()) j["topic"] = d.topic;
    json a;
    a["delimiter"] = std::string(1, d.adapter.delimiter);
    a["has_header"] = d.adapter.has_header;
    if (!d.adapter.columns.empty()) a["columns"] = d.adapter.columns;
    if (!d.adapter.label_aliases.empty()) a["label_aliases"] = d.adapter.label_aliases;
    j["adapter"] = std::move(a);
    return j;
}

BackendProfile backend_from_json(const json& j) {
    BackendProfile b;
    b.name = j.at("name").get<std::string>();
    auto kind = backend_kind_from_string(j.value("kind", "MockScripted"));
    if (!kind) throw ConfigError("backend '" + b.name + "': unknown kind");
    b.kind = *kind;
    b.base_url = j.value("base_url", "");
    b.chat_path = j.value("chat_path", "/v1/chat/completions");
    b.model = j.value("model", "");
    b.api_key_env = j.value("api_key_env", "");
    b.temperature = j.value("temperature", 0.6);
    b.max_new_tokens = j.value("max_new_tokens", 4096);
    if (j.contains("system_prompt") && !j["system_prompt"].is_null())
        b.system_prompt = j["system_prompt"].get<std::string>();
    b.timeout_sec = j.value("timeout_sec", 120);
    b.max_attempts = j.value("max_attempts", 3);
    if (j.contains("backoff")) {
        b.backoff.initial_ms = j["backoff"].value("initial_ms", 500);
        b.backoff.multiplier = j["backoff"].value("multiplier", 2.0);
        b.backoff.max_ms = j["backoff"].value("max_ms", 8000);
    }
    b.scripted_fixture_path = j.value("scripted_fixture", "");
    if (j.contains("scripted_default") && !j["scripted_default"].is_null())
        b.scripted_default = j["scripted_default"].get<std::string>();
    if (j.contains("stochastic")) {
        const json& s = j["stochastic"];
        if (s.contains("accuracy")) {
            b.stochastic.accuracy.clear();
            for (auto& [k, v] : s["accuracy"].items()) {
                auto l = label_from_string(k);
                if (!l) throw ConfigError("unknown label '" + k + "' in mock accuracy");
                b.stochastic.accuracy[*l] = v.get<double>();
            }
        }
        b.stochastic.certainty_correct_min = s.value("certainty_correct_min", 60);
        b.stochastic.certainty_correct_max = s.value("certainty_correct_max", 95);
        b.stochastic.certainty_wrong_min = s.value("certainty_wrong_min", 30);
        b.stochastic.certainty_wrong_max = s.value("certainty_wrong_max", 85);
    }
    b.mock_seed = j.value("mock_seed", 0ull);
    return b;
}

json backend_to_json(const BackendProfile& b) {
    json j;
    j["name"] = b.name;
    j["kind"] = to_string(b.kind);
    if (!b.base_url.empty()) j["base_url"] = b.base_url;
    j["chat_path"] = b.chat_path;
    if (!b.model.empty()) j["model"] = b.model;
    if (!b.api_key_env.empty()) j["api_key_env"] = b.api_key_env;
    j["temperature"] = b.temperature;
    j["max_new_tokens"] = b.max_new_tokens;
    if (b.system_prompt) j["system_prompt"] = *b.system_prompt;
    j["timeout_sec"] = b.timeout_sec;
    j["max_attempts"] = b.max_attempts;
    j["backoff"] = {{"initial_ms", b.backoff.initial_ms},
                    {"multiplier", b.backoff.multiplier},
                    {"max_ms", b.backoff.max_ms}};
    if (!b.scripted_fixture_path.empty()) j["scripted_fixture"] = b.scripted_fixture_path;
    if (b.scripted_default) j["scripted_default"] = *b.scripted_default;
    if (b.kind == BackendKind::MockStochastic) {
        json acc;
        for (const auto& [l, a] : b.stochastic.accuracy) acc[to_string(l)] = a;
        j["stochastic"] = {{"accuracy", std::move(acc)},
                           {"certainty_correct_min", b.stochastic.certainty_correct_min},
                           {"certainty_correct_max", b.stochastic.certainty_correct_max},
                           {"certainty_wrong_min", b.stochastic.certainty_wrong_min},
                           {"certainty_wrong_max", b.stochastic.certainty_wrong_max}};
        j["mock_seed"] = b.mock_seed;
    }
    return j;
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg;
    cfg.seed = j.value("seed", 0ull);
    cfg.out_dir = j.value("out_dir", "out");
    cfg.repeats = j.value("repeats", 1);
    cfg.concurrency = j.value("concurrency", 1);
    cfg.certainty = j.value("certainty", true);
    if (j.contains("prompts")) {
        cfg.prompts.clear();
        for (const auto& p : j["prompts"]) {
            auto id = prompt_id_from_string(p.get<std::string>());
            if (!id || *id == PromptId::CertaintyFollowup)
                throw ConfigError("unknown prompt id '" + p.get<std::string>() + "'");
            cfg.prompts.push_back(*id);
        }
    }
    if (j.contains("algorithms")) {
        cfg.algorithms.clear();
        for (const auto& a : j["algorithms"]) {
            std::string s = a.get<std::string>();
            if (s == "Simple")
                cfg.algorithms.push_back(VoteAlgorithm::Simple);
            else if (s == "Tiebreak")
                cfg.algorithms.push_back(VoteAlgorithm::Tiebreak);
            else if (s == "Weighted")
                cfg.algorithms.push_back(VoteAlgorithm::Weighted);
            else
                throw ConfigError("unknown voting algorithm '" + s + "'");
        }
    }
    for (const auto& d : j.value("datasets", json::array()))
        cfg.datasets.push_back(dataset_from_json(d));
    for (const auto& b : j.value("backends", json::array()))
        cfg.backends.push_back(backend_from_json(b));
    cfg.thesis_table_path = j.value("thesis_table", "");
    cfg.validate();
    return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["seed"] = cfg.seed;
    j["out_dir"] = cfg.out_dir;
    j["repeats"] = cfg.repeats;
    j["concurrency"] = cfg.concurrency;
    j["certainty"] = cfg.certainty;
    json prompts = json::array();
    for (PromptId p : cfg.prompts) prompts.push_back(to_string(p));
    j["prompts"] = std::move(prompts);
    json algos = json::array();
    for (VoteAlgorithm a : cfg.algorithms) algos.push_back(to_string(a));
    j["algorithms"] = std::move(algos);
    json ds = json::array();
    for (const auto& d : cfg.datasets) ds.push_back(dataset_to_json(d));
    j["datasets"] = std::move(ds);
    json bs = json::array();
    for (const auto& b : cfg.backends) bs.push_back(backend_to_json(b));
    j["backends"] = std::move(bs);
    if (!cfg.thesis_table_path.empty()) j["thesis_table"] = cfg.thesis_table_path;
    return j;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return config_from_json(j);
}

}  // namespace am
