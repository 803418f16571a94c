#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "am/backend.hpp"
#include "am/corpus.hpp"
#include "am/ensemble.hpp"
#include "am/promptgen.hpp"

namespace am {

struct ExperimentConfig {
    uint64_t seed = 0;
    std::string out_dir = "out";
    int repeats = 1;
    int concurrency = 1;
    bool certainty = true;
    std::vector<PromptId> prompts = {PromptId::P1, PromptId::P2, PromptId::P3,
                                     PromptId::P4};
    std::vector<VoteAlgorithm> algorithms = {VoteAlgorithm::Simple,
                                             VoteAlgorithm::Tiebreak,
                                             VoteAlgorithm::Weighted};
    std::vector<DatasetSpec> datasets;
    std::vector<BackendProfile> backends;
    std::string thesis_table_path;  // empty = builtin defaults

    // Prompts eligible for voting (P1-P4) selected by this experiment, in
    // canonical order.
    std::vector<PromptId> voting_prompts() const;

    void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::string& path);

}  // namespace am
