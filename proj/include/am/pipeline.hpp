#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "am/config.hpp"
#include "am/metrics.hpp"
#include "am/parsing.hpp"

namespace am {

// Output directory layout. Everything downstream of `run` regenerates from
// these files alone.
struct OutPaths {
    std::string root;

    std::string datasets_dir() const { return root + "/datasets"; }
    std::string ledgers_dir() const { return root + "/ledgers"; }
    std::string results_dir() const { return root + "/results"; }
    std::string reports_dir() const { return root + "/reports"; }

    std::string dataset_file(const std::string& ds) const {
        return datasets_dir() + "/" + ds + ".jsonl";
    }
    std::string manifest_file(const std::string& ds) const {
        return datasets_dir() + "/" + ds + ".manifest.json";
    }
    std::string ledger_file(const std::string& backend, const std::string& ds) const {
        return ledgers_dir() + "/" + backend + "__" + ds + ".jsonl";
    }
    std::string results_file(const std::string& backend, const std::string& ds) const {
        return results_dir() + "/" + backend + "__" + ds + ".jsonl";
    }
    std::string votes_file(const std::string& backend, const std::string& ds) const {
        return results_dir() + "/votes__" + backend + "__" + ds + ".jsonl";
    }
    std::string report_json() const { return reports_dir() + "/report.json"; }
    std::string report_text() const { return reports_dir() + "/report.txt"; }

    void create_all() const;
};

struct SampleManifest {
    std::string dataset;
    uint64_t seed = 0;
    size_t ingested = 0;
    size_t rejected = 0;
    size_t dropped_by_crop = 0;
    std::map<std::string, size_t> quotas;  // label -> count
    size_t sampled = 0;
    bool trimmed = true;  // false when target exceeded the cropped set
};

// One parsed prediction, keyed like the ledger.
struct ResultRow {
    std::string dataset;
    std::string record_id;
    PromptId prompt = PromptId::P1;
    int repeat = 0;
    Label gold = Label::For;
    Prediction pred;
};

using BackendFactory = std::function<std::unique_ptr<Backend>(const BackendProfile&)>;

// ingest + crop + stratified trim; writes canonical dataset files and a
// sampling manifest per dataset.
std::vector<SampleManifest> run_sample(const ExperimentConfig& cfg);

// Exchanges the full (records x prompts x repeats x backends) cross product
// would issue, counting certainty follow-ups. Opens no connection.
size_t count_planned_exchanges(const ExperimentConfig& cfg);

struct InferenceStats {
    size_t executed = 0;
    size_t skipped = 0;
    size_t failed = 0;
};

// Runs all batches with resume semantics and writes parsed results files.
// `factory` defaults to make_backend; tests substitute mocks or stubs.
// `max_exchanges` > 0 caps new exchanges per batch (interruption testing).
InferenceStats run_inference(const ExperimentConfig& cfg, BackendFactory factory = {},
                             size_t max_exchanges = 0);

// Re-parses existing ledgers into results files without touching backends.
void write_results(const ExperimentConfig& cfg);

std::vector<ResultRow> read_results(const std::string& path);

// Derived stages: pure functions of the results files.
nlohmann::json run_vote(const ExperimentConfig& cfg);
nlohmann::json run_kappa(const ExperimentConfig& cfg);
nlohmann::json run_ablate(const ExperimentConfig& cfg);
nlohmann::json build_report(const ExperimentConfig& cfg);  // writes report files

// Ballots grouped per (record, repeat) over the experiment's voting prompts,
// in deterministic order. Exposed for tests and the ablation path.
std::vector<std::pair<Label, Ballot>> build_ballots(const std::vector<ResultRow>& rows,
                                                    const std::vector<PromptId>& prompts,
                                                    int repeats);

}  // namespace am
