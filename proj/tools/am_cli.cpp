#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "am/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

struct CliOptions {
    std::string config_path;
    std::string dataset_filter;
    std::string backend_filter;
    std::vector<std::string> prompt_filter;
    std::string out_dir;
    int64_t seed = -1;
    int repeats = 0;
    int concurrency = 0;
    bool resume = true;
};

am::ExperimentConfig effective_config(const CliOptions& opt) {
    am::ExperimentConfig cfg = am::load_config(opt.config_path);
    if (opt.seed >= 0) cfg.seed = static_cast<uint64_t>(opt.seed);
    if (opt.repeats > 0) cfg.repeats = opt.repeats;
    if (opt.concurrency > 0) cfg.concurrency = opt.concurrency;
    if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
    if (!opt.dataset_filter.empty()) {
        std::vector<am::DatasetSpec> kept;
        for (auto& d : cfg.datasets)
            if (d.name == opt.dataset_filter) kept.push_back(d);
        if (kept.empty())
            throw am::ConfigError("no dataset named '" + opt.dataset_filter +
                                  "' in config");
        cfg.datasets = std::move(kept);
    }
    if (!opt.backend_filter.empty()) {
        std::vector<am::BackendProfile> kept;
        for (auto& b : cfg.backends)
            if (b.name == opt.backend_filter) kept.push_back(b);
        if (kept.empty())
            throw am::ConfigError("no backend named '" + opt.backend_filter +
                                  "' in config");
        cfg.backends = std::move(kept);
    }
    if (!opt.prompt_filter.empty()) {
        cfg.prompts.clear();
        for (const auto& p : opt.prompt_filter) {
            auto id = am::prompt_id_from_string(p);
            if (!id) throw am::ConfigError("unknown prompt id '" + p + "'");
            cfg.prompts.push_back(*id);
        }
    }
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Argument classification harness: multi-prompt LLM inference, "
                 "certainty-aware voting, and evaluation"};
    app.require_subcommand(1);

    CliOptions opt;
    app.add_option("--config", opt.config_path, "experiment configuration file")
        ->required();
    app.add_option("--dataset", opt.dataset_filter, "restrict to one dataset");
    app.add_option("--model", opt.backend_filter, "restrict to one backend profile");
    app.add_option("--prompts", opt.prompt_filter, "prompt subset, e.g. P1 P2 P5_CoT");
    app.add_option("--seed", opt.seed, "override master seed");
    app.add_option("--repeats", opt.repeats, "override repeat count");
    app.add_option("--concurrency", opt.concurrency, "override concurrency limit");
    app.add_option("--out", opt.out_dir, "override output directory");
    app.add_flag("--resume,!--no-resume", opt.resume,
                 "reuse existing ledgers (default on)");

    auto* sub_ingest = app.add_subcommand("ingest", "ingest and crop the corpora");
    auto* sub_sample = app.add_subcommand("sample", "ingest, crop and stratified-trim");
    auto* sub_run = app.add_subcommand("run", "execute the inference batch");
    auto* sub_vote = app.add_subcommand("vote", "apply the voting algorithms");
    auto* sub_ablate = app.add_subcommand("ablate", "three-voter ablation grid");
    auto* sub_kappa = app.add_subcommand("kappa", "repeat-inference agreement");
    auto* sub_report = app.add_subcommand("report", "full evaluation report");
    auto* sub_dry = app.add_subcommand("dry-run", "print the planned request count");

    CLI11_PARSE(app, argc, argv);

    try {
        am::ExperimentConfig cfg = effective_config(opt);
        am::OutPaths paths{cfg.out_dir};

        if (sub_ingest->parsed() || sub_sample->parsed()) {
            auto manifests = am::run_sample(cfg);
            for (const auto& m : manifests) {
                std::cout << m.dataset << ": sampled " << m.sampled << " of "
                          << m.ingested << " (rejected " << m.rejected
                          << ", cropped " << m.dropped_by_crop << ")";
                if (!m.trimmed) std::cout << " [target exceeded corpus; kept all]";
                std::cout << "\n  quotas:";
                for (const auto& [label, n] : m.quotas)
                    std::cout << " " << label << "=" << n;
                std::cout << "\n";
            }
            return 0;
        }
        if (sub_dry->parsed()) {
            std::cout << "planned exchanges: " << am::count_planned_exchanges(cfg)
                      << "\n";
            return 0;
        }
        if (sub_run->parsed()) {
            if (!opt.resume) {
                for (const auto& b : cfg.backends)
                    for (const auto& d : cfg.datasets)
                        fs::remove(paths.ledger_file(b.name, d.name));
            }
            auto stats = am::run_inference(cfg);
            std::cout << "executed " << stats.executed << ", resumed past "
                      << stats.skipped << ", failed " << stats.failed << "\n";
            // Partial ledgers are preserved on exhaustion; signal it.
            return stats.failed > 0 ? 3 : 0;
        }
        if (sub_vote->parsed()) {
            std::cout << am::run_vote(cfg).dump(2) << "\n";
            return 0;
        }
        if (sub_ablate->parsed()) {
            std::cout << am::run_ablate(cfg).dump(2) << "\n";
            return 0;
        }
        if (sub_kappa->parsed()) {
            std::cout << am::run_kappa(cfg).dump(2) << "\n";
            return 0;
        }
        if (sub_report->parsed()) {
            am::build_report(cfg);
            std::cout << "wrote " << paths.report_json() << " and "
                      << paths.report_text() << "\n";
            return 0;
        }
    } catch (const am::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const am::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
