#include "am/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "am/rng.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace am {

void OutPaths::create_all() const {
    for (const auto& d : {datasets_dir(), ledgers_dir(), results_dir(), reports_dir()})
        fs::create_directories(d);
}

namespace {

ThesisTable thesis_table_for(const ExperimentConfig& cfg) {
    if (cfg.thesis_table_path.empty()) return ThesisTable::builtin();
    return ThesisTable::from_json_file(cfg.thesis_table_path);
}

std::map<std::string, Label> gold_map(const std::vector<Record>& records) {
    std::map<std::string, Label> m;
    for (const auto& r : records) m[r.id] = r.gold;
    return m;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

}  // namespace

std::vector<SampleManifest> run_sample(const ExperimentConfig& cfg) {
    OutPaths paths{cfg.out_dir};
    paths.create_all();
    std::vector<SampleManifest> manifests;
    for (const auto& spec : cfg.datasets) {
        SampleManifest m;
        m.dataset = spec.name;
        m.seed = derive_seed(cfg.seed, "sample/" + spec.name);

        auto ingested = ingest(spec);
        m.ingested = ingested.records.size();
        m.rejected = ingested.rejections.size();
        auto cropped = crop(ingested.records, spec.crop_limit);
        m.dropped_by_crop = cropped.dropped;

        std::vector<Record> sampled;
        if (spec.trim_target <= cropped.kept.size()) {
            sampled = stratified_trim(cropped.kept, spec.trim_target, m.seed);
        } else {
            // Target exceeds the cropped set: keep everything, note it.
            sampled = cropped.kept;
            m.trimmed = false;
        }
        m.sampled = sampled.size();
        for (const auto& r : sampled) ++m.quotas[to_string(r.gold)];

        write_canonical(sampled, paths.dataset_file(spec.name));
        json j;
        j["dataset"] = m.dataset;
        j["seed"] = m.seed;
        j["ingested"] = m.ingested;
        j["rejected"] = m.rejected;
        j["dropped_by_crop"] = m.dropped_by_crop;
        j["quotas"] = m.quotas;
        j["sampled"] = m.sampled;
        j["trimmed"] = m.trimmed;
        std::ofstream out(paths.manifest_file(spec.name), std::ios::trunc);
        out << j.dump(2) << '\n';
        manifests.push_back(std::move(m));
    }
    return manifests;
}

size_t count_planned_exchanges(const ExperimentConfig& cfg) {
    OutPaths paths{cfg.out_dir};
    size_t total = 0;
    const size_t n_prompts = cfg.prompts.size();
    const size_t n_cert = cfg.certainty ? cfg.voting_prompts().size() : 0;
    for (const auto& spec : cfg.datasets) {
        size_t records = spec.trim_target;
        if (fs::exists(paths.dataset_file(spec.name)))
            records = read_canonical(paths.dataset_file(spec.name)).size();
        total += records * static_cast<size_t>(cfg.repeats) * (n_prompts + n_cert);
    }
    return total * cfg.backends.size();
}

namespace {

std::vector<BatchTask> build_tasks(const ExperimentConfig& cfg, const DatasetSpec& spec,
                                   const std::vector<Record>& records,
                                   const PromptRenderer& renderer) {
    std::vector<BatchTask> tasks;
    auto voting = cfg.voting_prompts();
    for (const auto& rec : records) {
        for (PromptId p : cfg.prompts) {
            PromptInstance inst = renderer.render(rec, p);
            bool cert = cfg.certainty &&
                        std::find(voting.begin(), voting.end(), p) != voting.end();
            for (int rep = 0; rep < cfg.repeats; ++rep) {
                BatchTask t;
                t.answer.key = {spec.name, rec.id, p, rep, TurnKind::Answer};
                t.answer.messages = inst.messages;
                t.answer.gold = rec.gold;
                t.answer.mode = spec.mode;
                t.answer.format = inst.expected_format;
                t.with_certainty = cert;
                tasks.push_back(std::move(t));
            }
        }
    }
    return tasks;
}

void write_results_for(const ExperimentConfig& cfg, const BackendProfile& backend,
                       const DatasetSpec& spec, const OutPaths& paths) {
    auto records = read_canonical(paths.dataset_file(spec.name));
    auto gold = gold_map(records);
    auto ledger = read_ledger(paths.ledger_file(backend.name, spec.name));

    std::vector<ResultRow> rows;
    for (const auto& [key, e] : ledger) {
        if (e.key.turn != TurnKind::Answer) continue;
        ResultRow row;
        row.dataset = spec.name;
        row.record_id = e.key.record_id;
        row.prompt = e.key.prompt_id;
        row.repeat = e.key.repeat;
        auto g = gold.find(row.record_id);
        if (g == gold.end())
            throw IoError("ledger record '" + row.record_id +
                          "' not present in dataset " + spec.name);
        row.gold = g->second;
        row.pred = parse_answer(e.response, answer_format_for(row.prompt), spec.mode);
        ExchangeKey ck = e.key;
        ck.turn = TurnKind::Certainty;
        if (auto it = ledger.find(ck.str()); it != ledger.end())
            row.pred.certainty = parse_certainty(it->second.response);
        rows.push_back(std::move(row));
    }
    std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
        return std::tie(a.record_id, a.prompt, a.repeat) <
               std::tie(b.record_id, b.prompt, b.repeat);
    });

    std::ofstream out(paths.results_file(backend.name, spec.name), std::ios::trunc);
    if (!out) throw IoError("cannot write results file");
    for (const auto& r : rows) {
        json j;
        j["dataset"] = r.dataset;
        j["record"] = r.record_id;
        j["prompt"] = to_string(r.prompt);
        j["repeat"] = r.repeat;
        j["gold"] = to_string(r.gold);
        j["label"] = r.pred.label ? json(to_string(*r.pred.label)) : json(nullptr);
        j["certainty"] = r.pred.certainty ? json(*r.pred.certainty) : json(nullptr);
        j["answer_valid"] = r.pred.answer_valid();
        j["certainty_valid"] = r.pred.certainty_valid();
        j["matched_rule"] = to_string(r.pred.matched_rule);
        out << j.dump() << '\n';
    }
}

}  // namespace

InferenceStats run_inference(const ExperimentConfig& cfg, BackendFactory factory,
                             size_t max_exchanges) {
    cfg.validate();
    OutPaths paths{cfg.out_dir};
    paths.create_all();
    if (!factory) factory = [](const BackendProfile& p) { return make_backend(p); };
    ThesisTable theses = thesis_table_for(cfg);

    InferenceStats stats;
    for (BackendProfile profile : cfg.backends) {
        if (profile.kind == BackendKind::MockStochastic && profile.mock_seed == 0)
            profile.mock_seed = derive_seed(cfg.seed, "mock/" + profile.name);
        auto backend = factory(profile);
        for (const auto& spec : cfg.datasets) {
            if (!fs::exists(paths.dataset_file(spec.name)))
                throw IoError("dataset " + spec.name +
                              " not prepared; run the sample step first");
            auto records = read_canonical(paths.dataset_file(spec.name));
            PromptRenderer renderer(spec.mode, theses);
            auto tasks = build_tasks(cfg, spec, records, renderer);
            BatchOptions opt;
            opt.concurrency = cfg.concurrency;
            opt.deterministic_timestamps = profile.kind != BackendKind::HttpChat;
            opt.max_exchanges = max_exchanges;
            auto b = run_batch(*backend, tasks, paths.ledger_file(profile.name, spec.name),
                               opt);
            stats.executed += b.executed;
            stats.skipped += b.skipped;
            stats.failed += b.failed;
            write_results_for(cfg, profile, spec, paths);
        }
    }
    return stats;
}

void write_results(const ExperimentConfig& cfg) {
    OutPaths paths{cfg.out_dir};
    paths.create_all();
    for (const auto& profile : cfg.backends)
        for (const auto& spec : cfg.datasets)
            write_results_for(cfg, profile, spec, paths);
}

std::vector<ResultRow> read_results(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open results file: " + path);
    std::vector<ResultRow> rows;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            json j = json::parse(line);
            ResultRow r;
            r.dataset = j.at("dataset").get<std::string>();
            r.record_id = j.at("record").get<std::string>();
            r.prompt = *prompt_id_from_string(j.at("prompt").get<std::string>());
            r.repeat = j.at("repeat").get<int>();
            r.gold = *label_from_string(j.at("gold").get<std::string>());
            if (!j.at("label").is_null())
                r.pred.label = label_from_string(j["label"].get<std::string>());
            if (!j.at("certainty").is_null())
                r.pred.certainty = j["certainty"].get<double>();
            std::string rule = j.value("matched_rule", "None");
            if (rule == "Anchored") r.pred.matched_rule = MatchedRule::Anchored;
            else if (rule == "Emphasized") r.pred.matched_rule = MatchedRule::Emphasized;
            else if (rule == "FinalLine") r.pred.matched_rule = MatchedRule::FinalLine;
            rows.push_back(std::move(r));
        } catch (const std::exception& e) {
            throw IoError("bad results line " + std::to_string(lineno) + " in " + path +
                          ": " + e.what());
        }
    }
    return rows;
}

std::vector<std::pair<Label, Ballot>> build_ballots(const std::vector<ResultRow>& rows,
                                                    const std::vector<PromptId>& prompts,
                                                    int repeats) {
    // (record, repeat) -> prompt -> prediction
    std::map<std::pair<std::string, int>, std::map<PromptId, const ResultRow*>> grouped;
    std::map<std::string, Label> gold;
    for (const auto& r : rows) {
        if (std::find(prompts.begin(), prompts.end(), r.prompt) == prompts.end())
            continue;
        grouped[{r.record_id, r.repeat}][r.prompt] = &r;
        gold[r.record_id] = r.gold;
    }
    std::vector<std::pair<Label, Ballot>> out;
    for (const auto& [key, preds] : grouped) {
        if (key.second >= repeats) continue;
        Ballot b;
        b.record_id = key.first + "#r" + std::to_string(key.second);
        for (PromptId p : prompts) {
            auto it = preds.find(p);
            if (it == preds.end() || !it->second->pred.label) {
                b.votes.push_back(Vote::invalid());
            } else {
                double c = it->second->pred.certainty.value_or(0.0);
                b.votes.push_back(Vote::of(*it->second->pred.label, c));
            }
        }
        out.emplace_back(gold.at(key.first), std::move(b));
    }
    return out;
}

namespace {

// Per-prompt metrics block for one results file.
json prompt_metrics(const std::vector<ResultRow>& rows, const ExperimentConfig& cfg,
                    Mode mode) {
    json out = json::object();
    for (PromptId p : cfg.prompts) {
        std::vector<Scored> scored;
        size_t inv_ans = 0, inv_cert = 0;
        for (const auto& r : rows) {
            if (r.prompt != p) continue;
            scored.push_back({r.gold, r.pred.label});
            if (!r.pred.answer_valid()) ++inv_ans;
            if (!r.pred.certainty_valid()) ++inv_cert;
        }
        if (scored.empty()) continue;
        auto rep = score(scored, mode);
        double prec = 0, rec = 0;
        for (const auto& [l, cs] : rep.per_class) {
            prec += cs.precision;
            rec += cs.recall;
        }
        size_t nc = rep.per_class.size();
        json m;
        m["n"] = scored.size();
        m["accuracy"] = rep.accuracy;
        m["precision"] = nc ? prec / nc : 0.0;
        m["recall"] = nc ? rec / nc : 0.0;
        m["macro_f1"] = rep.macro_f1;
        m["invalid_answers"] = inv_ans;
        m["invalid_certainties"] = inv_cert;
        out[to_string(p)] = std::move(m);
    }
    return out;
}

json vote_summary(const std::vector<ResultRow>& rows, const ExperimentConfig& cfg,
                  Mode mode, const TieBreaker& tb) {
    json out = json::object();
    auto ballots = build_ballots(rows, cfg.voting_prompts(), cfg.repeats);
    out["ballots"] = ballots.size();
    for (VoteAlgorithm a : cfg.algorithms) {
        std::vector<Scored> scored;
        size_t ties_cert = 0, ties_random = 0, abstentions = 0;
        for (const auto& [gold, ballot] : ballots) {
            auto o = vote(ballot, a, tb);
            scored.push_back({gold, o.final});
            if (!o.final) ++abstentions;
            if (o.tie_broken_by == TieBrokenBy::Certainty) ++ties_cert;
            if (o.tie_broken_by == TieBrokenBy::Random) ++ties_random;
        }
        json m;
        if (!scored.empty()) {
            auto rep = score(scored, mode);
            m["accuracy"] = rep.accuracy;
            m["macro_f1"] = rep.macro_f1;
        }
        m["ties_broken_by_certainty"] = ties_cert;
        m["ties_broken_by_random"] = ties_random;
        m["abstentions"] = abstentions;
        out[to_string(a)] = std::move(m);
    }
    return out;
}

json kappa_summary(const std::vector<ResultRow>& rows, const ExperimentConfig& cfg) {
    json out = json::object();
    for (PromptId p : cfg.prompts) {
        // record -> per-repeat labels
        std::map<std::string, std::vector<std::optional<Label>>> items;
        for (const auto& r : rows) {
            if (r.prompt != p) continue;
            auto& v = items[r.record_id];
            if (v.size() < static_cast<size_t>(cfg.repeats))
                v.resize(static_cast<size_t>(cfg.repeats));
            if (r.repeat < cfg.repeats) v[r.repeat] = r.pred.label;
        }
        std::vector<std::array<int, 3>> counts;
        size_t excluded = 0;
        for (const auto& [id, labels] : items) {
            std::array<int, 3> c{};
            bool ok = true;
            for (const auto& l : labels) {
                if (!l) {
                    ok = false;
                    break;
                }
                ++c[static_cast<size_t>(*l)];
            }
            if (ok)
                counts.push_back(c);
            else
                ++excluded;  // items with any invalid rating stay out of kappa
        }
        json m;
        m["items"] = counts.size();
        m["excluded_invalid"] = excluded;
        if (!counts.empty()) {
            auto k = fleiss_kappa(counts, cfg.repeats);
            m["kappa"] = k ? json(*k) : json(nullptr);
        } else {
            m["kappa"] = nullptr;
        }
        out[to_string(p)] = std::move(m);
    }
    return out;
}

json error_summary(const std::vector<ResultRow>& rows, const ExperimentConfig& cfg) {
    json out = json::object();
    for (PromptId p : cfg.prompts) {
        std::vector<Scored> scored;
        for (const auto& r : rows)
            if (r.prompt == p) scored.push_back({r.gold, r.pred.label});
        if (scored.empty()) continue;
        auto b = error_breakdown(scored);
        json m;
        m["correct"] = b.correct;
        m["abstentions"] = b.abstentions;
        m["total"] = b.total;
        json counts = json::object(), share = json::object(), share_pred = json::object();
        for (const auto& [e, c] : b.counts) {
            counts[to_string(e)] = c;
            share[to_string(e)] = b.share.at(e);
            share_pred[to_string(e)] = b.share_predicted.at(e);
        }
        m["counts"] = std::move(counts);
        m["share_of_all"] = std::move(share);
        m["share_of_predicted"] = std::move(share_pred);
        out[to_string(p)] = std::move(m);
    }
    return out;
}

json ablation_summary(const std::vector<ResultRow>& rows, const ExperimentConfig& cfg,
                      const TieBreaker& tb) {
    auto ballots = build_ballots(rows, cfg.voting_prompts(), cfg.repeats);
    std::vector<AblationInput> inputs;
    for (auto& [gold, ballot] : ballots) inputs.push_back({gold, std::move(ballot)});
    auto row = ablate(inputs, VoteAlgorithm::Tiebreak, tb);
    json m;
    m["drop_P1"] = row.subset_accuracy[0];
    m["drop_P2"] = row.subset_accuracy[1];
    m["drop_P3"] = row.subset_accuracy[2];
    m["drop_P4"] = row.subset_accuracy[3];
    m["subset_average"] = row.subset_average;
    m["full"] = row.full_accuracy;
    return m;
}

}  // namespace

json run_vote(const ExperimentConfig& cfg) {
    OutPaths paths{cfg.out_dir};
    TieBreaker tb(derive_seed(cfg.seed, "tie"));
    json out = json::object();
    for (const auto& profile : cfg.backends) {
        for (const auto& spec : cfg.datasets) {
            auto rows = read_results(paths.results_file(profile.name, spec.name));
            auto summary = vote_summary(rows, cfg, spec.mode, tb);

            // Per-record outcomes go to the votes file for post-hoc analysis.
            std::ofstream vf(paths.votes_file(profile.name, spec.name), std::ios::trunc);
            auto ballots = build_ballots(rows, cfg.voting_prompts(), cfg.repeats);
            for (const auto& [gold, ballot] : ballots) {
                for (VoteAlgorithm a : cfg.algorithms) {
                    auto o = vote(ballot, a, tb);
                    json j;
                    j["record"] = ballot.record_id;
                    j["algorithm"] = to_string(a);
                    j["gold"] = to_string(gold);
                    j["final"] = o.final ? json(to_string(*o.final)) : json(nullptr);
                    j["tally"] = o.tally;
                    j["score"] = o.score;
                    j["winner_set_size"] = o.winner_set_size;
                    j["tie_broken_by"] = to_string(o.tie_broken_by);
                    vf << j.dump() << '\n';
                }
            }
            out[profile.name][spec.name] = std::move(summary);
        }
    }
    return out;
}

json run_kappa(const ExperimentConfig& cfg) {
    if (cfg.repeats < 2) throw ConfigError("kappa requires repeats >= 2");
    OutPaths paths{cfg.out_dir};
    json out = json::object();
    for (const auto& profile : cfg.backends)
        for (const auto& spec : cfg.datasets)
            out[profile.name][spec.name] = kappa_summary(
                read_results(paths.results_file(profile.name, spec.name)), cfg);
    return out;
}

json run_ablate(const ExperimentConfig& cfg) {
    if (cfg.voting_prompts().size() != 4)
        throw ConfigError("ablation requires all four prompts P1-P4");
    OutPaths paths{cfg.out_dir};
    TieBreaker tb(derive_seed(cfg.seed, "tie"));
    json out = json::object();
    for (const auto& profile : cfg.backends)
        for (const auto& spec : cfg.datasets)
            out[profile.name][spec.name] = ablation_summary(
                read_results(paths.results_file(profile.name, spec.name)), cfg, tb);
    return out;
}

json build_report(const ExperimentConfig& cfg) {
    OutPaths paths{cfg.out_dir};
    paths.create_all();
    TieBreaker tb(derive_seed(cfg.seed, "tie"));

    json report;
    report["schema_version"] = 1;
    report["seed"] = cfg.seed;
    report["repeats"] = cfg.repeats;
    json prompts = json::array();
    for (PromptId p : cfg.prompts) prompts.push_back(to_string(p));
    report["prompts"] = std::move(prompts);

    for (const auto& profile : cfg.backends) {
        json per_ds = json::object();
        // dataset -> per-prompt accuracies / voted accuracies for aggregation
        std::vector<std::vector<double>> prompt_accs, prompt_f1s;
        std::map<std::string, std::vector<double>> vote_accs;
        for (const auto& spec : cfg.datasets) {
            auto rows = read_results(paths.results_file(profile.name, spec.name));
            json ds;
            ds["prompts"] = prompt_metrics(rows, cfg, spec.mode);
            ds["voting"] = vote_summary(rows, cfg, spec.mode, tb);
            if (spec.mode == Mode::ThreeClass)
                ds["error_taxonomy"] = error_summary(rows, cfg);
            if (cfg.repeats >= 2) ds["kappa"] = kappa_summary(rows, cfg);
            if (cfg.voting_prompts().size() == 4)
                ds["ablation"] = ablation_summary(rows, cfg, tb);

            std::vector<double> accs, f1s;
            for (PromptId p : cfg.voting_prompts()) {
                const auto& pm = ds["prompts"];
                if (pm.contains(to_string(p))) {
                    accs.push_back(pm[to_string(p)]["accuracy"].get<double>());
                    f1s.push_back(pm[to_string(p)]["macro_f1"].get<double>());
                }
            }
            if (!accs.empty()) {
                prompt_accs.push_back(accs);
                prompt_f1s.push_back(f1s);
            }
            for (VoteAlgorithm a : cfg.algorithms)
                vote_accs[to_string(a)].push_back(
                    ds["voting"][to_string(a)]["accuracy"].get<double>());
            per_ds[spec.name] = std::move(ds);
        }
        json agg;
        if (!prompt_accs.empty()) {
            auto acc = aggregate(prompt_accs);
            auto f1 = aggregate(prompt_f1s);
            agg["prompt_accuracy"] = {
                {"mean", acc.mean},
                {"se", acc.standard_error ? json(*acc.standard_error) : json(nullptr)}};
            agg["prompt_macro_f1"] = {
                {"mean", f1.mean},
                {"se", f1.standard_error ? json(*f1.standard_error) : json(nullptr)}};
        }
        for (const auto& [algo, accs] : vote_accs) {
            std::vector<std::vector<double>> wrapped;
            for (double a : accs) wrapped.push_back({a});
            auto v = aggregate(wrapped);
            agg["voting_accuracy"][algo] = {
                {"mean", v.mean},
                {"se", v.standard_error ? json(*v.standard_error) : json(nullptr)}};
        }
        report["backends"][profile.name] = {{"datasets", std::move(per_ds)},
                                            {"aggregate", std::move(agg)}};
    }

    std::ofstream jf(paths.report_json(), std::ios::trunc);
    jf << report.dump(2) << '\n';

    // Flat text rendering of the same numbers.
    std::ostringstream txt;
    for (const auto& profile : cfg.backends) {
        const json& b = report["backends"][profile.name];
        txt << "== backend " << profile.name << " ==\n";
        for (const auto& spec : cfg.datasets) {
            const json& ds = b["datasets"][spec.name];
            txt << "-- dataset " << spec.name << " --\n";
            txt << "prompt       n    acc     prec    rec     f1      inv.ans inv.cert\n";
            for (PromptId p : cfg.prompts) {
                std::string key = to_string(p);
                if (!ds["prompts"].contains(key)) continue;
                const json& m = ds["prompts"][key];
                txt << key;
                for (size_t i = key.size(); i < 12; ++i) txt << ' ';
                txt << m["n"].get<size_t>() << "  " << fmt(m["accuracy"].get<double>())
                    << "  " << fmt(m["precision"].get<double>()) << "  "
                    << fmt(m["recall"].get<double>()) << "  "
                    << fmt(m["macro_f1"].get<double>()) << "  "
                    << m["invalid_answers"].get<size_t>() << "  "
                    << m["invalid_certainties"].get<size_t>() << "\n";
            }
            for (VoteAlgorithm a : cfg.algorithms) {
                const json& m = ds["voting"][to_string(a)];
                txt << "vote " << to_string(a) << ": acc "
                    << fmt(m["accuracy"].get<double>()) << " f1 "
                    << fmt(m["macro_f1"].get<double>()) << "\n";
            }
            if (ds.contains("ablation")) {
                const json& ab = ds["ablation"];
                txt << "ablation P2,3,4 " << fmt(ab["drop_P1"].get<double>())
                    << " | P1,3,4 " << fmt(ab["drop_P2"].get<double>()) << " | P1,2,4 "
                    << fmt(ab["drop_P3"].get<double>()) << " | P1,2,3 "
                    << fmt(ab["drop_P4"].get<double>()) << " | avg "
                    << fmt(ab["subset_average"].get<double>()) << " | P1,2,3,4 "
                    << fmt(ab["full"].get<double>()) << "\n";
            }
            if (ds.contains("kappa")) {
                for (PromptId p : cfg.prompts) {
                    std::string key = to_string(p);
                    if (!ds["kappa"].contains(key)) continue;
                    const json& m = ds["kappa"][key];
                    txt << "kappa " << key << ": "
                        << (m["kappa"].is_null() ? std::string("n/a")
                                                 : fmt(m["kappa"].get<double>()))
                        << " (items " << m["items"].get<size_t>() << ", excluded "
                        << m["excluded_invalid"].get<size_t>() << ")\n";
                }
            }
        }
        const json& agg = b["aggregate"];
        if (agg.contains("prompt_accuracy")) {
            txt << "aggregate prompt acc " << fmt(agg["prompt_accuracy"]["mean"].get<double>());
            if (!agg["prompt_accuracy"]["se"].is_null())
                txt << " +/- " << fmt(agg["prompt_accuracy"]["se"].get<double>());
            txt << "\n";
        }
        txt << "\n";
    }
    std::ofstream tf(paths.report_text(), std::ios::trunc);
    tf << txt.str();
    return report;
}

}  // namespace am
