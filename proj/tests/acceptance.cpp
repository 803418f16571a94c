// Acceptance gate: one pass/fail line per criterion, nonzero exit on failure.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "am/backend.hpp"
#include "am/corpus.hpp"
#include "am/metrics.hpp"
#include "am/parsing.hpp"
#include "am/pipeline.hpp"

using namespace am;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Checker {
    bool ok = true;
    std::ostringstream why;

    void expect(bool cond, const std::string& message) {
        if (!cond) {
            if (!ok) why << "; ";
            ok = false;
            why << message;
        }
    }
};

std::string data_dir() {
    const char* dir = std::getenv("AM_TEST_DATA");
    if (!dir) throw std::runtime_error("AM_TEST_DATA is not set");
    return dir;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    return std::string((std::istreambuf_iterator<char>(in)), {});
}

bool close(double a, double b, double tol = 1e-12) { return std::fabs(a - b) <= tol; }

// ---- criterion 1: class quota allocation on the reference corpus sizes ----

void criterion_quotas(Checker& c) {
    struct Case {
        const char* name;
        std::vector<size_t> full;
        std::vector<size_t> expected;  // at target 2000
    };
    const std::vector<Case> cases = {
        {"abortion", {680, 822, 2427}, {346, 418, 1236}},
        {"cloning", {706, 839, 1494}, {465, 552, 983}},
        {"death penalty", {457, 1111, 2083}, {250, 609, 1141}},
        {"gun control", {787, 665, 1889}, {471, 398, 1131}},
        {"marijuana", {587, 626, 1262}, {474, 506, 1020}},
        {"nuclear energy", {606, 852, 2118}, {339, 476, 1185}},
        {"school uniforms", {545, 729, 1734}, {362, 485, 1153}},
        {"minimum wage", {576, 551, 1346}, {466, 446, 1088}},
        {"debatepedia", {15787, 5406}, {1490, 510}},
        {"debatewise", {8109, 5642}, {1179, 821}},
        {"idebate", {6445, 6603}, {988, 1012}},
    };
    for (const auto& cs : cases) {
        auto got = largest_remainder_quotas(cs.full, 2000);
        c.expect(got == cs.expected, std::string("quota mismatch for ") + cs.name);
    }
}

// ---- criterion 2: exhaustive voting vs a brute-force oracle ----

void criterion_voting(Checker& c) {
    const double levels[] = {0.0, 0.25, 0.5, 0.75, 1.0};
    TieBreaker tb(90210);
    for (int a = 0; a < 16 && c.ok; ++a)
        for (int b = 0; b < 16 && c.ok; ++b)
            for (int d = 0; d < 16 && c.ok; ++d)
                for (int e = 0; e < 16 && c.ok; ++e) {
                    Ballot bal;
                    bal.record_id = "x";
                    for (int slot : {a, b, d, e}) {
                        if (slot == 15)
                            bal.votes.push_back(Vote::invalid());
                        else
                            bal.votes.push_back(
                                Vote::of(Label(slot / 5), levels[slot % 5]));
                    }
                    std::array<int, 3> count{};
                    std::array<double, 3> scoresum{};
                    int valid = 0;
                    for (const auto& v : bal.votes)
                        if (v.label) {
                            count[size_t(*v.label)]++;
                            scoresum[size_t(*v.label)] += v.certainty;
                            valid++;
                        }
                    auto simple = vote(bal, VoteAlgorithm::Simple, tb);
                    auto tie = vote(bal, VoteAlgorithm::Tiebreak, tb);
                    auto weighted = vote(bal, VoteAlgorithm::Weighted, tb);
                    if (valid == 0) {
                        c.expect(!simple.final && !tie.final && !weighted.final,
                                 "empty ballot must abstain");
                        continue;
                    }
                    int best = std::max({count[0], count[1], count[2]});
                    std::vector<Label> winners;
                    for (size_t q = 0; q < 3; ++q)
                        if (count[q] == best) winners.push_back(Label(q));
                    c.expect(simple.final &&
                                 std::count(winners.begin(), winners.end(),
                                            *simple.final) == 1,
                             "simple winner not in the majority set");
                    if (winners.size() == 1) {
                        c.expect(tie.final == simple.final &&
                                     tie.tie_broken_by == TieBrokenBy::None,
                                 "tiebreak must reduce to simple majority");
                    } else {
                        double tbest = -1.0;
                        for (Label q : winners)
                            tbest = std::max(tbest, scoresum[size_t(q)]);
                        c.expect(tie.final &&
                                     close(scoresum[size_t(*tie.final)], tbest, 0.0),
                                 "tiebreak winner lacks the max certainty sum");
                        c.expect(vote(bal, VoteAlgorithm::Tiebreak, tb).final ==
                                     tie.final,
                                 "tiebreak result not reproducible");
                    }
                    double wbest = -1.0;
                    for (size_t q = 0; q < 3; ++q)
                        if (count[q] > 0) wbest = std::max(wbest, scoresum[q]);
                    c.expect(weighted.final && count[size_t(*weighted.final)] > 0 &&
                                 close(scoresum[size_t(*weighted.final)], wbest, 0.0),
                             "weighted winner lacks the max certainty sum");
                }
}

// ---- criterion 3: answer/certainty parser golden suite ----

void criterion_parser(Checker& c) {
    json g = json::parse(slurp(data_dir() + "/parser_golden.json"));
    size_t total = g.at("answers").size() + g.at("certainty").size();
    c.expect(total >= 60, "fewer than 60 parser fixtures");
    for (const auto& fx : g.at("answers")) {
        std::string fmt = fx.at("format");
        AnswerFormat format = fmt == "Words"     ? AnswerFormat::Words
                              : fmt == "Letters" ? AnswerFormat::Letters
                                                 : AnswerFormat::CoTFinalLine;
        Mode mode = fx.at("mode") == "three" ? Mode::ThreeClass : Mode::TwoClass;
        Prediction p = parse_answer(fx.at("raw").get<std::string>(), format, mode);
        std::string name = fx.at("name");
        if (fx.at("label").is_null()) {
            c.expect(!p.answer_valid(), "expected invalid: " + name);
        } else {
            c.expect(p.answer_valid() &&
                         *p.label == *label_from_string(fx.at("label")),
                     "wrong label: " + name);
        }
        c.expect(std::string(to_string(p.matched_rule)) == fx.at("rule"),
                 "wrong rule: " + name);
    }
    for (const auto& fx : g.at("certainty")) {
        auto v = parse_certainty(fx.at("raw").get<std::string>());
        std::string name = fx.at("name");
        if (fx.at("value").is_null())
            c.expect(!v.has_value(), "expected invalid certainty: " + name);
        else
            c.expect(v && close(*v, fx.at("value").get<double>()),
                     "wrong certainty: " + name);
    }
}

// ---- criterion 4: chance-corrected agreement ----

void criterion_kappa(Checker& c) {
    auto unanimous = fleiss_kappa({{3, 0, 0}, {3, 0, 0}, {3, 0, 0}}, 3);
    c.expect(unanimous && close(*unanimous, 1.0), "unanimous ratings must give 1.0");

    auto fixture = fleiss_kappa({{2, 1, 0}, {0, 3, 0}}, 3);
    c.expect(fixture && close(*fixture, 0.25), "hand fixture must give 0.25");

    auto spread = fleiss_kappa({{3, 0, 0}, {0, 3, 0}, {0, 0, 3}}, 3);
    c.expect(spread && close(*spread, 1.0), "perfect agreement must give 1.0");

    Rng rng(5150);
    for (int iter = 0; iter < 500 && c.ok; ++iter) {
        int raters = 2 + int(rng.below(5));
        std::vector<std::array<int, 3>> counts;
        size_t items = 1 + rng.below(25);
        for (size_t i = 0; i < items; ++i) {
            std::array<int, 3> item{};
            for (int r = 0; r < raters; ++r) item[rng.below(3)]++;
            counts.push_back(item);
        }
        auto k = fleiss_kappa(counts, raters);
        c.expect(k && *k <= 1.0 + 1e-9 && *k >= -1.0 - 1e-9,
                 "kappa escaped [-1, 1] on fuzzed input");
    }
}

// ---- criterion 5: classification metrics vs a brute-force recount ----

void criterion_metrics(Checker& c) {
    Rng rng(86);
    for (int iter = 0; iter < 1000 && c.ok; ++iter) {
        Mode mode = rng.below(2) ? Mode::TwoClass : Mode::ThreeClass;
        auto labels = labels_for(mode);
        std::vector<Scored> outcomes;
        size_t n = 1 + rng.below(50);
        for (size_t i = 0; i < n; ++i) {
            Scored s;
            s.gold = labels[rng.below(labels.size())];
            if (rng.below(5) != 0) s.predicted = labels[rng.below(labels.size())];
            outcomes.push_back(s);
        }
        auto rep = score(outcomes, mode);

        size_t correct = 0;
        for (const auto& o : outcomes)
            if (o.predicted && *o.predicted == o.gold) ++correct;
        c.expect(close(rep.accuracy, double(correct) / double(n)),
                 "accuracy mismatch");

        double f1_sum = 0.0;
        size_t classes = 0;
        for (Label l : labels) {
            size_t tp = 0, fp = 0, fn = 0;
            for (const auto& o : outcomes) {
                if (o.gold == l && o.predicted && *o.predicted == l) ++tp;
                if (o.gold != l && o.predicted && *o.predicted == l) ++fp;
                if (o.gold == l && (!o.predicted || *o.predicted != l)) ++fn;
            }
            if (tp + fp + fn == 0) {
                c.expect(rep.per_class.count(l) == 0,
                         "absent class included in macro average");
                continue;
            }
            double p = (tp + fp) == 0 ? 0.0 : double(tp) / double(tp + fp);
            double r = (tp + fn) == 0 ? 0.0 : double(tp) / double(tp + fn);
            double f1 = (p + r) == 0.0 ? 0.0 : 2 * p * r / (p + r);
            auto it = rep.per_class.find(l);
            c.expect(it != rep.per_class.end() && close(it->second.precision, p) &&
                         close(it->second.recall, r) && close(it->second.f1, f1),
                     "per-class score mismatch");
            f1_sum += f1;
            ++classes;
        }
        c.expect(close(rep.macro_f1, classes ? f1_sum / classes : 0.0),
                 "macro F1 mismatch");
    }
}

// ---- criterion 6: the certainty-aware ensemble beats its own voters ----

void criterion_ensemble_gain(Checker& c) {
    StochasticBackend backend({}, 777);
    const int n = 2000;
    const PromptId prompts[] = {PromptId::P1, PromptId::P2, PromptId::P3,
                                PromptId::P4};
    std::array<int, 4> prompt_correct{};
    int ensemble_correct = 0;
    TieBreaker tb(777);
    for (int i = 0; i < n; ++i) {
        Label gold = Label(i % 3);
        Ballot ballot;
        ballot.record_id = "g" + std::to_string(i);
        for (int pi = 0; pi < 4; ++pi) {
            ChatTask t;
            t.key = {"gain", ballot.record_id, prompts[pi], 0, TurnKind::Answer};
            t.messages = {{"user", "vote"}};
            t.gold = gold;
            t.mode = Mode::ThreeClass;
            t.format = AnswerFormat::Words;
            auto answer = backend.chat(t);
            auto pred = parse_answer(answer.text, AnswerFormat::Words,
                                     Mode::ThreeClass);
            ChatTask ct = t;
            ct.key.turn = TurnKind::Certainty;
            auto cert = parse_certainty(backend.chat(ct).text);
            if (pred.label) {
                if (*pred.label == gold) prompt_correct[pi]++;
                ballot.votes.push_back(Vote::of(*pred.label, cert.value_or(0.0)));
            } else {
                ballot.votes.push_back(Vote::invalid());
            }
        }
        auto out = vote(ballot, VoteAlgorithm::Tiebreak, tb);
        if (out.final && *out.final == gold) ++ensemble_correct;
    }
    double mean_single = 0.0;
    for (int pi = 0; pi < 4; ++pi) mean_single += double(prompt_correct[pi]) / n;
    mean_single /= 4.0;
    double ensemble = double(ensemble_correct) / n;
    std::ostringstream msg;
    msg << "ensemble " << ensemble << " vs mean single " << mean_single;
    c.expect(ensemble >= mean_single + 0.02, "no ensemble gain: " + msg.str());
}

// ---- criterion 7: end-to-end determinism, interruption and resume ----

ExperimentConfig pipeline_config(const fs::path& root, const std::string& out) {
    std::vector<Record> recs;
    for (int i = 0; i < 30; ++i) {
        Record r;
        r.id = "rec" + std::to_string(i);
        r.topic = "abortion";
        r.text = "Sentence number " + std::to_string(i) + " about the issue.";
        r.gold = Label(i % 3);
        r.source = "toy";
        recs.push_back(r);
    }
    std::string src = (root / "src.jsonl").string();
    write_canonical(recs, src);

    ExperimentConfig cfg;
    cfg.seed = 20240817;
    cfg.out_dir = (root / out).string();
    DatasetSpec ds;
    ds.name = "toy";
    ds.mode = Mode::ThreeClass;
    ds.format = "canonical";
    ds.path = src;
    ds.trim_target = 21;
    cfg.datasets.push_back(ds);
    BackendProfile b;
    b.name = "mock";
    b.kind = BackendKind::MockStochastic;
    cfg.backends.push_back(b);
    return cfg;
}

void criterion_determinism(Checker& c) {
    fs::path root = fs::temp_directory_path() / "am_acceptance_determinism";
    fs::remove_all(root);
    fs::create_directories(root);

    auto run_all = [&](const std::string& out) {
        auto cfg = pipeline_config(root, out);
        run_sample(cfg);
        run_inference(cfg);
        build_report(cfg);
        return cfg;
    };
    auto cfg_a = run_all("a");
    auto cfg_b = run_all("b");
    OutPaths pa{cfg_a.out_dir}, pb{cfg_b.out_dir};
    c.expect(slurp(pa.report_json()) == slurp(pb.report_json()),
             "reports differ between identical runs");
    c.expect(slurp(pa.report_text()) == slurp(pb.report_text()),
             "text reports differ between identical runs");
    c.expect(slurp(pa.dataset_file("toy")) == slurp(pb.dataset_file("toy")),
             "sampled datasets differ between identical runs");

    // Interrupt after 10 exchanges, then resume; the ledger must converge to
    // the uninterrupted run's key set and responses.
    auto cfg_c = pipeline_config(root, "c");
    run_sample(cfg_c);
    auto partial = run_inference(cfg_c, {}, 10);
    c.expect(partial.executed == 10, "interruption cap not honored");
    run_inference(cfg_c);
    auto full = read_ledger(OutPaths{cfg_a.out_dir}.ledger_file("mock", "toy"));
    auto resumed = read_ledger(OutPaths{cfg_c.out_dir}.ledger_file("mock", "toy"));
    c.expect(full.size() == resumed.size() && full.size() == 21 * 4 * 2,
             "resumed ledger has the wrong key count");
    for (const auto& [key, e] : full) {
        auto it = resumed.find(key);
        if (it == resumed.end() || it->second.response != e.response ||
            it->second.ok != e.ok) {
            c.expect(false, "resumed ledger diverges at " + key);
            break;
        }
    }
    fs::remove_all(root);
}

// ---- criterion 8: leave-one-out ablation vs precomputed values ----

void criterion_ablation(Checker& c) {
    // 20 records, gold all For; three vote patterns chosen so that no subset
    // ever needs a random tiebreak (certainty sums always differ).
    std::vector<AblationInput> inputs;
    for (int i = 0; i < 20; ++i) {
        AblationInput in;
        in.gold = Label::For;
        in.ballot.record_id = "abl" + std::to_string(i);
        if (i < 10) {
            in.ballot.votes = {Vote::of(Label::For, 0.9), Vote::of(Label::For, 0.8),
                               Vote::of(Label::For, 0.7), Vote::of(Label::For, 0.6)};
        } else if (i < 15) {
            in.ballot.votes = {Vote::of(Label::Against, 0.9),
                               Vote::of(Label::For, 0.8), Vote::of(Label::For, 0.7),
                               Vote::of(Label::For, 0.6)};
        } else {
            in.ballot.votes = {Vote::of(Label::Against, 0.9),
                               Vote::of(Label::Against, 0.8),
                               Vote::of(Label::For, 0.7), Vote::of(Label::For, 0.6)};
        }
        inputs.push_back(in);
    }
    TieBreaker tb(3);
    auto row = ablate(inputs, VoteAlgorithm::Tiebreak, tb);
    c.expect(close(row.subset_accuracy[0], 1.0), "drop-first accuracy wrong");
    c.expect(close(row.subset_accuracy[1], 1.0), "drop-second accuracy wrong");
    c.expect(close(row.subset_accuracy[2], 0.75), "drop-third accuracy wrong");
    c.expect(close(row.subset_accuracy[3], 0.75), "drop-fourth accuracy wrong");
    c.expect(close(row.subset_average, 0.875), "subset average wrong");
    c.expect(close(row.full_accuracy, 0.75), "full ensemble accuracy wrong");
}

}  // namespace

int main() {
    struct Criterion {
        const char* description;
        std::function<void(Checker&)> run;
    };
    const std::vector<Criterion> criteria = {
        {"class quota allocation reproduces the reference corpus splits",
         criterion_quotas},
        {"voting algorithms match a brute-force oracle on all four-voter ballots",
         criterion_voting},
        {"answer and certainty parsing passes the 60+ fixture golden suite",
         criterion_parser},
        {"chance-corrected agreement handles unanimity, fixtures and fuzzing",
         criterion_kappa},
        {"classification metrics match an independent recount on fuzzed data",
         criterion_metrics},
        {"certainty-weighted ensemble outperforms its mean single voter",
         criterion_ensemble_gain},
        {"pipeline runs are bit-deterministic and resume after interruption",
         criterion_determinism},
        {"leave-one-out ablation reproduces hand-computed accuracies",
         criterion_ablation},
    };

    int failures = 0;
    for (size_t i = 0; i < criteria.size(); ++i) {
        Checker c;
        try {
            criteria[i].run(c);
        } catch (const std::exception& e) {
            c.expect(false, std::string("exception: ") + e.what());
        }
        std::cout << (c.ok ? "PASS" : "FAIL") << " criterion " << (i + 1) << ": "
                  << criteria[i].description;
        if (!c.ok) {
            std::cout << " [" << c.why.str() << "]";
            ++failures;
        }
        std::cout << "\n";
    }
    return failures == 0 ? 0 : 1;
}
