#include "am/metrics.hpp"

#include <cmath>
#include <numeric>

namespace am {

size_t ConfusionMatrix::total() const {
    size_t n = 0;
    for (const auto& row : counts)
        for (size_t c : row) n += c;
    for (size_t c : abstained) n += c;
    return n;
}

ScoreReport score(const std::vector<Scored>& outcomes, Mode mode) {
    if (outcomes.empty()) throw ConfigError("score requires at least one outcome");
    ScoreReport rep;
    rep.confusion.mode = mode;
    size_t correct = 0;
    for (const auto& o : outcomes) {
        size_t g = static_cast<size_t>(o.gold);
        if (!o.predicted) {
            rep.confusion.abstained[g] += 1;
            continue;
        }
        size_t p = static_cast<size_t>(*o.predicted);
        rep.confusion.counts[g][p] += 1;
        if (g == p) ++correct;
    }
    rep.abstentions = std::accumulate(rep.confusion.abstained.begin(),
                                      rep.confusion.abstained.end(), size_t{0});
    rep.accuracy = static_cast<double>(correct) / static_cast<double>(outcomes.size());

    double f1_sum = 0.0;
    size_t classes = 0;
    for (Label l : labels_for(mode)) {
        size_t q = static_cast<size_t>(l);
        size_t tp = rep.confusion.counts[q][q];
        size_t fp = 0, fn = rep.confusion.abstained[q];
        for (size_t r = 0; r < 3; ++r) {
            if (r != q) {
                fp += rep.confusion.counts[r][q];
                fn += rep.confusion.counts[q][r];
            }
        }
        // A class that never occurs as gold and is never predicted is left
        // out of the macro average entirely.
        if (tp + fp + fn == 0) continue;
        ClassScores cs;
        cs.precision = (tp + fp) == 0 ? 0.0 : double(tp) / double(tp + fp);
        cs.recall = (tp + fn) == 0 ? 0.0 : double(tp) / double(tp + fn);
        cs.f1 = (cs.precision + cs.recall) == 0.0
                    ? 0.0
                    : 2.0 * cs.precision * cs.recall / (cs.precision + cs.recall);
        rep.per_class[l] = cs;
        f1_sum += cs.f1;
        ++classes;
    }
    rep.macro_f1 = classes == 0 ? 0.0 : f1_sum / static_cast<double>(classes);
    return rep;
}

Aggregate aggregate(const std::vector<std::vector<double>>& per_dataset_prompt_values) {
    if (per_dataset_prompt_values.empty())
        throw ConfigError("aggregate requires at least one dataset");
    Aggregate agg;
    for (const auto& prompts : per_dataset_prompt_values) {
        if (prompts.empty()) throw ConfigError("dataset with no prompt values");
        double m = std::accumulate(prompts.begin(), prompts.end(), 0.0) /
                   static_cast<double>(prompts.size());
        agg.dataset_means.push_back(m);
    }
    const size_t k = agg.dataset_means.size();
    agg.mean = std::accumulate(agg.dataset_means.begin(), agg.dataset_means.end(), 0.0) /
               static_cast<double>(k);
    if (k >= 2) {
        double ss = 0.0;
        for (double m : agg.dataset_means) ss += (m - agg.mean) * (m - agg.mean);
        double sd = std::sqrt(ss / static_cast<double>(k - 1));
        agg.standard_error = sd / std::sqrt(static_cast<double>(k));
    }
    return agg;
}

std::optional<double> fleiss_kappa(const std::vector<std::array<int, 3>>& item_counts,
                                   int raters) {
    if (raters < 2) throw ConfigError("fleiss_kappa requires at least 2 raters");
    if (item_counts.empty()) throw ConfigError("fleiss_kappa requires at least one item");
    const double n = raters;
    double p_bar = 0.0;
    std::array<double, 3> col{};
    for (const auto& item : item_counts) {
        int sum = item[0] + item[1] + item[2];
        if (sum != raters)
            throw ConfigError("item has " + std::to_string(sum) + " ratings, expected " +
                              std::to_string(raters));
        double agree = 0.0;
        for (size_t j = 0; j < 3; ++j) {
            agree += double(item[j]) * double(item[j]);
            col[j] += item[j];
        }
        p_bar += (agree - n) / (n * (n - 1.0));
    }
    const double items = static_cast<double>(item_counts.size());
    p_bar /= items;
    double p_e = 0.0;
    for (size_t j = 0; j < 3; ++j) {
        double pj = col[j] / (items * n);
        p_e += pj * pj;
    }
    if (p_e >= 1.0) {
        if (p_bar >= 1.0) return 1.0;  // unanimity in a single category
        return std::nullopt;
    }
    return (p_bar - p_e) / (1.0 - p_e);
}

ErrorBreakdown error_breakdown(const std::vector<Scored>& outcomes) {
    ErrorBreakdown b;
    b.total = outcomes.size();
    for (auto e : {ErrorType::AF, ErrorType::AN, ErrorType::FA, ErrorType::FN,
                   ErrorType::NA, ErrorType::NF})
        b.counts[e] = 0;
    for (const auto& o : outcomes) {
        if (!o.predicted) {
            ++b.abstentions;
            continue;
        }
        if (o.gold == *o.predicted) {
            ++b.correct;
            continue;
        }
        ErrorType e;
        if (o.gold == Label::Against)
            e = *o.predicted == Label::For ? ErrorType::AF : ErrorType::AN;
        else if (o.gold == Label::For)
            e = *o.predicted == Label::Against ? ErrorType::FA : ErrorType::FN;
        else
            e = *o.predicted == Label::Against ? ErrorType::NA : ErrorType::NF;
        ++b.counts[e];
    }
    const double denom_all = b.total == 0 ? 1.0 : static_cast<double>(b.total);
    const size_t predicted = b.total - b.abstentions;
    const double denom_pred = predicted == 0 ? 1.0 : static_cast<double>(predicted);
    for (const auto& [e, c] : b.counts) {
        b.share[e] = static_cast<double>(c) / denom_all;
        b.share_predicted[e] = static_cast<double>(c) / denom_pred;
    }
    return b;
}

AblationRow ablate(const std::vector<AblationInput>& inputs, VoteAlgorithm algorithm,
                   const TieBreaker& tb) {
    AblationRow row;
    if (inputs.empty()) return row;
    const double n = static_cast<double>(inputs.size());

    auto accuracy_for = [&](int dropped) {
        size_t correct = 0;
        for (const auto& in : inputs) {
            if (in.ballot.votes.size() != 4)
                throw ConfigError("ablation requires four-vote ballots");
            Ballot b;
            b.record_id = in.ballot.record_id;
            for (int i = 0; i < 4; ++i)
                if (i != dropped) b.votes.push_back(in.ballot.votes[i]);
            auto out = vote(b, algorithm, tb);
            if (out.final && *out.final == in.gold) ++correct;
        }
        return static_cast<double>(correct) / n;
    };

    double sum = 0.0;
    for (int d = 0; d < 4; ++d) {
        row.subset_accuracy[d] = accuracy_for(d);
        sum += row.subset_accuracy[d];
    }
    row.subset_average = sum / 4.0;
    row.full_accuracy = accuracy_for(-1);
    return row;
}

}  // namespace am
