#include "am/ensemble.hpp"

#include <algorithm>

namespace am {

namespace {

struct Tallies {
    std::array<int, 3> count{};
    std::array<double, 3> score{};
    int valid = 0;
};

Tallies tally(const Ballot& ballot) {
    Tallies t;
    for (const auto& v : ballot.votes) {
        if (!v.label) continue;
        size_t q = static_cast<size_t>(*v.label);
        t.count[q] += 1;
        t.score[q] += v.certainty;
        t.valid += 1;
    }
    return t;
}

std::vector<Label> count_winners(const Tallies& t) {
    int best = *std::max_element(t.count.begin(), t.count.end());
    std::vector<Label> w;
    for (size_t q = 0; q < 3; ++q)
        if (t.count[q] == best && best > 0) w.push_back(static_cast<Label>(q));
    return w;
}

Label draw(const std::vector<Label>& options, Rng& rng) {
    return options[static_cast<size_t>(rng.below(options.size()))];
}

VoteOutcome base_outcome(VoteAlgorithm a, const Tallies& t) {
    VoteOutcome out;
    out.algorithm = a;
    out.tally = t.count;
    out.score = t.score;
    return out;
}

}  // namespace

VoteOutcome vote_simple(const Ballot& ballot, Rng rng) {
    Tallies t = tally(ballot);
    VoteOutcome out = base_outcome(VoteAlgorithm::Simple, t);
    if (t.valid == 0) return out;  // abstention
    auto winners = count_winners(t);
    out.winner_set_size = static_cast<int>(winners.size());
    if (winners.size() == 1) {
        out.final = winners[0];
    } else {
        out.final = draw(winners, rng);
        out.tie_broken_by = TieBrokenBy::Random;
    }
    return out;
}

VoteOutcome vote_tiebreak(const Ballot& ballot, Rng rng) {
    Tallies t = tally(ballot);
    VoteOutcome out = base_outcome(VoteAlgorithm::Tiebreak, t);
    if (t.valid == 0) return out;
    auto winners = count_winners(t);
    out.winner_set_size = static_cast<int>(winners.size());
    if (winners.size() == 1) {
        out.final = winners[0];
        return out;
    }
    // Certainty sums decide among the count-tied labels; a residual tie in S
    // falls back to the seeded uniform draw.
    double best = -1.0;
    for (Label q : winners) best = std::max(best, t.score[static_cast<size_t>(q)]);
    std::vector<Label> top;
    for (Label q : winners)
        if (t.score[static_cast<size_t>(q)] == best) top.push_back(q);
    if (top.size() == 1) {
        out.final = top[0];
        out.tie_broken_by = TieBrokenBy::Certainty;
    } else {
        out.final = draw(top, rng);
        out.tie_broken_by = TieBrokenBy::Random;
    }
    return out;
}

VoteOutcome vote_weighted(const Ballot& ballot, Rng rng) {
    Tallies t = tally(ballot);
    VoteOutcome out = base_outcome(VoteAlgorithm::Weighted, t);
    if (t.valid == 0) return out;
    // Candidates are labels that received at least one valid vote, so an
    // all-zero S still draws among voted labels only.
    double best = -1.0;
    for (size_t q = 0; q < 3; ++q)
        if (t.count[q] > 0) best = std::max(best, t.score[q]);
    std::vector<Label> top;
    for (size_t q = 0; q < 3; ++q)
        if (t.count[q] > 0 && t.score[q] == best) top.push_back(static_cast<Label>(q));
    out.winner_set_size = static_cast<int>(top.size());
    if (top.size() == 1) {
        out.final = top[0];
    } else {
        out.final = draw(top, rng);
        out.tie_broken_by = TieBrokenBy::Random;
    }
    return out;
}

VoteOutcome vote(const Ballot& ballot, VoteAlgorithm a, const TieBreaker& tb) {
    Rng rng = tb.rng_for(ballot.record_id, a);
    switch (a) {
        case VoteAlgorithm::Simple: return vote_simple(ballot, std::move(rng));
        case VoteAlgorithm::Tiebreak: return vote_tiebreak(ballot, std::move(rng));
        case VoteAlgorithm::Weighted: return vote_weighted(ballot, std::move(rng));
    }
    throw ConfigError("unknown voting algorithm");
}

}  // namespace am
