#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "am/rng.hpp"
#include "am/types.hpp"

namespace am {

enum class VoteAlgorithm : uint8_t { Simple, Tiebreak, Weighted };

inline const char* to_string(VoteAlgorithm a) {
    switch (a) {
        case VoteAlgorithm::Simple: return "Simple";
        case VoteAlgorithm::Tiebreak: return "Tiebreak";
        case VoteAlgorithm::Weighted: return "Weighted";
    }
    return "?";
}

enum class TieBrokenBy : uint8_t { None, Certainty, Random };

inline const char* to_string(TieBrokenBy t) {
    switch (t) {
        case TieBrokenBy::None: return "None";
        case TieBrokenBy::Certainty: return "Certainty";
        case TieBrokenBy::Random: return "Random";
    }
    return "?";
}

// One voter's contribution. An invalid vote carries no label and is excluded
// from both V and S; a valid vote with no usable certainty counts in V with
// certainty 0 in S.
struct Vote {
    std::optional<Label> label;
    double certainty = 0.0;

    static Vote invalid() { return {}; }
    static Vote of(Label l, double c = 0.0) { return {l, c}; }
};

struct Ballot {
    std::string record_id;
    std::vector<Vote> votes;
};

struct VoteOutcome {
    VoteAlgorithm algorithm = VoteAlgorithm::Simple;
    std::optional<Label> final;                  // absent = abstention
    std::array<int, 3> tally{};                  // V(q), indexed by Label
    std::array<double, 3> score{};               // S(q)
    int winner_set_size = 0;
    TieBrokenBy tie_broken_by = TieBrokenBy::None;
};

// Tie randomness derives from (seed, record id, algorithm) so outcomes are
// stable across runs and iteration orders.
class TieBreaker {
public:
    explicit TieBreaker(uint64_t experiment_seed) : seed_(experiment_seed) {}
    Rng rng_for(const std::string& record_id, VoteAlgorithm a) const {
        return Rng(derive_seed(seed_, std::string("tie/") + to_string(a) + "/" + record_id));
    }

private:
    uint64_t seed_;
};

VoteOutcome vote_simple(const Ballot& ballot, Rng rng);
VoteOutcome vote_tiebreak(const Ballot& ballot, Rng rng);
VoteOutcome vote_weighted(const Ballot& ballot, Rng rng);

VoteOutcome vote(const Ballot& ballot, VoteAlgorithm a, const TieBreaker& tb);

}  // namespace am
