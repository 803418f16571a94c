#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "am/ensemble.hpp"
#include "am/types.hpp"

namespace am {

// counts[gold][predicted] plus one abstention column per gold class.
struct ConfusionMatrix {
    Mode mode = Mode::ThreeClass;
    std::array<std::array<size_t, 3>, 3> counts{};
    std::array<size_t, 3> abstained{};

    size_t total() const;
};

struct ClassScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct ScoreReport {
    ConfusionMatrix confusion;
    double accuracy = 0.0;
    std::map<Label, ClassScores> per_class;  // classes included in the macro average
    double macro_f1 = 0.0;
    size_t abstentions = 0;
};

// Labeled outcome for one record; absent prediction is an abstention and
// counts as incorrect.
struct Scored {
    Label gold;
    std::optional<Label> predicted;
};

ScoreReport score(const std::vector<Scored>& outcomes, Mode mode);

struct Aggregate {
    std::vector<double> dataset_means;  // prompt-averaged, one per dataset
    double mean = 0.0;
    std::optional<double> standard_error;  // absent when only one dataset
};

// Two-stage averaging: prompt values averaged within each dataset, then mean
// and standard error (sample sd over sqrt(k)) across datasets.
Aggregate aggregate(const std::vector<std::vector<double>>& per_dataset_prompt_values);

// Standard Fleiss' kappa over per-item category counts; every item must have
// exactly n ratings. Returns nullopt when P_e = 1 with imperfect agreement.
std::optional<double> fleiss_kappa(const std::vector<std::array<int, 3>>& item_counts,
                                   int raters);

// Six-way misclassification taxonomy over {Against, For, NoArgument}.
enum class ErrorType : uint8_t { AF, AN, FA, FN, NA, NF };

inline const char* to_string(ErrorType e) {
    switch (e) {
        case ErrorType::AF: return "AF";
        case ErrorType::AN: return "AN";
        case ErrorType::FA: return "FA";
        case ErrorType::FN: return "FN";
        case ErrorType::NA: return "NA";
        case ErrorType::NF: return "NF";
    }
    return "?";
}

struct ErrorBreakdown {
    std::map<ErrorType, size_t> counts;
    size_t correct = 0;
    size_t abstentions = 0;
    size_t total = 0;  // all predictions including correct ones
    // Shares over two denominators: with and without abstentions.
    std::map<ErrorType, double> share;             // / total
    std::map<ErrorType, double> share_predicted;   // / (total - abstentions)
};

ErrorBreakdown error_breakdown(const std::vector<Scored>& outcomes);

// Three-voter ablation: accuracy for each leave-one-out prompt subset, their
// average, and the full four-voter ensemble.
struct AblationRow {
    std::array<double, 4> subset_accuracy{};  // drop P1, drop P2, drop P3, drop P4
    double subset_average = 0.0;
    double full_accuracy = 0.0;
};

struct AblationInput {
    Label gold;
    Ballot ballot;  // exactly 4 votes, ordered P1..P4
};

AblationRow ablate(const std::vector<AblationInput>& inputs, VoteAlgorithm algorithm,
                   const TieBreaker& tb);

}  // namespace am
