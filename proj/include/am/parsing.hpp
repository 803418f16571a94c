#pragma once

#include <optional>
#include <string>

#include "am/promptgen.hpp"
#include "am/types.hpp"

namespace am {

enum class MatchedRule : uint8_t { Anchored, Emphasized, FinalLine, None };

inline const char* to_string(MatchedRule r) {
    switch (r) {
        case MatchedRule::Anchored: return "Anchored";
        case MatchedRule::Emphasized: return "Emphasized";
        case MatchedRule::FinalLine: return "FinalLine";
        case MatchedRule::None: return "None";
    }
    return "?";
}

// Parsed model output: the (label, certainty) pair plus validity flags.
// Certainty is stored normalized to [0, 1].
struct Prediction {
    std::optional<Label> label;
    std::optional<double> certainty;
    MatchedRule matched_rule = MatchedRule::None;

    bool answer_valid() const { return label.has_value(); }
    bool certainty_valid() const { return certainty.has_value(); }
};

// Lowercase; punctuation dropped except quotes and asterisks (the emphasis
// markers); whitespace runs collapsed; edges trimmed of whitespace and
// punctuation. Punctuation means the Unicode punctuation category, which may
// diverge microscopically from the original study's unspecified definition.
std::string clean(const std::string& raw);

// Anchored keyword/letter match on the cleaned text, emphasized-keyword
// fallback on the raw text, FINAL-line extraction for CoT output. A conflict
// between start- and end-anchored matches invalidates the answer.
Prediction parse_answer(const std::string& raw, AnswerFormat format, Mode mode);

// First maximal digit run as an integer percentage; > 100 is invalid.
std::optional<double> parse_certainty(const std::string& raw);

}  // namespace am
