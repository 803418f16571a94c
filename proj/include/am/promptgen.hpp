#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "am/types.hpp"

namespace am {

enum class PromptId : uint8_t { P1, P2, P3, P4, P5_CoT, CertaintyFollowup };

enum class AnswerFormat : uint8_t { Words, Letters, CoTFinalLine, Number };

inline const char* to_string(PromptId p) {
    switch (p) {
        case PromptId::P1: return "P1";
        case PromptId::P2: return "P2";
        case PromptId::P3: return "P3";
        case PromptId::P4: return "P4";
        case PromptId::P5_CoT: return "P5_CoT";
        case PromptId::CertaintyFollowup: return "CERTAINTY_FOLLOWUP";
    }
    return "?";
}

std::optional<PromptId> prompt_id_from_string(const std::string& s);

inline const char* to_string(AnswerFormat f) {
    switch (f) {
        case AnswerFormat::Words: return "Words";
        case AnswerFormat::Letters: return "Letters";
        case AnswerFormat::CoTFinalLine: return "CoTFinalLine";
        case AnswerFormat::Number: return "Number";
    }
    return "?";
}

// P1/P3 ask for verbal labels, P2/P4 for single letters.
AnswerFormat answer_format_for(PromptId p);

struct ChatMessage {
    std::string role;  // "system" | "user" | "assistant"
    std::string content;
};

struct PromptInstance {
    std::string record_id;
    PromptId prompt_id = PromptId::P1;
    std::vector<ChatMessage> messages;
    AnswerFormat expected_format = AnswerFormat::Words;
};

struct ThesisEntry {
    std::string short_thesis;
    std::string long_thesis;
};

// topic -> (short, long) thesis. Editable configuration; the defaults cover
// the eight UKP topics.
class ThesisTable {
public:
    static ThesisTable builtin();
    static ThesisTable from_json_file(const std::string& path);

    void set(const std::string& topic, ThesisEntry entry);
    const ThesisEntry* find(const std::string& topic) const;
    const std::map<std::string, ThesisEntry>& entries() const { return table_; }

private:
    std::map<std::string, ThesisEntry> table_;
};

class PromptRenderer {
public:
    explicit PromptRenderer(Mode mode, ThesisTable theses = ThesisTable::builtin())
        : mode_(mode), theses_(std::move(theses)) {}

    Mode mode() const { return mode_; }

    // Args.me-mode records carry their own thesis; UKP-mode records get the
    // long thesis for P2 and the short thesis otherwise.
    std::string resolve_thesis(const Record& record, PromptId prompt) const;

    PromptInstance render(const Record& record, PromptId prompt) const;
    PromptInstance render_cot(const Record& record) const;

    // Appends the model's own prior answer and the certainty question to a
    // P1-P4 instance.
    static PromptInstance render_certainty_followup(const PromptInstance& prior,
                                                    const std::string& assistant_answer);

    static std::string template_text(Mode mode, PromptId prompt);
    static const std::string& certainty_prompt_text();

private:
    Mode mode_;
    ThesisTable theses_;
};

}  // namespace am
