#include "am/promptgen.hpp"

#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

using json = nlohmann::json;

namespace am {

std::optional<PromptId> prompt_id_from_string(const std::string& s) {
    if (s == "P1") return PromptId::P1;
    if (s == "P2") return PromptId::P2;
    if (s == "P3") return PromptId::P3;
    if (s == "P4") return PromptId::P4;
    if (s == "P5_CoT" || s == "P5") return PromptId::P5_CoT;
    if (s == "CERTAINTY_FOLLOWUP") return PromptId::CertaintyFollowup;
    return std::nullopt;
}

AnswerFormat answer_format_for(PromptId p) {
    switch (p) {
        case PromptId::P1:
        case PromptId::P3: return AnswerFormat::Words;
        case PromptId::P2:
        case PromptId::P4: return AnswerFormat::Letters;
        case PromptId::P5_CoT: return AnswerFormat::CoTFinalLine;
        case PromptId::CertaintyFollowup: return AnswerFormat::Number;
    }
    return AnswerFormat::Words;
}

namespace {

// Verbatim templates; typographic quotes normalized to plain double quotes.
const char* ukp_template(PromptId p) {
    switch (p) {
        case PromptId::P1:
            return "Is the sentence: \"{sentence}\" an argument for or against {thesis}, "
                   "or is it no argument? Return one of the expressions: \"For\", "
                   "\"Against\" or \"No argument\", without any additional commentary.";
        case PromptId::P2:
            return "The thesis is: \"{thesis}\" Indicate if the argument \"{sentence}\" "
                   "is for this thesis (F), against this thesis (A), or neutral (N). "
                   "Please respond with only one letter: F, A, or N, without any "
                   "additional commentary.";
        case PromptId::P3:
            return "In the context of the ongoing public debate, evaluate whether the "
                   "text \"{sentence}\" represents an argument supporting or opposing "
                   "\"{thesis}\", or whether it does not qualify as an argument at all. "
                   "Respond with one of the expressions: \"For\", \"Against\" or "
                   "\"No Argument\".";
        case PromptId::P4:
            return "Is the sentence: \"{sentence}\" an argument for (F) or against (A) "
                   "{thesis}, or is it no argument (N)? Return a single letter: F, A, "
                   "or N, without any additional commentary.";
        case PromptId::P5_CoT:
            return "Is the sentence: \"{sentence}\" an argument for or against {thesis} "
                   "or is it no argument?\n"
                   "Solve the argument classification problem. Think through the problem "
                   "step by step to solve it.\n"
                   "Then output one final line exactly in the format: "
                   "FINAL: <For|Against|No Argument>\n"
                   "Do not include anything after the FINAL line.";
        default: break;
    }
    throw std::logic_error("no template for prompt id");
}

const char* argsme_template(PromptId p) {
    switch (p) {
        case PromptId::P1:
            return "Is the sentence: \"{sentence}\" an argument for or against "
                   "\"{thesis}\"? Return one of the expressions: \"For\" or \"Against\", "
                   "without any additional commentary.";
        case PromptId::P2:
            return "The thesis is: \"{thesis}\" Indicate if the argument \"{sentence}\" "
                   "is for this thesis (F) or against this thesis (A). Please respond "
                   "with only one letter: F or A, without any additional commentary.";
        case PromptId::P3:
            return "In the context of the ongoing public debate, evaluate whether the "
                   "text \"{sentence}\" represents an argument supporting or opposing "
                   "\"{thesis}\". Respond with one of the expressions: \"For\" or "
                   "\"Against\".";
        case PromptId::P4:
            return "Is the sentence: \"{sentence}\" an argument for (F) or against (A) "
                   "{thesis}? Return a single letter: F or A, without any additional "
                   "commentary.";
        case PromptId::P5_CoT:
            return "Is the sentence: \"{sentence}\" an argument for or against "
                   "{thesis}?\n"
                   "Solve the argument classification problem. Think through the problem "
                   "step by step to solve it.\n"
                   "Then output one final line exactly in the format: "
                   "FINAL: <For|Against>\n"
                   "Do not include anything after the FINAL line.";
        default: break;
    }
    throw std::logic_error("no template for prompt id");
}

const std::string kCertaintyPrompt =
    "Return the certainty of your answer as a percentage. Output only a single "
    "number between 0 and 100, with no additional text.";

// Substitute each placeholder exactly once; a leftover marker means the
// template itself is corrupt.
std::string substitute(std::string text, const std::string& placeholder,
                       const std::string& value) {
    size_t pos = text.find(placeholder);
    if (pos == std::string::npos)
        throw std::logic_error("placeholder " + placeholder + " missing from template");
    text.replace(pos, placeholder.size(), value);
    return text;
}

}  // namespace

ThesisTable ThesisTable::builtin() {
    ThesisTable t;
    t.set("abortion", {"abortion", "Abortion should be fully accessible."});
    t.set("cloning", {"cloning", "Cloning should be allowed."});
    t.set("death", {"death penalty", "The death penalty should be allowed."});
    t.set("marijuana", {"legalisation of marijuana", "Marijuana should be legal."});
    t.set("gun", {"stricter gun laws", "Gun access should be limited."});
    t.set("wage", {"minimum wage",
                   "The minimum wage is justified and should be increased."});
    t.set("nuclear", {"nuclear energy", "Nuclear energy should be developed."});
    t.set("school", {"school uniforms",
                     "School uniforms should be the standard in education."});
    return t;
}

ThesisTable ThesisTable::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open thesis table: " + path);
    json j = json::parse(in);
    ThesisTable t;
    for (auto& [topic, entry] : j.items()) {
        t.set(topic, {entry.at("short").get<std::string>(),
                      entry.at("long").get<std::string>()});
    }
    return t;
}

void ThesisTable::set(const std::string& topic, ThesisEntry entry) {
    if (entry.short_thesis.empty() || entry.long_thesis.empty())
        throw ConfigError("thesis entries must be non-empty for topic '" + topic + "'");
    table_[topic] = std::move(entry);
}

const ThesisEntry* ThesisTable::find(const std::string& topic) const {
    auto it = table_.find(topic);
    return it == table_.end() ? nullptr : &it->second;
}

std::string PromptRenderer::resolve_thesis(const Record& record, PromptId prompt) const {
    if (record.thesis) return *record.thesis;
    const ThesisEntry* entry = theses_.find(record.topic);
    if (!entry)
        throw ConfigError("no thesis known for topic '" + record.topic +
                          "' (record " + record.id + ")");
    return prompt == PromptId::P2 ? entry->long_thesis : entry->short_thesis;
}

std::string PromptRenderer::template_text(Mode mode, PromptId prompt) {
    return mode == Mode::ThreeClass ? ukp_template(prompt) : argsme_template(prompt);
}

const std::string& PromptRenderer::certainty_prompt_text() { return kCertaintyPrompt; }

PromptInstance PromptRenderer::render(const Record& record, PromptId prompt) const {
    if (prompt == PromptId::CertaintyFollowup)
        throw ConfigError("certainty follow-up is rendered from a prior instance");
    std::string text = template_text(mode_, prompt);
    text = substitute(std::move(text), "{sentence}", record.text);
    text = substitute(std::move(text), "{thesis}", resolve_thesis(record, prompt));
    if (text.find("{sentence}") != std::string::npos ||
        text.find("{thesis}") != std::string::npos)
        throw std::logic_error("residual placeholder after substitution");

    PromptInstance inst;
    inst.record_id = record.id;
    inst.prompt_id = prompt;
    inst.expected_format = answer_format_for(prompt);
    inst.messages.push_back({"user", std::move(text)});
    return inst;
}

PromptInstance PromptRenderer::render_cot(const Record& record) const {
    return render(record, PromptId::P5_CoT);
}

PromptInstance PromptRenderer::render_certainty_followup(const PromptInstance& prior,
                                                         const std::string& assistant_answer) {
    switch (prior.prompt_id) {
        case PromptId::P1:
        case PromptId::P2:
        case PromptId::P3:
        case PromptId::P4: break;
        default:
            throw ConfigError("certainty follow-up is defined only for prompts P1-P4");
    }
    if (assistant_answer.empty())
        throw ConfigError("certainty follow-up requires the prior assistant answer");
    PromptInstance inst = prior;
    inst.prompt_id = PromptId::CertaintyFollowup;
    inst.expected_format = AnswerFormat::Number;
    inst.messages.push_back({"assistant", assistant_answer});
    inst.messages.push_back({"user", kCertaintyPrompt});
    return inst;
}

}  // namespace am
