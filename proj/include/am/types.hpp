#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace am {

// Stance label. NoArgument is only legal in three-class (UKP-style) corpora.
enum class Label : uint8_t { For = 0, Against = 1, NoArgument = 2 };

enum class Mode : uint8_t { ThreeClass, TwoClass };

inline const char* to_string(Label l) {
    switch (l) {
        case Label::For: return "For";
        case Label::Against: return "Against";
        case Label::NoArgument: return "NoArgument";
    }
    return "?";
}

inline std::optional<Label> label_from_string(const std::string& s) {
    if (s == "For") return Label::For;
    if (s == "Against") return Label::Against;
    if (s == "NoArgument") return Label::NoArgument;
    return std::nullopt;
}

inline const char* to_string(Mode m) {
    return m == Mode::ThreeClass ? "ThreeClass" : "TwoClass";
}

inline std::optional<Mode> mode_from_string(const std::string& s) {
    if (s == "ThreeClass") return Mode::ThreeClass;
    if (s == "TwoClass") return Mode::TwoClass;
    return std::nullopt;
}

// Labels admitted by a mode, in canonical order.
inline std::vector<Label> labels_for(Mode m) {
    if (m == Mode::TwoClass) return {Label::For, Label::Against};
    return {Label::For, Label::Against, Label::NoArgument};
}

inline bool legal_in(Label l, Mode m) {
    return m == Mode::ThreeClass || l != Label::NoArgument;
}

// One corpus item.
struct Record {
    std::string id;
    std::string topic;
    std::string text;
    std::optional<std::string> thesis;
    Label gold = Label::For;
    std::string source;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace am
