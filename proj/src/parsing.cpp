#include "am/parsing.hpp"

#include <cctype>
#include <regex>
#include <sstream>

namespace am {

namespace {

// UTF-8 decode; invalid sequences pass through byte-wise.
std::vector<uint32_t> decode_utf8(const std::string& s) {
    std::vector<uint32_t> cps;
    cps.reserve(s.size());
    size_t i = 0;
    while (i < s.size()) {
        unsigned char c = s[i];
        uint32_t cp = c;
        size_t len = 1;
        if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        }
        if (i + len > s.size()) len = 1, cp = c;
        for (size_t k = 1; k < len; ++k) {
            unsigned char cont = s[i + k];
            if ((cont & 0xC0) != 0x80) {
                len = 1;
                cp = c;
                break;
            }
            cp = (cp << 6) | (cont & 0x3F);
        }
        cps.push_back(cp);
        i += len;
    }
    return cps;
}

void encode_utf8(uint32_t cp, std::string& out) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

bool is_space_cp(uint32_t cp) {
    switch (cp) {
        case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
        case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
        case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return (cp >= 0x2000 && cp <= 0x200A);
    }
}

// Unicode punctuation (category P plus the usual symbol-ish ASCII marks the
// original study's cleaning would have removed).
bool is_punct_cp(uint32_t cp) {
    if (cp < 0x80) return std::ispunct(static_cast<int>(cp)) != 0;
    switch (cp) {
        case 0xA1: case 0xA7: case 0xAB: case 0xB6: case 0xB7: case 0xBB:
        case 0xBF: case 0x37E: case 0x589: case 0x61F: case 0x3001:
        case 0x3002: case 0xFF01: case 0xFF0C: case 0xFF0E: case 0xFF1A:
        case 0xFF1B: case 0xFF1F:
            return true;
        default:
            return (cp >= 0x2010 && cp <= 0x2027) ||   // dashes, curly quotes, dots
                   (cp >= 0x2030 && cp <= 0x205E) ||   // per mille .. misc punctuation
                   (cp >= 0x3008 && cp <= 0x3011);     // CJK brackets
    }
}

// Emphasis markers survive cleaning; the fallback rule needs them.
bool is_emphasis_cp(uint32_t cp) { return cp == '\'' || cp == '"' || cp == '*'; }

const std::regex& words_start(Mode m) {
    static const std::regex three(R"(^\b(for|against|no argument)\b)");
    static const std::regex two(R"(^\b(for|against)\b)");
    return m == Mode::ThreeClass ? three : two;
}
const std::regex& words_end(Mode m) {
    static const std::regex three(R"(\b(for|against|no argument)\b$)");
    static const std::regex two(R"(\b(for|against)\b$)");
    return m == Mode::ThreeClass ? three : two;
}
const std::regex& letters_start(Mode m) {
    static const std::regex three(R"(^\b(f|a|n)\b)");
    static const std::regex two(R"(^\b(f|a)\b)");
    return m == Mode::ThreeClass ? three : two;
}
const std::regex& letters_end(Mode m) {
    static const std::regex three(R"(\b(f|a|n)\b$)");
    static const std::regex two(R"(\b(f|a)\b$)");
    return m == Mode::ThreeClass ? three : two;
}
const std::regex& fallback_words(Mode m) {
    static const std::regex three(
        R"((?:'|"|\*\*)(\s*)(for|against|no argument)(\s*)(?:'|"|\*\*))",
        std::regex::icase);
    static const std::regex two(R"((?:'|"|\*\*)(\s*)(for|against)(\s*)(?:'|"|\*\*))",
                                std::regex::icase);
    return m == Mode::ThreeClass ? three : two;
}
const std::regex& fallback_letters(Mode m) {
    static const std::regex three(R"((?:'|"|\*\*)(\s*)(f|a|n)(\s*)(?:'|"|\*\*))",
                                  std::regex::icase);
    static const std::regex two(R"((?:'|"|\*\*)(\s*)(f|a)(\s*)(?:'|"|\*\*))",
                                std::regex::icase);
    return m == Mode::ThreeClass ? three : two;
}
const std::regex& final_line(Mode m) {
    static const std::regex three(R"(final\s*:\s*<?\s*(for|against|no argument)\b)",
                                  std::regex::icase);
    static const std::regex two(R"(final\s*:\s*<?\s*(for|against)\b)",
                                std::regex::icase);
    return m == Mode::ThreeClass ? three : two;
}

Label keyword_to_label(std::string kw) {
    for (char& c : kw) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (kw == "for" || kw == "f") return Label::For;
    if (kw == "against" || kw == "a") return Label::Against;
    return Label::NoArgument;  // "no argument" / "n"
}

std::optional<Label> search_one(const std::string& text, const std::regex& re,
                                unsigned group = 1) {
    std::smatch m;
    if (std::regex_search(text, m, re)) return keyword_to_label(m[group].str());
    return std::nullopt;
}

}  // namespace

std::string clean(const std::string& raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;
    for (uint32_t cp : decode_utf8(raw)) {
        if (is_space_cp(cp)) {
            pending_space = true;
            continue;
        }
        if (is_punct_cp(cp) && !is_emphasis_cp(cp)) continue;
        if (pending_space && !out.empty()) out += ' ';
        pending_space = false;
        if (cp < 0x80)
            out += static_cast<char>(std::tolower(static_cast<int>(cp)));
        else
            encode_utf8(cp, out);
    }
    return out;
}

Prediction parse_answer(const std::string& raw, AnswerFormat format, Mode mode) {
    Prediction p;
    if (format == AnswerFormat::CoTFinalLine) {
        std::istringstream lines(raw);
        std::string line;
        while (std::getline(lines, line)) {
            if (auto l = search_one(line, final_line(mode))) {
                p.label = l;
                p.matched_rule = MatchedRule::FinalLine;
            }
        }
        return p;
    }
    if (format != AnswerFormat::Words && format != AnswerFormat::Letters)
        throw ConfigError("parse_answer expects Words, Letters or CoTFinalLine");

    const bool words = format == AnswerFormat::Words;
    const std::string cleaned = clean(raw);
    auto at_start = search_one(cleaned, words ? words_start(mode) : letters_start(mode));
    auto at_end = search_one(cleaned, words ? words_end(mode) : letters_end(mode));
    if (at_start && at_end && *at_start != *at_end) return p;  // conflicting anchors
    if (at_start || at_end) {
        p.label = at_start ? at_start : at_end;
        p.matched_rule = MatchedRule::Anchored;
        return p;
    }
    if (auto l = search_one(raw, words ? fallback_words(mode) : fallback_letters(mode), 2)) {
        p.label = l;
        p.matched_rule = MatchedRule::Emphasized;
    }
    return p;
}

std::optional<double> parse_certainty(const std::string& raw) {
    size_t i = 0;
    while (i < raw.size() && !std::isdigit(static_cast<unsigned char>(raw[i]))) ++i;
    if (i == raw.size()) return std::nullopt;
    uint64_t value = 0;
    bool overflow = false;
    while (i < raw.size() && std::isdigit(static_cast<unsigned char>(raw[i]))) {
        if (value > 1000)
            overflow = true;  // already past any valid percentage
        else
            value = value * 10 + static_cast<uint64_t>(raw[i] - '0');
        ++i;
    }
    if (overflow || value > 100) return std::nullopt;
    return static_cast<double>(value) / 100.0;
}

}  // namespace am
