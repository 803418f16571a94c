#include "am/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "am/rng.hpp"

using json = nlohmann::json;

namespace am {

size_t utf8_length(const std::string& s) {
    size_t n = 0;
    for (unsigned char c : s)
        if ((c & 0xC0) != 0x80) ++n;  // count non-continuation bytes
    return n;
}

std::map<std::string, std::string> default_label_aliases() {
    return {
        {"Argument_for", "For"},     {"Argument_against", "Against"},
        {"NoArgument", "NoArgument"}, {"PRO", "For"},
        {"CON", "Against"},          {"For", "For"},
        {"Against", "Against"},
    };
}

namespace {

std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, delim)) out.push_back(field);
    if (!line.empty() && line.back() == delim) out.emplace_back();
    return out;
}

std::optional<Label> normalize_label(const std::string& raw,
                                     const std::map<std::string, std::string>& aliases) {
    auto it = aliases.find(raw);
    if (it == aliases.end()) return std::nullopt;
    return label_from_string(it->second);
}

struct ColumnIndex {
    int id = -1, topic = -1, text = -1, thesis = -1, gold = -1;
};

Record parse_canonical_line(const std::string& line, const std::string& source_default) {
    json j = json::parse(line);
    Record r;
    r.id = j.at("id").get<std::string>();
    r.topic = j.value("topic", "");
    r.text = j.at("text").get<std::string>();
    if (j.contains("thesis") && !j["thesis"].is_null())
        r.thesis = j["thesis"].get<std::string>();
    auto gold = label_from_string(j.at("gold").get<std::string>());
    if (!gold) throw std::runtime_error("unknown label " + j["gold"].dump());
    r.gold = *gold;
    r.source = j.value("source", source_default);
    return r;
}

}  // namespace

IngestResult ingest_stream(const DatasetSpec& spec, std::istream& in) {
    IngestResult out;
    std::set<std::string> seen_ids;
    std::string line;
    size_t row = 0;

    auto aliases = default_label_aliases();
    for (const auto& [k, v] : spec.adapter.label_aliases) aliases[k] = v;

    auto accept = [&](Record r) {
        if (r.text.empty()) {
            out.rejections.push_back({row, "empty text"});
            return;
        }
        if (!legal_in(r.gold, spec.mode)) {
            out.rejections.push_back({row, "label NoArgument illegal in two-class mode"});
            return;
        }
        if (!seen_ids.insert(r.id).second) {
            out.rejections.push_back({row, "duplicate id '" + r.id + "'"});
            return;
        }
        out.records.push_back(std::move(r));
    };

    if (spec.format == "canonical") {
        while (std::getline(in, line)) {
            ++row;
            if (line.empty()) continue;
            try {
                accept(parse_canonical_line(line, spec.name));
            } catch (const std::exception& e) {
                out.rejections.push_back({row, e.what()});
            }
        }
        return out;
    }

    if (spec.format != "delimited")
        throw ConfigError("unknown dataset format '" + spec.format + "'");

    const auto& cfg = spec.adapter;
    ColumnIndex idx;
    bool have_header = false;
    std::vector<std::string> header;

    auto resolve = [&](const char* field) -> int {
        auto it = cfg.columns.find(field);
        if (it == cfg.columns.end()) return -1;
        // Numeric mapping is a positional index; otherwise look up the header.
        const std::string& name = it->second;
        if (!name.empty() && std::all_of(name.begin(), name.end(), ::isdigit))
            return std::stoi(name);
        auto h = std::find(header.begin(), header.end(), name);
        if (h == header.end())
            throw ConfigError("column '" + name + "' for field '" + std::string(field) +
                              "' not found in header of " + spec.path);
        return static_cast<int>(h - header.begin());
    };

    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (cfg.has_header && !have_header) {
            header = split(line, cfg.delimiter);
            have_header = true;
            idx.id = resolve("id");
            idx.topic = resolve("topic");
            idx.text = resolve("text");
            idx.thesis = resolve("thesis");
            idx.gold = resolve("gold");
            if (idx.text < 0 || idx.gold < 0)
                throw ConfigError("dataset '" + spec.name +
                                  "': 'text' and 'gold' columns must be mapped");
            continue;
        }
        if (!cfg.has_header && !have_header) {
            have_header = true;
            idx.id = resolve("id");
            idx.topic = resolve("topic");
            idx.text = resolve("text");
            idx.thesis = resolve("thesis");
            idx.gold = resolve("gold");
            if (idx.text < 0 || idx.gold < 0)
                throw ConfigError("dataset '" + spec.name +
                                  "': 'text' and 'gold' columns must be mapped");
        }
        auto fields = split(line, cfg.delimiter);
        int needed = std::max({idx.id, idx.topic, idx.text, idx.thesis, idx.gold});
        if (static_cast<int>(fields.size()) <= needed) {
            out.rejections.push_back({row, "too few columns"});
            continue;
        }
        Record r;
        r.id = idx.id >= 0 ? fields[idx.id] : spec.name + ":" + std::to_string(row);
        r.topic = idx.topic >= 0 ? fields[idx.topic] : spec.topic;
        r.text = fields[idx.text];
        if (idx.thesis >= 0 && !fields[idx.thesis].empty())
            r.thesis = fields[idx.thesis];
        r.source = spec.name;
        auto gold = normalize_label(fields[idx.gold], aliases);
        if (!gold) {
            out.rejections.push_back({row, "unknown label '" + fields[idx.gold] + "'"});
            continue;
        }
        r.gold = *gold;
        accept(std::move(r));
    }
    return out;
}

IngestResult ingest(const DatasetSpec& spec) {
    std::ifstream in(spec.path);
    if (!in) throw IoError("cannot open dataset file: " + spec.path);
    return ingest_stream(spec, in);
}

CropResult crop(const std::vector<Record>& records, size_t limit) {
    if (limit == 0) throw ConfigError("crop limit must be > 0");
    CropResult out;
    for (const auto& r : records) {
        if (utf8_length(r.text) > limit)
            ++out.dropped;
        else
            out.kept.push_back(r);
    }
    return out;
}

std::vector<size_t> largest_remainder_quotas(const std::vector<size_t>& counts,
                                             size_t target) {
    const uint64_t total = std::accumulate(counts.begin(), counts.end(), uint64_t{0});
    if (total == 0) throw ConfigError("cannot allocate quotas over zero records");
    std::vector<size_t> quotas(counts.size());
    std::vector<std::pair<uint64_t, size_t>> remainders;  // (remainder, class index)
    uint64_t assigned = 0;
    for (size_t i = 0; i < counts.size(); ++i) {
        uint64_t num = static_cast<uint64_t>(counts[i]) * target;
        quotas[i] = static_cast<size_t>(num / total);
        assigned += quotas[i];
        remainders.emplace_back(num % total, i);
    }
    // Hand the leftover seats to the largest remainders; ties go to the
    // earlier class so allocation is deterministic.
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (size_t i = 0; assigned < target; ++i, ++assigned) ++quotas[remainders[i].second];
    return quotas;
}

std::vector<Record> stratified_trim(const std::vector<Record>& records,
                                    size_t target, uint64_t seed) {
    if (target > records.size())
        throw ConfigError("trim target " + std::to_string(target) +
                          " exceeds corpus size " + std::to_string(records.size()));
    // Group by class in canonical label order; input order kept within a class.
    std::vector<std::vector<size_t>> by_class(3);
    for (size_t i = 0; i < records.size(); ++i)
        by_class[static_cast<size_t>(records[i].gold)].push_back(i);

    std::vector<size_t> counts;
    std::vector<size_t> present;  // class values with at least one record
    for (size_t c = 0; c < 3; ++c)
        if (!by_class[c].empty()) {
            present.push_back(c);
            counts.push_back(by_class[c].size());
        }

    auto quotas = largest_remainder_quotas(counts, target);

    std::vector<Record> out;
    out.reserve(target);
    for (size_t k = 0; k < present.size(); ++k) {
        const auto& pool = by_class[present[k]];
        Rng rng(derive_seed(seed, "trim/" + std::string(to_string(static_cast<Label>(present[k])))));
        for (size_t i : rng.sample_indices(pool.size(), quotas[k]))
            out.push_back(records[pool[i]]);
    }
    Rng shuffler(derive_seed(seed, "trim/shuffle"));
    shuffler.shuffle(out);
    return out;
}

std::string record_to_json_line(const Record& r) {
    json j;
    j["id"] = r.id;
    j["topic"] = r.topic;
    j["text"] = r.text;
    if (r.thesis)
        j["thesis"] = *r.thesis;
    else
        j["thesis"] = nullptr;
    j["gold"] = to_string(r.gold);
    j["source"] = r.source;
    return j.dump();
}

void write_canonical(const std::vector<Record>& records, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write: " + path);
    for (const auto& r : records) out << record_to_json_line(r) << '\n';
}

std::vector<Record> read_canonical(const std::string& path) {
    DatasetSpec spec;
    spec.name = path;
    spec.format = "canonical";
    spec.path = path;
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    auto res = ingest_stream(spec, in);
    if (!res.rejections.empty())
        throw IoError(path + ": bad canonical record at line " +
                      std::to_string(res.rejections.front().row) + ": " +
                      res.rejections.front().reason);
    return std::move(res.records);
}

}  // namespace am
