#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "am/types.hpp"

namespace am {

// How to read one corpus export. "canonical" is the line-delimited record
// format used as internal interchange; "delimited" covers tab/comma exports
// with a header-driven or positional column mapping.
struct AdapterConfig {
    char delimiter = '\t';
    bool has_header = true;
    // Field name ("id", "topic", "text", "thesis", "gold") -> column name.
    // Unmapped optional fields (id, topic, thesis) are synthesized or empty.
    std::map<std::string, std::string> columns;
    // Raw label string -> canonical label string. Merged over the defaults.
    std::map<std::string, std::string> label_aliases;
};

struct DatasetSpec {
    std::string name;
    Mode mode = Mode::ThreeClass;
    std::string path;
    std::string format = "canonical";  // "canonical" | "delimited"
    AdapterConfig adapter;
    size_t crop_limit = 2000;   // characters (Unicode scalar values)
    size_t trim_target = 2000;  // records
    std::string topic;          // default topic when no topic column is mapped
};

struct Rejection {
    size_t row = 0;
    std::string reason;
};

struct IngestResult {
    std::vector<Record> records;
    std::vector<Rejection> rejections;
};

struct CropResult {
    std::vector<Record> kept;
    size_t dropped = 0;
};

// Number of Unicode scalar values in a UTF-8 string.
size_t utf8_length(const std::string& s);

std::map<std::string, std::string> default_label_aliases();

IngestResult ingest(const DatasetSpec& spec);
IngestResult ingest_stream(const DatasetSpec& spec, std::istream& in);

// Drop records whose text exceeds `limit` characters (strictly).
CropResult crop(const std::vector<Record>& records, size_t limit);

// Largest-remainder proportional quotas: per-class shares of `target` that
// sum exactly to target and differ from the exact share by less than 1.
std::vector<size_t> largest_remainder_quotas(const std::vector<size_t>& counts,
                                             size_t target);

// Class-stratified random subset of `target` records, quota per class by
// largest remainder, members drawn uniformly, output order shuffled. Fully
// determined by (records, target, seed).
std::vector<Record> stratified_trim(const std::vector<Record>& records,
                                    size_t target, uint64_t seed);

void write_canonical(const std::vector<Record>& records, const std::string& path);
std::vector<Record> read_canonical(const std::string& path);

std::string record_to_json_line(const Record& r);

}  // namespace am
