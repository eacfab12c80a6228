#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tg {

enum class Dataset { Reference, Other };
enum class Label { Correct, Incorrect };

struct ManifestEntry {
    std::string id;
    Dataset dataset = Dataset::Other;
    uint64_t start = 0;
    uint64_t len = 0;
    std::optional<Label> label;
};

// One JSON object per line: {"id":..., "dataset":"reference"|"other",
// "start":..., "len":..., "label":"correct"|"incorrect"} (label optional).
struct SequenceManifest {
    std::vector<ManifestEntry> entries;
};

const char *dataset_name(Dataset dataset);
const char *label_name(Label label);

// Parses and enforces: unique ids, len >= 1, non-overlapping [start, start+len).
SequenceManifest read_manifest(const std::string &path);
void write_manifest(const SequenceManifest &manifest, const std::string &path);

// Same structural checks as read_manifest, plus bounds against a token count.
void validate_manifest(const SequenceManifest &manifest, uint64_t num_tokens);

} // namespace tg
