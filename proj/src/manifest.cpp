#include "manifest.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "error.hpp"
#include "io_util.hpp"

namespace tg {

using nlohmann::json;

const char *dataset_name(Dataset dataset) {
    return dataset == Dataset::Reference ? "reference" : "other";
}

const char *label_name(Label label) { return label == Label::Correct ? "correct" : "incorrect"; }

namespace {

void check_structure(const SequenceManifest &manifest) {
    std::unordered_set<std::string> ids;
    for (const auto &entry : manifest.entries) {
        if (entry.len == 0)
            fail(TG_ERR_INVALID_ARGUMENT, "manifest: entry '" + entry.id + "' has len 0");
        if (!ids.insert(entry.id).second)
            fail(TG_ERR_INVALID_ARGUMENT, "manifest: duplicate id '" + entry.id + "'");
    }
    // Overlap check on intervals sorted by start.
    std::vector<const ManifestEntry *> sorted;
    sorted.reserve(manifest.entries.size());
    for (const auto &entry : manifest.entries) sorted.push_back(&entry);
    std::sort(sorted.begin(), sorted.end(),
              [](const ManifestEntry *a, const ManifestEntry *b) { return a->start < b->start; });
    for (size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i - 1]->start + sorted[i - 1]->len > sorted[i]->start)
            fail(TG_ERR_INVALID_ARGUMENT, "manifest: entries '" + sorted[i - 1]->id + "' and '" +
                                              sorted[i]->id + "' overlap");
    }
}

} // namespace

void validate_manifest(const SequenceManifest &manifest, uint64_t num_tokens) {
    check_structure(manifest);
    for (const auto &entry : manifest.entries) {
        if (entry.start + entry.len > num_tokens)
            fail(TG_ERR_OUT_OF_RANGE, "manifest: entry '" + entry.id + "' spans [" +
                                          std::to_string(entry.start) + ", " +
                                          std::to_string(entry.start + entry.len) +
                                          ") but the store has " + std::to_string(num_tokens) +
                                          " tokens");
    }
}

SequenceManifest read_manifest(const std::string &path) {
    std::ifstream in(path);
    if (!in) fail(TG_ERR_IO, "cannot open for reading: " + path);

    SequenceManifest manifest;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object())
            fail(TG_ERR_PARSE, "manifest '" + path + "' line " + std::to_string(line_no) +
                                   ": not a JSON object");
        ManifestEntry entry;
        try {
            entry.id = record.at("id").get<std::string>();
            const auto dataset = record.at("dataset").get<std::string>();
            if (dataset == "reference")
                entry.dataset = Dataset::Reference;
            else if (dataset == "other")
                entry.dataset = Dataset::Other;
            else
                fail(TG_ERR_PARSE, "manifest '" + path + "' line " + std::to_string(line_no) +
                                       ": unknown dataset '" + dataset + "'");
            entry.start = record.at("start").get<uint64_t>();
            entry.len = record.at("len").get<uint64_t>();
            if (record.contains("label")) {
                const auto label = record.at("label").get<std::string>();
                if (label == "correct")
                    entry.label = Label::Correct;
                else if (label == "incorrect")
                    entry.label = Label::Incorrect;
                else
                    fail(TG_ERR_PARSE, "manifest '" + path + "' line " + std::to_string(line_no) +
                                           ": unknown label '" + label + "'");
            }
        } catch (const json::exception &e) {
            fail(TG_ERR_PARSE, "manifest '" + path + "' line " + std::to_string(line_no) + ": " +
                                   e.what());
        }
        manifest.entries.push_back(std::move(entry));
    }
    check_structure(manifest);
    return manifest;
}

void write_manifest(const SequenceManifest &manifest, const std::string &path) {
    check_structure(manifest);
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(TG_ERR_IO, "cannot open for writing: " + path);
    for (const auto &entry : manifest.entries) {
        json record;
        record["id"] = entry.id;
        record["dataset"] = dataset_name(entry.dataset);
        record["start"] = entry.start;
        record["len"] = entry.len;
        if (entry.label) record["label"] = label_name(*entry.label);
        out << record.dump() << '\n';
    }
    out.flush();
    if (!out) fail(TG_ERR_IO, "manifest '" + path + "': write failed");
}

} // namespace tg
