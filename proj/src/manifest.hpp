#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "fraud.hpp"
#include "metagen.hpp"
#include "privacy.hpp"

namespace idsynth {

// What privacy transform, if any, was applied to a sample.
struct PrivacyDescriptor {
    std::string mode;  // "masking" | "pixeldp"
    PixelDPConfig cfg;
};

// One dataset sample: a genuine document or one fraud variant of it. Fraud
// entries keep the genuine identity; the record describes the alteration.
struct ManifestEntry {
    std::string doc_id;   // unique per sample, e.g. "doc_00012" or "doc_00012.face_morph"
    std::string base_id;  // genuine sample this derives from; equals doc_id for genuine docs
    std::string variant;  // "genuine" or the fraud type
    std::string image_path;  // relative to the manifest's directory
    IdentityRecord identity;
    std::optional<FraudRecord> fraud;
    std::optional<PrivacyDescriptor> privacy;
    uint64_t seed = 0;
    std::string pack_id;
};

nlohmann::json manifest_entry_to_json(const ManifestEntry& e);
ManifestEntry manifest_entry_from_json(const nlohmann::json& j);

struct ManifestReadResult {
    std::vector<ManifestEntry> entries;
    std::vector<std::string> errors;  // "line N: why", bad lines are skipped
};

ManifestReadResult read_manifest(const std::string& path);

// Serializes each entry as one JSON line.
void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries);

}  // namespace idsynth
