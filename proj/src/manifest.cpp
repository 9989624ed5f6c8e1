#include "manifest.hpp"

#include <fstream>

#include "common.hpp"

namespace idsynth {

using nlohmann::json;

nlohmann::json manifest_entry_to_json(const ManifestEntry& e) {
    json j{{"doc_id", e.doc_id},
           {"base_id", e.base_id},
           {"variant", e.variant},
           {"image_path", e.image_path},
           {"identity", identity_to_json(e.identity)},
           {"seed", e.seed},
           {"pack_id", e.pack_id}};
    if (e.fraud) j["fraud"] = fraud_record_to_json(*e.fraud);
    if (e.privacy) {
        json p{{"mode", e.privacy->mode}};
        if (e.privacy->mode == "pixeldp") {
            p["epsilon"] = e.privacy->cfg.epsilon;
            p["delta"] = e.privacy->cfg.delta;
            p["sensitivity"] = e.privacy->cfg.sensitivity;
            p["L"] = e.privacy->cfg.L;
            p["clamp"] = e.privacy->cfg.clamp;
        }
        j["privacy"] = std::move(p);
    }
    return j;
}

ManifestEntry manifest_entry_from_json(const nlohmann::json& j) {
    ManifestEntry e;
    e.doc_id = j.at("doc_id").get<std::string>();
    e.base_id = j.at("base_id").get<std::string>();
    e.variant = j.at("variant").get<std::string>();
    e.image_path = j.at("image_path").get<std::string>();
    e.identity = identity_from_json(j.at("identity"));
    e.seed = j.at("seed").get<uint64_t>();
    e.pack_id = j.at("pack_id").get<std::string>();
    if (j.contains("fraud")) e.fraud = fraud_record_from_json(j["fraud"]);
    if (j.contains("privacy")) {
        PrivacyDescriptor p;
        const json& pj = j["privacy"];
        p.mode = pj.at("mode").get<std::string>();
        if (p.mode == "pixeldp") {
            p.cfg.epsilon = pj.at("epsilon").get<double>();
            p.cfg.delta = pj.at("delta").get<double>();
            p.cfg.sensitivity = pj.at("sensitivity").get<double>();
            p.cfg.L = pj.at("L").get<double>();
            p.cfg.clamp = pj.at("clamp").get<bool>();
        }
        e.privacy = std::move(p);
    }
    return e;
}

ManifestReadResult read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest: " + path);
    ManifestReadResult out;
    std::string line;
    for (int n = 1; std::getline(in, line); ++n) {
        if (line.empty()) continue;
        try {
            out.entries.push_back(manifest_entry_from_json(json::parse(line)));
        } catch (const std::exception& e) {
            out.errors.push_back(strprintf("line %d: %s", n, e.what()));
        }
    }
    return out;
}

void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write manifest: " + path);
    for (const ManifestEntry& e : entries) out << manifest_entry_to_json(e).dump() << "\n";
}

}  // namespace idsynth
