#pragma once

#include "assets.hpp"
#include "mesh.hpp"
#include "metagen.hpp"
#include "render.hpp"
#include "rng.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace idsynth {

struct ChangedField {
    std::string field_id;
    std::string original_text;
    std::string new_text;
    OverlayParams original_params;
    OverlayParams new_params;
};

struct FraudRecord {
    std::string fraud_type;
    std::string level;             // text_replacement and mixed: "easy" | "hard"
    double morph_weight = -1.0;    // < 0 means absent
    std::string original_portrait_id;
    std::string partner_portrait_id;
    std::string partner_doc_id;
    std::string partner_field_id;  // crop_replace donor field
    std::vector<ChangedField> changed_fields;
    cv::Point shift{0, 0};
    bool has_shift = false;
    std::vector<cv::Rect> regions;  // every pixel the injector may have altered
};

nlohmann::json fraud_record_to_json(const FraudRecord& rec);
FraudRecord fraud_record_from_json(const nlohmann::json& j);

// Everything an injector may need to re-derive pieces of the genuine render.
struct FraudInputs {
    const TemplatePack* pack = nullptr;
    IdentityRecord identity;
    const PortraitAsset* portrait = nullptr;                   // asset behind the portrait field
    const std::vector<PortraitAsset>* qualified = nullptr;     // morph partner pool
    const std::vector<PortraitAsset>* disqualified = nullptr;  // substitution pool
    PoolProvider* pools = nullptr;
    Date now;
    std::map<std::string, OverlayParams> params;  // overrides used for the genuine render
};

// Decision draws, separated out so their distributions are testable without
// touching pixels. Injectors route every coin through these.
bool plan_easy_level(Rng& rng);                               // true with p = 0.65
bool plan_mixed_is_morph(Rng& rng);                           // fair coin
std::pair<int, int> plan_crop_fields(Rng& rng, int n_fields); // same index with p = 0.95
cv::Point plan_crop_shift(Rng& rng, int span);                // components in [-span, span], never 0

inline constexpr int kCropShiftSpan = 4;

DocumentImage inject_face_morph(const DocumentImage& doc, const FraudInputs& in,
                                const MorphConfig& cfg, Rng& rng, FraudRecord& rec);

DocumentImage inject_portrait_substitution(const DocumentImage& doc, const FraudInputs& in,
                                           Rng& rng, FraudRecord& rec);

// level: "easy" | "hard" | "auto" (auto draws easy with p = 0.65)
DocumentImage inject_text_replacement(const DocumentImage& doc, const FraudInputs& in,
                                      const std::string& level, Rng& rng, FraudRecord& rec);

// Text replacement from rng_text, then a coin from rng_face picks face morph
// or portrait substitution. Feeding rng_text with the stream the plain
// text_replacement variant used reproduces that variant's text stage exactly.
DocumentImage inject_mixed(const DocumentImage& doc, const FraudInputs& in, Rng& rng_text,
                           Rng& rng_face, FraudRecord& rec);

DocumentImage inject_inpaint_rewrite(const DocumentImage& doc, const FraudInputs& in, Rng& rng,
                                     FraudRecord& rec);

DocumentImage inject_crop_replace(const DocumentImage& doc_a, const IdentityRecord& id_a,
                                  const DocumentImage& doc_b, const IdentityRecord& id_b,
                                  const TemplatePack& pack, Rng& rng, FraudRecord& rec);

}  // namespace idsynth
