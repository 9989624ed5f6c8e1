#pragma once

#include <opencv2/core.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace idsynth {

struct OverlayParams {
    std::string font_id;
    double size_pt = 12.0;
    std::array<int, 3> color_rgb{0, 0, 0};
    double stroke_width = 0.0;
    double dx = 0.0;
    double dy = 0.0;
};

enum class FieldKind { text, portrait, ghost, signature };

const char* field_kind_name(FieldKind k);
FieldKind field_kind_from_name(const std::string& name);

enum class BackgroundMode { opaque, transparent, monochrome };

struct BackgroundRule {
    BackgroundMode mode = BackgroundMode::opaque;
    std::array<int, 3> color_rgb{255, 255, 255};
};

struct FieldSpec {
    std::string id;
    FieldKind kind = FieldKind::text;
    cv::Rect bbox;
    bool pii = false;
    int segment = 0;
    OverlayParams params;
    std::string source;       // ghost: portrait field id; signature: name source
    BackgroundRule background;  // portrait fields only
    std::string static_text;   // fixed value overriding the identity lookup
};

enum class DocKind { driver_license, id_card, passport };

struct TemplatePack {
    std::string pack_id;
    std::string dir;
    cv::Mat template_rgba;                // CV_8UC4
    std::optional<cv::Mat> reference_rgb; // CV_8UC3, filled official sample
    std::vector<FieldSpec> fields;
    DocKind doc_kind = DocKind::driver_license;
    std::string region;
    std::string language = "en";
    int validity_years = 5;
    std::string dln_format;               // '#' digit, 'A' uppercase letter
    std::map<std::string, std::string> fonts;  // font id -> absolute ttf path
    double ghost_opacity = 0.35;
    // field id -> text shown on the reference sample, used when tuning
    std::map<std::string, std::string> reference_texts;

    const FieldSpec& field(const std::string& id) const;
    const FieldSpec* find_field(const std::string& id) const;
    std::vector<const FieldSpec*> fields_of_kind(FieldKind k) const;
    std::vector<int> segments() const;  // sorted unique segment ids of text fields
};

struct PortraitAsset {
    std::string id;
    cv::Mat image;  // CV_8UC4, alpha separates subject from background
    std::vector<cv::Point2d> landmarks;
    double age = 0;
    double p_male = 0.5, p_female = 0.5;
    std::string ethnicity;
    std::map<std::string, double> eye_color_probs;
    std::map<std::string, double> emotion_probs;
    double pitch = 0, roll = 0, yaw = 0;
    bool misc_flag = false;  // manual disqualification marker
};

enum class Reject { underage, expression, head_pose, misc };

const char* reject_name(Reject r);

struct QualificationResult {
    bool qualified = true;
    std::vector<Reject> reasons;
};

TemplatePack load_template_pack(const std::string& dir);

PortraitAsset load_portrait(const std::string& png_path);

// Every <id>.png with an <id>.json sidecar, ordered by id.
std::vector<PortraitAsset> load_portrait_dir(const std::string& dir);

QualificationResult qualify_portrait(const PortraitAsset& asset);

struct PreparedPortrait {
    cv::Mat image;  // CV_8UC4 sized exactly to the field bbox
    std::vector<cv::Point2d> landmarks;
};

PreparedPortrait preprocess_portrait(const PortraitAsset& asset, const FieldSpec& field);

}  // namespace idsynth
