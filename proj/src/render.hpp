#pragma once

#include "assets.hpp"
#include "metagen.hpp"
#include "rng.hpp"

#include <map>
#include <optional>
#include <string>

namespace idsynth {

// Text may legally spill this many pixels past its field box on each side.
constexpr int kTextSlack = 6;

struct DocumentImage {
    cv::Mat pixels;  // CV_8UC3 BGR
    std::map<std::string, cv::Rect> field_map;            // realized boxes
    std::map<std::string, OverlayParams> applied_params;  // params actually used
};

// Draws one text field onto the canvas. The anchor is the field box top-left
// plus the param offset. Throws if the rendered extent does not fit the box
// plus slack. Empty text is a no-op. Returns the realized ink box.
cv::Rect draw_text_field(cv::Mat& canvas, const TemplatePack& pack, const FieldSpec& field,
                         const std::string& text, const OverlayParams& params);

// Luma rendition of a portrait refit to the ghost field box. Output is
// CV_8UC4 with equal BGR channels and the refit alpha.
cv::Mat render_ghost(const cv::Mat& portrait_rgba, const FieldSpec& field);

// Deterministic pseudo-signature text for a full name: 6 to 10 letters,
// alternating consonant and vowel, capitalized.
std::string signature_text(const std::string& full_name);

// Renders the signature string into a transparent CV_8UC4 patch sized to the
// box. The face comes from `font_path`; the glyph height is auto-fit.
cv::Mat render_signature(const std::string& full_name, const std::string& font_path,
                         const cv::Rect& bbox, const std::array<int, 3>& color_rgb);

// Full card render. `param_overrides` replaces the layout defaults per field
// id. `image_inputs` carries one CV_8UC4 patch per portrait-kind field id,
// already sized to that field box; ghost fields pull from their source
// field's entry. Fields with no input patch are skipped. Pure: equal inputs
// give equal pixels, and pixels outside every field box plus slack match the
// flattened template.
DocumentImage render_document(const TemplatePack& pack, const IdentityRecord& identity,
                              const std::map<std::string, OverlayParams>& param_overrides,
                              const std::map<std::string, cv::Mat>& image_inputs);

// Alpha-composites a CV_8UC4 patch over a CV_8UC3 canvas region.
void alpha_composite(cv::Mat& canvas, const cv::Mat& patch_rgba, const cv::Point& at,
                     double opacity = 1.0);

}  // namespace idsynth
