#include "render.hpp"

#include "fonts.hpp"
#include "imaging.hpp"

#include <opencv2/imgproc.hpp>

#include <cctype>
#include <cmath>
#include <filesystem>
#include <stdexcept>

namespace idsynth {

namespace {

cv::Scalar bgr_of(const std::array<int, 3>& rgb) {
    return cv::Scalar(rgb[2], rgb[1], rgb[0]);
}

std::string resolve_font(const TemplatePack& pack, const std::string& font_id) {
    auto it = pack.fonts.find(font_id);
    if (it != pack.fonts.end()) return it->second;
    for (const auto& p : signature_font_paths()) {
        if (std::filesystem::path(p).filename().string() == font_id) return p;
    }
    throw std::invalid_argument("unknown font id: " + font_id);
}

}  // namespace

void alpha_composite(cv::Mat& canvas, const cv::Mat& patch_rgba, const cv::Point& at,
                     double opacity) {
    CV_Assert(canvas.type() == CV_8UC3 && patch_rgba.type() == CV_8UC4);
    cv::Rect roi(at, patch_rgba.size());
    CV_Assert((roi & cv::Rect(0, 0, canvas.cols, canvas.rows)) == roi);
    for (int y = 0; y < patch_rgba.rows; ++y) {
        const cv::Vec4b* src = patch_rgba.ptr<cv::Vec4b>(y);
        cv::Vec3b* dst = canvas.ptr<cv::Vec3b>(y + at.y) + at.x;
        for (int x = 0; x < patch_rgba.cols; ++x) {
            const double a = src[x][3] / 255.0 * opacity;
            if (a <= 0.0) continue;
            for (int c = 0; c < 3; ++c)
                dst[x][c] = cv::saturate_cast<uchar>(
                    std::lround(a * src[x][c] + (1.0 - a) * dst[x][c]));
        }
    }
}

cv::Rect draw_text_field(cv::Mat& canvas, const TemplatePack& pack, const FieldSpec& field,
                         const std::string& text, const OverlayParams& params) {
    if (text.empty()) return cv::Rect(field.bbox.tl(), cv::Size(0, 0));
    const std::string font_path = resolve_font(pack, params.font_id);
    const int font_height = std::max(1, int(std::lround(params.size_pt)));
    auto ft = FontCache::get(font_path);
    int baseline = 0;
    cv::Size sz = ft->getTextSize(text, font_height, -1, &baseline);
    const cv::Point org(field.bbox.x + int(std::lround(params.dx)),
                        field.bbox.y + int(std::lround(params.dy)));
    const cv::Rect ink(org, cv::Size(sz.width, sz.height + baseline));
    cv::Rect allowed(field.bbox.x - kTextSlack, field.bbox.y - kTextSlack,
                     field.bbox.width + 2 * kTextSlack, field.bbox.height + 2 * kTextSlack);
    allowed &= cv::Rect(0, 0, canvas.cols, canvas.rows);
    if ((ink & allowed) != ink)
        throw std::runtime_error(strprintf(
            "text overflows field '%s': extent %dx%d at (%d,%d) exceeds box %dx%d+slack",
            field.id.c_str(), ink.width, ink.height, ink.x, ink.y,
            field.bbox.width, field.bbox.height));
    const cv::Scalar color = bgr_of(params.color_rgb);
    ft->putText(canvas, text, org, font_height, color, -1, cv::LINE_AA, false);
    const int thickness = int(std::lround(params.stroke_width));
    if (thickness >= 1)
        ft->putText(canvas, text, org, font_height, color, thickness, cv::LINE_AA, false);
    return ink;
}

cv::Mat render_ghost(const cv::Mat& portrait_rgba, const FieldSpec& field) {
    CV_Assert(portrait_rgba.type() == CV_8UC4);
    cv::Mat fitted = fit_cover(portrait_rgba, field.bbox.size());
    cv::Mat out(fitted.size(), CV_8UC4);
    for (int y = 0; y < fitted.rows; ++y) {
        const cv::Vec4b* s = fitted.ptr<cv::Vec4b>(y);
        cv::Vec4b* d = out.ptr<cv::Vec4b>(y);
        for (int x = 0; x < fitted.cols; ++x) {
            const int luma = int(std::lround(0.114 * s[x][0] + 0.587 * s[x][1] + 0.299 * s[x][2]));
            const uchar v = cv::saturate_cast<uchar>(luma);
            d[x] = cv::Vec4b(v, v, v, s[x][3]);
        }
    }
    return out;
}

std::string signature_text(const std::string& full_name) {
    if (full_name.empty()) return {};
    static const std::string consonants = "bcdfghjklmnprstvwz";
    static const std::string vowels = "aeiou";
    Rng rng(hash_str(full_name));
    const int len = 6 + int(rng.below(5));
    std::string out;
    out.reserve(len);
    for (int i = 0; i < len; ++i) {
        const std::string& set = (i % 2 == 0) ? consonants : vowels;
        out.push_back(set[rng.below(set.size())]);
    }
    out[0] = char(std::toupper(out[0]));
    return out;
}

cv::Mat render_signature(const std::string& full_name, const std::string& font_path,
                         const cv::Rect& bbox, const std::array<int, 3>& color_rgb) {
    cv::Mat patch(bbox.height, bbox.width, CV_8UC4, cv::Scalar(0, 0, 0, 0));
    const std::string text = signature_text(full_name);
    if (text.empty()) return patch;
    auto ft = FontCache::get(font_path);
    int baseline = 0;
    cv::Size sz;
    int fh = bbox.height;
    for (; fh >= 6; --fh) {
        sz = ft->getTextSize(text, fh, -1, &baseline);
        if (sz.width <= bbox.width && sz.height + baseline <= bbox.height) break;
    }
    cv::Mat ink(bbox.height, bbox.width, CV_8UC3, cv::Scalar(0, 0, 0));
    const cv::Point org((bbox.width - sz.width) / 2,
                        std::max(0, (bbox.height - sz.height - baseline) / 2));
    ft->putText(ink, text, org, fh, cv::Scalar(255, 255, 255), -1, cv::LINE_AA, false);
    for (int y = 0; y < patch.rows; ++y) {
        const cv::Vec3b* s = ink.ptr<cv::Vec3b>(y);
        cv::Vec4b* d = patch.ptr<cv::Vec4b>(y);
        for (int x = 0; x < patch.cols; ++x) {
            const uchar cov = std::max({s[x][0], s[x][1], s[x][2]});
            d[x] = cv::Vec4b(uchar(color_rgb[2]), uchar(color_rgb[1]), uchar(color_rgb[0]), cov);
        }
    }
    return patch;
}

DocumentImage render_document(const TemplatePack& pack, const IdentityRecord& identity,
                              const std::map<std::string, OverlayParams>& param_overrides,
                              const std::map<std::string, cv::Mat>& image_inputs) {
    DocumentImage out;
    out.pixels = flatten_white(pack.template_rgba);
    for (const FieldSpec& f : pack.fields) {
        OverlayParams p = f.params;
        if (auto it = param_overrides.find(f.id); it != param_overrides.end()) p = it->second;
        switch (f.kind) {
            case FieldKind::text: {
                const std::string value =
                    f.static_text.empty() ? field_value(identity, f.id) : f.static_text;
                out.field_map[f.id] = draw_text_field(out.pixels, pack, f, value, p);
                out.applied_params[f.id] = p;
                break;
            }
            case FieldKind::portrait: {
                auto it = image_inputs.find(f.id);
                if (it == image_inputs.end()) break;
                CV_Assert(it->second.size() == f.bbox.size());
                alpha_composite(out.pixels, it->second, f.bbox.tl());
                out.field_map[f.id] = f.bbox;
                break;
            }
            case FieldKind::ghost: {
                auto it = image_inputs.find(f.source);
                if (it == image_inputs.end()) break;
                cv::Mat ghost = render_ghost(it->second, f);
                alpha_composite(out.pixels, ghost, f.bbox.tl(), pack.ghost_opacity);
                out.field_map[f.id] = f.bbox;
                break;
            }
            case FieldKind::signature: {
                const std::string name = field_value(identity, f.source);
                if (name.empty()) break;
                std::string font_path;
                if (p.font_id.empty()) {
                    auto sig_fonts = signature_font_paths();
                    font_path = sig_fonts[hash_str(name) % sig_fonts.size()];
                } else {
                    font_path = resolve_font(pack, p.font_id);
                }
                cv::Mat sig = render_signature(name, font_path, f.bbox, p.color_rgb);
                alpha_composite(out.pixels, sig, f.bbox.tl());
                out.field_map[f.id] = f.bbox;
                out.applied_params[f.id] = p;
                break;
            }
        }
    }
    return out;
}

}  // namespace idsynth
