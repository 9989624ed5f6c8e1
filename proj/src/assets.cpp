#include "assets.hpp"

#include "imaging.hpp"

#include <json.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

namespace fs = std::filesystem;
using nlohmann::json;

namespace idsynth {

namespace {

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    return j;
}

cv::Rect parse_bbox(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 4)
        throw std::runtime_error(where + ": bbox must be [x, y, w, h]");
    cv::Rect r(j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>());
    if (r.width <= 0 || r.height <= 0)
        throw std::runtime_error(where + ": degenerate bbox");
    return r;
}

std::array<int, 3> parse_rgb(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3)
        throw std::runtime_error(where + ": color must be [r, g, b]");
    std::array<int, 3> c{j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
    for (int v : c)
        if (v < 0 || v > 255) throw std::runtime_error(where + ": color channel out of range");
    return c;
}

OverlayParams parse_params(const json& j, const std::string& where) {
    OverlayParams p;
    if (j.contains("font")) p.font_id = j.at("font").get<std::string>();
    if (j.contains("size_pt")) p.size_pt = j.at("size_pt").get<double>();
    if (j.contains("color")) p.color_rgb = parse_rgb(j.at("color"), where);
    if (j.contains("stroke_width")) p.stroke_width = j.at("stroke_width").get<double>();
    if (j.contains("offset")) {
        const auto& o = j.at("offset");
        if (!o.is_array() || o.size() != 2)
            throw std::runtime_error(where + ": offset must be [dx, dy]");
        p.dx = o[0].get<double>();
        p.dy = o[1].get<double>();
    }
    if (p.size_pt <= 0) throw std::runtime_error(where + ": size_pt must be positive");
    if (p.stroke_width < 0) throw std::runtime_error(where + ": negative stroke width");
    return p;
}

std::map<std::string, double> parse_probs(const json& j, const std::string& where) {
    std::map<std::string, double> out;
    double sum = 0;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const double p = it.value().get<double>();
        if (p < 0) throw std::runtime_error(where + ": negative probability");
        out[it.key()] = p;
        sum += p;
    }
    if (out.empty() || std::abs(sum - 1.0) > 1e-3)
        throw std::runtime_error(where + ": probabilities must sum to 1");
    for (auto& [k, v] : out) v /= sum;
    return out;
}

}  // namespace

const char* field_kind_name(FieldKind k) {
    switch (k) {
        case FieldKind::text: return "text";
        case FieldKind::portrait: return "portrait";
        case FieldKind::ghost: return "ghost";
        case FieldKind::signature: return "signature";
    }
    return "?";
}

FieldKind field_kind_from_name(const std::string& name) {
    if (name == "text") return FieldKind::text;
    if (name == "portrait") return FieldKind::portrait;
    if (name == "ghost") return FieldKind::ghost;
    if (name == "signature") return FieldKind::signature;
    throw std::runtime_error("unknown field kind: " + name);
}

const char* reject_name(Reject r) {
    switch (r) {
        case Reject::underage: return "underage";
        case Reject::expression: return "expression";
        case Reject::head_pose: return "head_pose";
        case Reject::misc: return "misc";
    }
    return "?";
}

const FieldSpec& TemplatePack::field(const std::string& id) const {
    if (const FieldSpec* f = find_field(id)) return *f;
    throw std::runtime_error("pack " + pack_id + " has no field '" + id + "'");
}

const FieldSpec* TemplatePack::find_field(const std::string& id) const {
    for (const auto& f : fields)
        if (f.id == id) return &f;
    return nullptr;
}

std::vector<const FieldSpec*> TemplatePack::fields_of_kind(FieldKind k) const {
    std::vector<const FieldSpec*> out;
    for (const auto& f : fields)
        if (f.kind == k) out.push_back(&f);
    return out;
}

std::vector<int> TemplatePack::segments() const {
    std::set<int> s;
    for (const auto& f : fields)
        if (f.kind == FieldKind::text) s.insert(f.segment);
    return {s.begin(), s.end()};
}

TemplatePack load_template_pack(const std::string& dir) {
    TemplatePack pack;
    pack.dir = dir;
    pack.template_rgba = load_png((fs::path(dir) / "template.png").string(), 4);

    const fs::path ref = fs::path(dir) / "reference.png";
    if (fs::exists(ref)) pack.reference_rgb = load_png(ref.string(), 3);

    const json j = load_json_file((fs::path(dir) / "layout.json").string());

    pack.pack_id = j.at("pack_id").get<std::string>();
    const std::string kind = j.at("doc_kind").get<std::string>();
    if (kind == "driver_license") pack.doc_kind = DocKind::driver_license;
    else if (kind == "id_card") pack.doc_kind = DocKind::id_card;
    else if (kind == "passport") pack.doc_kind = DocKind::passport;
    else throw std::runtime_error("unknown doc_kind: " + kind);

    pack.region = j.at("region").get<std::string>();
    if (j.contains("language")) pack.language = j.at("language").get<std::string>();
    pack.validity_years = j.at("validity_years").get<int>();
    if (pack.validity_years < 1) throw std::runtime_error("validity_years must be >= 1");
    pack.dln_format = j.at("dln_format").get<std::string>();
    if (pack.dln_format.empty()) throw std::runtime_error("empty dln_format");
    for (char c : pack.dln_format)
        if (c != '#' && c != 'A')
            throw std::runtime_error("dln_format may contain only '#' and 'A'");
    if (j.contains("ghost_opacity")) {
        pack.ghost_opacity = j.at("ghost_opacity").get<double>();
        if (pack.ghost_opacity < 0 || pack.ghost_opacity > 1)
            throw std::runtime_error("ghost_opacity out of [0,1]");
    }

    for (auto it = j.at("fonts").begin(); it != j.at("fonts").end(); ++it) {
        const fs::path p = fs::path(dir) / "fonts" / it.value().get<std::string>();
        if (!fs::exists(p))
            throw std::runtime_error("font id '" + it.key() + "' unresolvable: " + p.string());
        pack.fonts[it.key()] = p.string();
    }
    if (pack.fonts.empty()) throw std::runtime_error("pack declares no fonts");

    const cv::Rect bounds(0, 0, pack.template_rgba.cols, pack.template_rgba.rows);
    std::set<std::string> ids;
    for (const auto& fj : j.at("fields")) {
        FieldSpec f;
        f.id = fj.at("id").get<std::string>();
        if (!ids.insert(f.id).second) throw std::runtime_error("duplicate field id: " + f.id);
        f.kind = field_kind_from_name(fj.at("kind").get<std::string>());
        f.bbox = parse_bbox(fj.at("bbox"), "field " + f.id);
        if ((f.bbox & bounds) != f.bbox)
            throw std::runtime_error("field out of bounds: " + f.id);
        if (fj.contains("pii")) f.pii = fj.at("pii").get<bool>();
        if (fj.contains("segment")) f.segment = fj.at("segment").get<int>();
        if (fj.contains("params")) f.params = parse_params(fj.at("params"), "field " + f.id);
        if (fj.contains("source")) f.source = fj.at("source").get<std::string>();
        if (fj.contains("static_text")) f.static_text = fj.at("static_text").get<std::string>();
        if (fj.contains("background")) {
            const auto& bj = fj.at("background");
            const std::string mode = bj.at("mode").get<std::string>();
            if (mode == "opaque") f.background.mode = BackgroundMode::opaque;
            else if (mode == "transparent") f.background.mode = BackgroundMode::transparent;
            else if (mode == "monochrome") f.background.mode = BackgroundMode::monochrome;
            else throw std::runtime_error("unknown background mode: " + mode);
            if (bj.contains("color"))
                f.background.color_rgb = parse_rgb(bj.at("color"), "field " + f.id);
        }
        if (f.kind == FieldKind::text && !pack.fonts.count(f.params.font_id))
            throw std::runtime_error("field " + f.id + " uses unknown font '" +
                                     f.params.font_id + "'");
        pack.fields.push_back(std::move(f));
    }

    bool has_portrait = false;
    for (const auto& f : pack.fields) has_portrait |= (f.kind == FieldKind::portrait);
    if (!has_portrait) throw std::runtime_error("no portrait field");

    for (const auto& f : pack.fields) {
        if (f.kind == FieldKind::ghost) {
            const FieldSpec* src = pack.find_field(f.source);
            if (!src || src->kind != FieldKind::portrait)
                throw std::runtime_error("ghost field " + f.id +
                                         " must reference a portrait field");
        }
        if (f.kind == FieldKind::signature && f.source.empty())
            throw std::runtime_error("signature field " + f.id + " needs a name source");
    }

    if (pack.reference_rgb && pack.reference_rgb->size() != pack.template_rgba.size())
        throw std::runtime_error("reference.png dimensions differ from template.png");

    if (j.contains("reference_texts")) {
        for (const auto& [fid, text] : j.at("reference_texts").items()) {
            const FieldSpec* f = pack.find_field(fid);
            if (!f || f->kind != FieldKind::text)
                throw std::runtime_error("reference_texts names unknown text field: " + fid);
            pack.reference_texts[fid] = text.get<std::string>();
        }
    }

    return pack;
}

PortraitAsset load_portrait(const std::string& png_path) {
    PortraitAsset a;
    a.image = load_png(png_path, 4);
    a.id = fs::path(png_path).stem().string();

    fs::path sidecar = fs::path(png_path);
    sidecar.replace_extension(".json");
    const json j = load_json_file(sidecar.string());

    a.age = j.at("age").get<double>();
    const auto sex = parse_probs(j.at("sex_probs"), a.id + " sex_probs");
    a.p_male = sex.count("male") ? sex.at("male") : 0.0;
    a.p_female = sex.count("female") ? sex.at("female") : 0.0;
    if (std::abs(a.p_male + a.p_female - 1.0) > 1e-6)
        throw std::runtime_error(a.id + ": sex_probs must cover male/female");
    a.ethnicity = j.at("ethnicity").get<std::string>();
    a.eye_color_probs = parse_probs(j.at("eye_color_probs"), a.id + " eye_color_probs");
    a.emotion_probs = parse_probs(j.at("emotion_probs"), a.id + " emotion_probs");
    const auto& hp = j.at("head_pose");
    a.pitch = hp.at("pitch").get<double>();
    a.roll = hp.at("roll").get<double>();
    a.yaw = hp.at("yaw").get<double>();
    if (j.contains("misc_disqualified")) a.misc_flag = j.at("misc_disqualified").get<bool>();

    for (const auto& pj : j.at("landmarks")) {
        if (!pj.is_array() || pj.size() != 2)
            throw std::runtime_error(a.id + ": landmark must be [x, y]");
        a.landmarks.emplace_back(pj[0].get<double>(), pj[1].get<double>());
    }
    if (a.landmarks.size() < 5)
        throw std::runtime_error(a.id + ": at least 5 landmarks required");
    for (const auto& p : a.landmarks)
        if (p.x < 0 || p.y < 0 || p.x >= a.image.cols || p.y >= a.image.rows)
            throw std::runtime_error(a.id + ": landmark outside image");
    return a;
}

std::vector<PortraitAsset> load_portrait_dir(const std::string& dir) {
    std::vector<std::string> pngs;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() == ".png") pngs.push_back(e.path().string());
    }
    std::sort(pngs.begin(), pngs.end());
    if (pngs.empty()) throw std::runtime_error("no portraits in " + dir);
    std::vector<PortraitAsset> out;
    out.reserve(pngs.size());
    for (const auto& p : pngs) out.push_back(load_portrait(p));
    return out;
}

QualificationResult qualify_portrait(const PortraitAsset& a) {
    QualificationResult r;
    if (a.age < 18) r.reasons.push_back(Reject::underage);
    const double neutral =
        a.emotion_probs.count("neutral") ? a.emotion_probs.at("neutral") : 0.0;
    const double happy =
        a.emotion_probs.count("happiness") ? a.emotion_probs.at("happiness") : 0.0;
    if (std::max(neutral, happy) < 0.8) r.reasons.push_back(Reject::expression);
    if (std::abs(a.pitch) > 9 || std::abs(a.roll) > 9 || std::abs(a.yaw) > 9)
        r.reasons.push_back(Reject::head_pose);
    if (a.misc_flag) r.reasons.push_back(Reject::misc);
    r.qualified = r.reasons.empty();
    return r;
}

PreparedPortrait preprocess_portrait(const PortraitAsset& asset, const FieldSpec& field) {
    if (field.kind != FieldKind::portrait && field.kind != FieldKind::ghost)
        throw std::invalid_argument("preprocess_portrait: field is not a portrait slot");
    const int bw = field.bbox.width, bh = field.bbox.height;
    if (bw < 8 || bh < 8) throw std::runtime_error("portrait bbox smaller than 8x8");

    const cv::Mat& src = asset.image;
    const double scale = std::max(double(bw) / src.cols, double(bh) / src.rows);
    const int sw = std::max(bw, int(std::lround(src.cols * scale)));
    const int sh = std::max(bh, int(std::lround(src.rows * scale)));
    cv::Mat resized;
    cv::resize(src, resized, cv::Size(sw, sh), 0, 0, cv::INTER_AREA);
    const int x0 = (sw - bw) / 2;
    const int y0 = (sh - bh) / 2;
    cv::Mat fitted = resized(cv::Rect(x0, y0, bw, bh)).clone();

    const double sx = double(sw) / src.cols;
    const double sy = double(sh) / src.rows;
    PreparedPortrait out;
    for (const auto& p : asset.landmarks) {
        // Border landmarks can fall into the cropped margin; pin them to the
        // output frame so downstream warps always get in-bounds points.
        const double lx = std::clamp(p.x * sx - x0, 0.0, bw - 1.0);
        const double ly = std::clamp(p.y * sy - y0, 0.0, bh - 1.0);
        out.landmarks.emplace_back(lx, ly);
    }

    const auto& rule = field.background;
    switch (rule.mode) {
        case BackgroundMode::opaque: {
            out.image.create(fitted.size(), CV_8UC4);
            const int br = rule.color_rgb[0], bg = rule.color_rgb[1], bb = rule.color_rgb[2];
            for (int y = 0; y < fitted.rows; ++y) {
                const cv::Vec4b* s = fitted.ptr<cv::Vec4b>(y);
                cv::Vec4b* d = out.image.ptr<cv::Vec4b>(y);
                for (int x = 0; x < fitted.cols; ++x) {
                    const int a = s[x][3];
                    d[x][0] = static_cast<uchar>((s[x][0] * a + bb * (255 - a) + 127) / 255);
                    d[x][1] = static_cast<uchar>((s[x][1] * a + bg * (255 - a) + 127) / 255);
                    d[x][2] = static_cast<uchar>((s[x][2] * a + br * (255 - a) + 127) / 255);
                    d[x][3] = 255;
                }
            }
            break;
        }
        case BackgroundMode::transparent:
            out.image = fitted;
            break;
        case BackgroundMode::monochrome: {
            out.image.create(fitted.size(), CV_8UC4);
            const int hr = rule.color_rgb[0], hg = rule.color_rgb[1], hb = rule.color_rgb[2];
            for (int y = 0; y < fitted.rows; ++y) {
                const cv::Vec4b* s = fitted.ptr<cv::Vec4b>(y);
                cv::Vec4b* d = out.image.ptr<cv::Vec4b>(y);
                for (int x = 0; x < fitted.cols; ++x) {
                    const double luma =
                        0.114 * s[x][0] + 0.587 * s[x][1] + 0.299 * s[x][2];
                    d[x][0] = static_cast<uchar>(std::lround(hb * luma / 255.0));
                    d[x][1] = static_cast<uchar>(std::lround(hg * luma / 255.0));
                    d[x][2] = static_cast<uchar>(std::lround(hr * luma / 255.0));
                    d[x][3] = s[x][3];
                }
            }
            break;
        }
    }
    return out;
}

}  // namespace idsynth
