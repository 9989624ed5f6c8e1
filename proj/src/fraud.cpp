#include "fraud.hpp"

#include "common.hpp"
#include "imaging.hpp"

#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <stdexcept>

namespace idsynth {

namespace {

using nlohmann::json;

cv::Rect expanded_box(const cv::Rect& bbox, const cv::Size& canvas) {
    cv::Rect r(bbox.x - kTextSlack, bbox.y - kTextSlack, bbox.width + 2 * kTextSlack,
               bbox.height + 2 * kTextSlack);
    return r & cv::Rect(0, 0, canvas.width, canvas.height);
}

const FieldSpec& portrait_field(const TemplatePack& pack) {
    for (const auto& f : pack.fields)
        if (f.kind == FieldKind::portrait) return f;
    throw std::runtime_error("pack has no portrait field");
}

std::vector<const FieldSpec*> pii_text_fields(const TemplatePack& pack) {
    std::vector<const FieldSpec*> out;
    for (const auto& f : pack.fields)
        if (f.kind == FieldKind::text && f.pii && f.static_text.empty()) out.push_back(&f);
    return out;
}

char sex_of(const PortraitAsset& a) { return a.p_male >= 0.5 ? 'M' : 'F'; }

int age_at(const Date& dob, const Date& now) {
    int a = now.year - dob.year;
    if (std::make_pair(now.month, now.day) < std::make_pair(dob.month, dob.day)) --a;
    return a;
}

OverlayParams effective_params(const DocumentImage& doc, const FieldSpec& f) {
    const auto it = doc.applied_params.find(f.id);
    return it != doc.applied_params.end() ? it->second : f.params;
}

OverlayParams perturb_params(const OverlayParams& p, const TemplatePack& pack, Rng& rng) {
    OverlayParams q = p;
    std::vector<std::string> others;
    for (const auto& [id, path] : pack.fonts)
        if (id != p.font_id) others.push_back(id);
    if (!others.empty()) q.font_id = others[rng.below(others.size())];
    q.size_pt = std::max(6.0, p.size_pt * (0.85 + 0.3 * rng.uniform()));
    return q;
}

// Multiplicative contrast and saturation stress on a background patch.
void stress_background(cv::Mat& patch, Rng& rng) {
    const double contrast = 0.85 + 0.3 * rng.uniform();
    const double sat = 0.85 + 0.3 * rng.uniform();
    cv::Mat hsv;
    cv::cvtColor(patch, hsv, cv::COLOR_BGR2HSV);
    for (int y = 0; y < hsv.rows; ++y) {
        auto* row = hsv.ptr<cv::Vec3b>(y);
        for (int x = 0; x < hsv.cols; ++x)
            row[x][1] = cv::saturate_cast<uchar>(std::lround(row[x][1] * sat));
    }
    cv::cvtColor(hsv, patch, cv::COLOR_HSV2BGR);
    for (int y = 0; y < patch.rows; ++y) {
        auto* row = patch.ptr<cv::Vec3b>(y);
        for (int x = 0; x < patch.cols; ++x)
            for (int c = 0; c < 3; ++c)
                row[x][c] =
                    cv::saturate_cast<uchar>(std::lround((row[x][c] - 128.0) * contrast + 128.0));
    }
}

// Erases the field region back to the blank template, then draws `text` with
// `wanted` params, shrinking the size when the new extent cannot fit.
ChangedField rewrite_field(DocumentImage& out, const TemplatePack& pack, const cv::Mat& blank,
                           const FieldSpec& f, const std::string& old_text,
                           const std::string& new_text, const OverlayParams& old_p,
                           OverlayParams wanted, bool stress, Rng& rng, cv::Rect* touched) {
    const cv::Rect region = expanded_box(f.bbox, out.pixels.size());
    auto fits = [&](const OverlayParams& p) {
        cv::Mat probe(out.pixels.size(), out.pixels.type(), cv::Scalar(255, 255, 255));
        try {
            draw_text_field(probe, pack, f, new_text, p);
            return true;
        } catch (const std::runtime_error&) {
            return false;
        }
    };
    for (int i = 0; i < 8 && !fits(wanted); ++i) wanted.size_pt = std::max(6.0, wanted.size_pt * 0.9);
    if (!fits(wanted)) wanted = old_p;
    if (!fits(wanted))
        throw std::runtime_error("replacement text cannot fit field '" + f.id + "'");

    cv::Mat bg = blank(region).clone();
    if (stress) stress_background(bg, rng);
    bg.copyTo(out.pixels(region));
    draw_text_field(out.pixels, pack, f, new_text, wanted);
    out.applied_params[f.id] = wanted;
    if (touched) *touched = region;
    return ChangedField{f.id, old_text, new_text, old_p, wanted};
}

// A plausible other person's record: easy contradicts the portrait's sex and
// age, hard stays consistent with both.
IdentityRecord fraud_identity(const FraudInputs& in, bool easy, Rng& rng) {
    if (!in.pack) throw std::invalid_argument("fraud inputs need a pack");
    if (!in.pools) throw std::runtime_error("text replacement needs a name pool provider");
    if (!in.portrait) throw std::runtime_error("text replacement needs portrait metadata");
    IdentityRecord id = in.identity;
    const char true_sex = sex_of(*in.portrait);
    const char write_sex = easy ? (true_sex == 'M' ? 'F' : 'M') : true_sex;
    id.sex = write_sex;

    const PoolKey key{in.portrait->ethnicity, std::string(1, write_sex), in.pack->language, ""};
    const TextPool given = in.pools->fetch(PoolKind::given_names, key);
    const TextPool sur = in.pools->fetch(PoolKind::surnames, key);
    for (int i = 0; i < 64; ++i) {
        id.given_name = given.entries[rng.below(given.entries.size())];
        if (id.given_name != in.identity.given_name) break;
    }
    id.surname = sur.entries[rng.below(sur.entries.size())];

    if (easy) {
        const int age = age_at(in.identity.dob, in.now);
        const int delta = 10 + int(rng.below(16));
        const bool younger = rng.below(2) == 0;
        if (younger && age - delta >= 16)
            id.dob = in.identity.dob.add_years(delta);
        else
            id.dob = in.identity.dob.add_years(-delta);
    } else {
        id.dob = in.identity.dob.add_years(rng.below(2) == 0 ? 1 : -1);
    }

    id.document_discriminator = gen_document_discriminator(rng);
    if (!in.pack->dln_format.empty()) {
        NumberPool fresh(in.pack->dln_format);
        id.license_number = fresh.draw(rng);
    }
    return id;
}

json params_json(const OverlayParams& p) {
    return json{{"font", p.font_id},
                {"size_pt", p.size_pt},
                {"color", {p.color_rgb[0], p.color_rgb[1], p.color_rgb[2]}},
                {"stroke_width", p.stroke_width},
                {"offset", {p.dx, p.dy}}};
}

// Pastes the portrait-box region rebuilt from the blank template plus the
// given patch, so repeated fraud on the same box stays exact.
void paste_portrait_box(DocumentImage& out, const TemplatePack& pack, const cv::Rect& bbox,
                        const cv::Mat& patch_rgba) {
    cv::Mat base = flatten_white(pack.template_rgba)(bbox).clone();
    alpha_composite(base, patch_rgba, cv::Point(0, 0));
    base.copyTo(out.pixels(bbox));
}

}  // namespace

bool plan_easy_level(Rng& rng) { return rng.uniform() < 0.65; }

bool plan_mixed_is_morph(Rng& rng) { return rng.below(2) == 0; }

std::pair<int, int> plan_crop_fields(Rng& rng, int n_fields) {
    if (n_fields <= 0) throw std::invalid_argument("need at least one field");
    const int a = int(rng.below(size_t(n_fields)));
    const bool same = rng.uniform() < 0.95;
    const int b = same ? a : int(rng.below(size_t(n_fields)));
    return {a, b};
}

cv::Point plan_crop_shift(Rng& rng, int span) {
    if (span < 1) throw std::invalid_argument("shift span must be positive");
    auto one = [&] {
        int v = int(rng.below(size_t(2 * span))) - span;
        return v >= 0 ? v + 1 : v;
    };
    const int dx = one();
    const int dy = one();
    return {dx, dy};
}

nlohmann::json fraud_record_to_json(const FraudRecord& rec) {
    json j{{"fraud_type", rec.fraud_type}};
    if (!rec.level.empty()) j["level"] = rec.level;
    if (rec.morph_weight >= 0.0) j["morph_weight"] = rec.morph_weight;
    if (!rec.original_portrait_id.empty()) j["original_portrait_id"] = rec.original_portrait_id;
    if (!rec.partner_portrait_id.empty()) j["partner_portrait_id"] = rec.partner_portrait_id;
    if (!rec.partner_doc_id.empty()) j["partner_doc_id"] = rec.partner_doc_id;
    if (!rec.partner_field_id.empty()) j["partner_field_id"] = rec.partner_field_id;
    if (rec.has_shift) j["shift"] = {rec.shift.x, rec.shift.y};
    if (!rec.changed_fields.empty()) {
        json arr = json::array();
        for (const auto& cf : rec.changed_fields)
            arr.push_back(json{{"field", cf.field_id},
                               {"original_text", cf.original_text},
                               {"new_text", cf.new_text},
                               {"original_params", params_json(cf.original_params)},
                               {"new_params", params_json(cf.new_params)}});
        j["changed_fields"] = std::move(arr);
    }
    if (!rec.regions.empty()) {
        json arr = json::array();
        for (const auto& r : rec.regions) arr.push_back({r.x, r.y, r.width, r.height});
        j["regions"] = std::move(arr);
    }
    return j;
}

namespace {

OverlayParams params_from_json(const json& j) {
    OverlayParams p;
    p.font_id = j.at("font").get<std::string>();
    p.size_pt = j.at("size_pt").get<double>();
    const auto& c = j.at("color");
    p.color_rgb = {c.at(0).get<int>(), c.at(1).get<int>(), c.at(2).get<int>()};
    p.stroke_width = j.at("stroke_width").get<double>();
    p.dx = j.at("offset").at(0).get<double>();
    p.dy = j.at("offset").at(1).get<double>();
    return p;
}

}  // namespace

FraudRecord fraud_record_from_json(const json& j) {
    FraudRecord rec;
    rec.fraud_type = j.at("fraud_type").get<std::string>();
    rec.level = j.value("level", "");
    rec.morph_weight = j.value("morph_weight", -1.0);
    rec.original_portrait_id = j.value("original_portrait_id", "");
    rec.partner_portrait_id = j.value("partner_portrait_id", "");
    rec.partner_doc_id = j.value("partner_doc_id", "");
    rec.partner_field_id = j.value("partner_field_id", "");
    if (j.contains("shift")) {
        rec.shift = {j["shift"].at(0).get<int>(), j["shift"].at(1).get<int>()};
        rec.has_shift = true;
    }
    for (const auto& e : j.value("changed_fields", json::array())) {
        ChangedField cf;
        cf.field_id = e.at("field").get<std::string>();
        cf.original_text = e.at("original_text").get<std::string>();
        cf.new_text = e.at("new_text").get<std::string>();
        cf.original_params = params_from_json(e.at("original_params"));
        cf.new_params = params_from_json(e.at("new_params"));
        rec.changed_fields.push_back(std::move(cf));
    }
    for (const auto& r : j.value("regions", json::array()))
        rec.regions.emplace_back(r.at(0).get<int>(), r.at(1).get<int>(), r.at(2).get<int>(),
                                 r.at(3).get<int>());
    return rec;
}

DocumentImage inject_face_morph(const DocumentImage& doc, const FraudInputs& in,
                                const MorphConfig& cfg, Rng& rng, FraudRecord& rec) {
    if (!in.pack) throw std::invalid_argument("fraud inputs need a pack");
    if (!in.portrait) throw std::runtime_error("face morph needs the document portrait");
    if (!in.qualified) throw std::runtime_error("face morph needs a partner pool");
    std::vector<const PortraitAsset*> candidates;
    for (const auto& p : *in.qualified)
        if (p.id != in.portrait->id && p.ethnicity == in.portrait->ethnicity &&
            sex_of(p) == sex_of(*in.portrait))
            candidates.push_back(&p);
    if (candidates.empty())
        throw std::runtime_error("no morph partner with matching ethnicity and sex");
    const PortraitAsset& partner = *candidates[rng.below(candidates.size())];

    const FieldSpec& pf = portrait_field(*in.pack);
    const PreparedPortrait pa = preprocess_portrait(*in.portrait, pf);
    const PreparedPortrait pb = preprocess_portrait(partner, pf);
    PortraitAsset ta, tb;
    ta.image = pa.image;
    ta.landmarks = pa.landmarks;
    tb.image = pb.image;
    tb.landmarks = pb.landmarks;
    const cv::Mat morphed = morph_faces(ta, tb, cfg);

    DocumentImage out = doc;
    out.pixels = doc.pixels.clone();
    paste_portrait_box(out, *in.pack, pf.bbox, morphed);
    rec.fraud_type = "face_morph";
    rec.morph_weight = cfg.blend;
    rec.original_portrait_id = in.portrait->id;
    rec.partner_portrait_id = partner.id;
    rec.regions.push_back(pf.bbox);
    return out;
}

DocumentImage inject_portrait_substitution(const DocumentImage& doc, const FraudInputs& in,
                                           Rng& rng, FraudRecord& rec) {
    if (!in.pack) throw std::invalid_argument("fraud inputs need a pack");
    if (!in.disqualified || in.disqualified->empty())
        throw std::runtime_error("empty disqualified pool");
    const PortraitAsset& sub = (*in.disqualified)[rng.below(in.disqualified->size())];

    const FieldSpec& pf = portrait_field(*in.pack);
    const PreparedPortrait prep = preprocess_portrait(sub, pf);
    DocumentImage out = doc;
    out.pixels = doc.pixels.clone();
    paste_portrait_box(out, *in.pack, pf.bbox, prep.image);
    rec.fraud_type = "portrait_substitution";
    if (in.portrait) rec.original_portrait_id = in.portrait->id;
    rec.partner_portrait_id = sub.id;
    rec.regions.push_back(pf.bbox);
    return out;
}

DocumentImage inject_text_replacement(const DocumentImage& doc, const FraudInputs& in,
                                      const std::string& level, Rng& rng, FraudRecord& rec) {
    if (!in.pack) throw std::invalid_argument("fraud inputs need a pack");
    const auto fields = pii_text_fields(*in.pack);
    if (fields.empty()) throw std::runtime_error("pack has no PII text fields");
    bool easy;
    if (level == "easy")
        easy = true;
    else if (level == "hard")
        easy = false;
    else if (level == "auto")
        easy = plan_easy_level(rng);
    else
        throw std::invalid_argument("level must be easy, hard or auto");

    const IdentityRecord swapped = fraud_identity(in, easy, rng);
    const cv::Mat blank = flatten_white(in.pack->template_rgba);
    DocumentImage out = doc;
    out.pixels = doc.pixels.clone();
    for (const FieldSpec* f : fields) {
        const std::string old_text = field_value(in.identity, f->id);
        const std::string new_text = field_value(swapped, f->id);
        const OverlayParams old_p = effective_params(doc, *f);
        const OverlayParams new_p = perturb_params(old_p, *in.pack, rng);
        cv::Rect touched;
        rec.changed_fields.push_back(rewrite_field(out, *in.pack, blank, *f, old_text, new_text,
                                                   old_p, new_p, true, rng, &touched));
        rec.regions.push_back(touched);
    }
    rec.fraud_type = "text_replacement";
    rec.level = easy ? "easy" : "hard";
    return out;
}

DocumentImage inject_mixed(const DocumentImage& doc, const FraudInputs& in, Rng& rng_text,
                           Rng& rng_face, FraudRecord& rec) {
    FraudRecord text_rec;
    DocumentImage staged = inject_text_replacement(doc, in, "auto", rng_text, text_rec);
    FraudRecord face_rec;
    DocumentImage out = plan_mixed_is_morph(rng_face)
                            ? inject_face_morph(staged, in, MorphConfig{}, rng_face, face_rec)
                            : inject_portrait_substitution(staged, in, rng_face, face_rec);
    rec.fraud_type = "mixed";
    rec.level = text_rec.level;
    rec.morph_weight = face_rec.morph_weight;
    rec.original_portrait_id = face_rec.original_portrait_id;
    rec.partner_portrait_id = face_rec.partner_portrait_id;
    rec.changed_fields = std::move(text_rec.changed_fields);
    rec.regions = std::move(text_rec.regions);
    rec.regions.insert(rec.regions.end(), face_rec.regions.begin(), face_rec.regions.end());
    return out;
}

DocumentImage inject_inpaint_rewrite(const DocumentImage& doc, const FraudInputs& in, Rng& rng,
                                     FraudRecord& rec) {
    if (!in.pack) throw std::invalid_argument("fraud inputs need a pack");
    if (in.pack->fonts.size() < 2)
        throw std::runtime_error("inpaint rewrite needs at least two fonts");
    std::vector<const FieldSpec*> candidates;
    for (const auto& f : in.pack->fields) {
        if (f.kind != FieldKind::text) continue;
        const std::string text =
            f.static_text.empty() ? field_value(in.identity, f.id) : f.static_text;
        if (!text.empty()) candidates.push_back(&f);
    }
    if (candidates.empty()) throw std::runtime_error("no text fields to rewrite");
    const FieldSpec& f = *candidates[rng.below(candidates.size())];
    const std::string text = f.static_text.empty() ? field_value(in.identity, f.id) : f.static_text;

    const OverlayParams old_p = effective_params(doc, f);
    std::vector<std::string> others;
    for (const auto& [id, path] : in.pack->fonts)
        if (id != old_p.font_id) others.push_back(id);
    OverlayParams new_p = old_p;
    new_p.font_id = others[rng.below(others.size())];

    const cv::Mat blank = flatten_white(in.pack->template_rgba);
    DocumentImage out = doc;
    out.pixels = doc.pixels.clone();
    cv::Rect touched;
    rec.changed_fields.push_back(
        rewrite_field(out, *in.pack, blank, f, text, text, old_p, new_p, false, rng, &touched));
    rec.regions.push_back(touched);
    rec.fraud_type = "inpaint_rewrite";
    return out;
}

DocumentImage inject_crop_replace(const DocumentImage& doc_a, const IdentityRecord& id_a,
                                  const DocumentImage& doc_b, const IdentityRecord& id_b,
                                  const TemplatePack& pack, Rng& rng, FraudRecord& rec) {
    if (doc_a.pixels.size() != doc_b.pixels.size())
        throw std::invalid_argument("documents come from different packs");
    const auto fields = pii_text_fields(pack);
    if (fields.empty()) throw std::runtime_error("pack has no PII text fields");

    const auto [ia, ib] = plan_crop_fields(rng, int(fields.size()));
    const cv::Point shift = plan_crop_shift(rng, kCropShiftSpan);
    const FieldSpec& fa = *fields[size_t(ia)];
    const FieldSpec& fb = *fields[size_t(ib)];

    const cv::Rect canvas(0, 0, doc_a.pixels.cols, doc_a.pixels.rows);
    const cv::Rect src_full = expanded_box(fb.bbox, doc_b.pixels.size());
    const cv::Point delta = fa.bbox.tl() - fb.bbox.tl() + shift;
    const cv::Rect dst_unclipped(src_full.tl() + delta, src_full.size());
    const cv::Rect dst = dst_unclipped & canvas;
    if (dst.empty()) throw std::runtime_error("crop landed outside the canvas");
    const cv::Rect src(src_full.tl() + (dst.tl() - dst_unclipped.tl()), dst.size());

    DocumentImage out = doc_a;
    out.pixels = doc_a.pixels.clone();
    doc_b.pixels(src).copyTo(out.pixels(dst));

    rec.fraud_type = "crop_replace";
    rec.shift = shift;
    rec.has_shift = true;
    rec.partner_field_id = fb.id;
    rec.changed_fields.push_back(ChangedField{fa.id, field_value(id_a, fa.id),
                                              field_value(id_b, fb.id), effective_params(doc_a, fa),
                                              effective_params(doc_b, fb)});
    rec.regions.push_back(dst);
    return out;
}

}  // namespace idsynth
