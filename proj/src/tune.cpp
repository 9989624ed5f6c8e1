#include "tune.hpp"
#include <cstdio>
#include <cstdlib>

#include "common.hpp"
#include "imaging.hpp"
#include "render.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace idsynth {

namespace {

constexpr int kDims = 7;          // size, r, g, b, stroke, dx, dy
constexpr int kWarmup = 20;
constexpr int kGlobalCands = 8;   // per font per step
constexpr int kLocalCands = 24;   // half coarse, half fine, around the font's best
constexpr double kLocalCoarse = 0.15;
constexpr double kLocalFine = 0.04;
constexpr double kLocalFineLate = 0.015;  // after the search has mostly settled
constexpr int kLateStep = 60;
constexpr int kColorLevels = 32;
constexpr double kLengthScale = 0.5;
constexpr double kNoiseVar = 1e-6;
constexpr double kXi = 1e-3;

using Point = std::array<double, kDims>;

// one rendered quantum per dimension, normalized: 1pt, 4 color levels,
// half a stroke unit, 1px offset
constexpr double kAxisUnit[kDims] = {0.0625, 0.129, 0.129, 0.129, 0.25, 0.125, 0.125};

double halton(int index, int base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * (index % base);
        index /= base;
    }
    return r;
}

Point halton_point(int index) {
    static const int bases[kDims] = {2, 3, 5, 7, 11, 13, 17};
    Point p;
    for (int d = 0; d < kDims; ++d) p[d] = halton(index, bases[d]);
    return p;
}

int quant_channel(double u) {
    const int level = std::min(kColorLevels - 1, int(u * kColorLevels));
    return int(std::lround(level * 255.0 / (kColorLevels - 1)));
}

OverlayParams decode(const Point& u, const std::string& font_id, const TuneSpace& s) {
    OverlayParams p;
    p.font_id = font_id;
    p.size_pt = s.size_lo + u[0] * (s.size_hi - s.size_lo);
    p.color_rgb = {quant_channel(u[1]), quant_channel(u[2]), quant_channel(u[3])};
    p.stroke_width = s.stroke_lo + u[4] * (s.stroke_hi - s.stroke_lo);
    p.dx = s.off_lo + u[5] * (s.off_hi - s.off_lo);
    p.dy = s.off_lo + u[6] * (s.off_hi - s.off_lo);
    return p;
}

double to_unit(double v, double lo, double hi) {
    if (hi <= lo) return 0.0;
    return std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
}

Point encode(const OverlayParams& p, const TuneSpace& s) {
    Point u;
    u[0] = to_unit(p.size_pt, s.size_lo, s.size_hi);
    for (int c = 0; c < 3; ++c) u[1 + c] = to_unit(p.color_rgb[c], 0.0, 255.0);
    u[4] = to_unit(p.stroke_width, s.stroke_lo, s.stroke_hi);
    u[5] = to_unit(p.dx, s.off_lo, s.off_hi);
    u[6] = to_unit(p.dy, s.off_lo, s.off_hi);
    return u;
}

double sq_dist(const Point& a, const Point& b) {
    double d = 0;
    for (int i = 0; i < kDims; ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
    return d;
}

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double norm_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

// RBF surrogate with fixed hyperparameters; observations are normalized so
// the unit signal variance fits whatever SSIM range the segment produces.
class Surrogate {
public:
    void add(const Point& x, double y) {
        xs_.push_back(x);
        ys_.push_back(y);
        fitted_ = false;
    }

    size_t size() const { return xs_.size(); }

    void fit() {
        const int n = int(xs_.size());
        mean_ = 0;
        for (double v : ys_) mean_ += v;
        mean_ /= n;
        double var = 0;
        for (double v : ys_) var += (v - mean_) * (v - mean_);
        scale_ = std::max(std::sqrt(var / n), 1e-9);

        Eigen::MatrixXd K(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j <= i; ++j) {
                const double k = std::exp(-sq_dist(xs_[i], xs_[j]) /
                                          (2 * kLengthScale * kLengthScale));
                K(i, j) = k;
                K(j, i) = k;
            }
        K.diagonal().array() += kNoiseVar;
        llt_.compute(K);
        Eigen::VectorXd yn(n);
        for (int i = 0; i < n; ++i) yn(i) = (ys_[i] - mean_) / scale_;
        alpha_ = llt_.solve(yn);
        fitted_ = true;
    }

    void predict(const Point& x, double& mu, double& sd) const {
        const int n = int(xs_.size());
        Eigen::VectorXd ks(n);
        for (int i = 0; i < n; ++i)
            ks(i) = std::exp(-sq_dist(xs_[i], x) / (2 * kLengthScale * kLengthScale));
        mu = mean_ + scale_ * ks.dot(alpha_);
        Eigen::VectorXd v = llt_.matrixL().solve(ks);
        const double var = std::max(1.0 + kNoiseVar - v.squaredNorm(), 1e-12);
        sd = scale_ * std::sqrt(var);
    }

    bool fitted() const { return fitted_; }

private:
    std::vector<Point> xs_;
    std::vector<double> ys_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::VectorXd alpha_;
    double mean_ = 0, scale_ = 1;
    bool fitted_ = false;
};

double expected_improvement(double mu, double sd, double best) {
    const double gap = mu - best - kXi;
    if (sd < 1e-12) return std::max(gap, 0.0);
    const double z = gap / sd;
    return gap * norm_cdf(z) + sd * norm_pdf(z);
}

std::vector<std::string> sorted_font_ids(const TemplatePack& pack) {
    std::vector<std::string> out;
    for (const auto& [id, path] : pack.fonts) out.push_back(id);
    return out;  // map iteration is already sorted
}

std::string field_text(const TemplatePack& pack, const FieldSpec& f) {
    if (auto it = pack.reference_texts.find(f.id); it != pack.reference_texts.end())
        return it->second;
    return f.static_text;
}

}  // namespace

cv::Mat render_text_layer(const TemplatePack& pack,
                          const std::map<std::string, OverlayParams>& overrides) {
    cv::Mat canvas = flatten_white(pack.template_rgba);
    for (const FieldSpec& f : pack.fields) {
        if (f.kind != FieldKind::text) continue;
        const std::string text = field_text(pack, f);
        if (text.empty()) continue;
        OverlayParams p = f.params;
        if (auto it = overrides.find(f.id); it != overrides.end()) p = it->second;
        draw_text_field(canvas, pack, f, text, p);
    }
    return canvas;
}

cv::Rect segment_band(const TemplatePack& pack, int segment) {
    int y0 = INT_MAX, y1 = INT_MIN;
    for (const FieldSpec& f : pack.fields) {
        if (f.kind != FieldKind::text || f.segment != segment) continue;
        y0 = std::min(y0, f.bbox.y);
        y1 = std::max(y1, f.bbox.y + f.bbox.height);
    }
    if (y0 > y1) throw std::invalid_argument("segment has no text fields");
    y0 -= 8;
    y1 += 8;
    const int h = pack.template_rgba.rows;
    while (y1 - y0 < 11) {  // keep the band tall enough for the ssim window
        if (y0 > 0) --y0;
        if (y1 < h) ++y1;
    }
    y0 = std::max(0, y0);
    y1 = std::min(h, y1);
    return cv::Rect(0, y0, pack.template_rgba.cols, y1 - y0);
}

SegmentReport tune_segment(const TemplatePack& pack, int segment, const cv::Mat& reference,
                           const TuneSpace& space, int budget, Rng& rng) {
    if (pack.fonts.empty()) throw std::invalid_argument("empty search space: pack has no fonts");
    if (reference.empty() || reference.size() != pack.template_rgba.size())
        throw std::invalid_argument("reference raster missing or mis-sized");

    std::vector<const FieldSpec*> seg_fields;
    for (const FieldSpec& f : pack.fields)
        if (f.kind == FieldKind::text && f.segment == segment) seg_fields.push_back(&f);
    if (seg_fields.empty()) throw std::invalid_argument("segment has no text fields");

    const cv::Rect band = segment_band(pack, segment);
    const std::vector<std::string> fonts = sorted_font_ids(pack);

    auto with_params = [&](const OverlayParams& p) {
        std::map<std::string, OverlayParams> over;
        for (const FieldSpec* f : seg_fields) over[f->id] = p;
        return over;
    };
    auto evaluate_band = [&](const OverlayParams& p) -> double {
        try {
            cv::Mat img = render_text_layer(pack, with_params(p));
            return ssim_region(img, reference, band);
        } catch (const std::exception&) {
            return -1.0;
        }
    };
    auto evaluate_full = [&](const OverlayParams& p) -> double {
        try {
            cv::Mat img = render_text_layer(pack, with_params(p));
            return ssim(img, reference);
        } catch (const std::exception&) {
            return -1.0;
        }
    };

    SegmentReport report;
    report.segment = segment;

    OverlayParams best_p = seg_fields.front()->params;
    double best_y = evaluate_band(best_p);
    double best_full = evaluate_full(best_p);
    report.untuned_ssim = best_y;
    report.trace.push_back({0, best_y, best_full});

    std::map<std::string, Surrogate> models;
    // best scoring point seen per font, local search centers
    std::map<std::string, std::pair<Point, double>> font_best;
    Point u_best = encode(best_p, space);
    if (pack.fonts.count(best_p.font_id)) {
        models[best_p.font_id].add(u_best, best_y);
        font_best[best_p.font_id] = {u_best, best_y};
    }

    for (int step = 1; step <= budget; ++step) {
        Point u;
        std::string font;
        if (step <= kWarmup) {
            u = halton_point(step);
            font = fonts[size_t(step - 1) % fonts.size()];
        } else {
            for (auto& [fid, model] : models)
                if (model.size() >= 2 && !model.fitted()) model.fit();
            double best_ei = -1.0;
            for (const std::string& fid : fonts) {
                const bool seen = font_best.count(fid) > 0;
                const Point center = seen ? font_best[fid].first : u_best;
                // improvement over the font's own frontier, so a font whose
                // warmup draws were poor still gets explored
                const double target = seen ? font_best[fid].second : best_y;
                const int total = kGlobalCands + kLocalCands + 4 * kDims + 1;
                for (int c = 0; c < total; ++c) {
                    Point cand;
                    if (c == total - 1) {
                        cand = u_best;  // this font at the global best geometry
                    } else if (c < kGlobalCands) {
                        for (int d = 0; d < kDims; ++d) cand[d] = rng.uniform();
                    } else if (c < kGlobalCands + kLocalCands) {
                        const double fine = step < kLateStep ? kLocalFine : kLocalFineLate;
                        const double sigma =
                            (c < kGlobalCands + kLocalCands / 2) ? kLocalCoarse : fine;
                        for (int d = 0; d < kDims; ++d)
                            cand[d] = std::clamp(center[d] + sigma * rng.normal(), 0.0, 1.0);
                    } else {
                        // single-dimension steps of one or two rendered quanta
                        const int probe = c - kGlobalCands - kLocalCands;
                        const int d = probe / 4;
                        const double sign = (probe % 2 == 0) ? 1.0 : -1.0;
                        const double span = (probe % 4 < 2) ? 1.0 : 2.0;
                        cand = center;
                        cand[d] = std::clamp(center[d] + sign * span * kAxisUnit[d], 0.0, 1.0);
                    }
                    double ei;
                    auto it = models.find(fid);
                    if (it == models.end() || it->second.size() < 2) {
                        ei = 1e9;  // unexplored font: force a look
                    } else {
                        double mu, sd;
                        it->second.predict(cand, mu, sd);
                        ei = expected_improvement(mu, sd, target);
                    }
                    if (ei > best_ei) {
                        best_ei = ei;
                        u = cand;
                        font = fid;
                    }
                }
            }
        }

        OverlayParams p = decode(u, font, space);
        const double y = evaluate_band(p);
        if (getenv("IDSYNTH_TUNE_DEBUG"))
            fprintf(stderr, "step %3d font %-5s y %.4f size %.2f off (%.2f,%.2f) stroke %.2f\n",
                    step, font.c_str(), y, p.size_pt, p.dx, p.dy, p.stroke_width);
        Surrogate& model = models[font];
        model.add(u, y);
        if (model.size() >= 2) model.fit();

        auto fb = font_best.find(font);
        if (y > -1.0 && (fb == font_best.end() || y > fb->second.second))
            font_best[font] = {u, y};
        if (y > best_y) {
            best_y = y;
            best_p = p;
            u_best = u;
            best_full = evaluate_full(p);
        }
        report.trace.push_back({step, best_y, best_full});
    }

    report.best = best_p;
    report.best_ssim = best_y;
    return report;
}

TuneReport tune_document(const TemplatePack& pack, const cv::Mat& reference,
                         int budget_per_segment, Rng& rng) {
    TuneReport report;
    report.budget = budget_per_segment;
    report.full_before = ssim(render_text_layer(pack, {}), reference);

    TuneSpace space;
    for (int seg : pack.segments()) {
        Rng seg_rng = rng.child("segment-" + std::to_string(seg));
        SegmentReport sr = tune_segment(pack, seg, reference, space, budget_per_segment, seg_rng);
        for (const FieldSpec& f : pack.fields)
            if (f.kind == FieldKind::text && f.segment == seg)
                report.best_params[f.id] = sr.best;
        report.segments.push_back(std::move(sr));
    }

    report.full_after = ssim(render_text_layer(pack, report.best_params), reference);
    return report;
}

void write_params_json(const std::string& path, const TuneReport& report) {
    nlohmann::json j;
    j["budget"] = report.budget;
    j["full_ssim_before"] = report.full_before;
    j["full_ssim_after"] = report.full_after;
    nlohmann::json fields = nlohmann::json::object();
    for (const auto& [fid, p] : report.best_params) {
        fields[fid] = {{"font", p.font_id},
                       {"size_pt", p.size_pt},
                       {"color", {p.color_rgb[0], p.color_rgb[1], p.color_rgb[2]}},
                       {"stroke_width", p.stroke_width},
                       {"offset", {p.dx, p.dy}}};
    }
    j["fields"] = fields;
    nlohmann::json segs = nlohmann::json::array();
    for (const auto& s : report.segments)
        segs.push_back({{"segment", s.segment},
                        {"untuned_ssim", s.untuned_ssim},
                        {"best_ssim", s.best_ssim}});
    j["segments"] = segs;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

std::map<std::string, OverlayParams> read_params_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    std::map<std::string, OverlayParams> out;
    for (const auto& [fid, pj] : j.at("fields").items()) {
        OverlayParams p;
        p.font_id = pj.at("font").get<std::string>();
        p.size_pt = pj.at("size_pt").get<double>();
        auto c = pj.at("color");
        p.color_rgb = {c.at(0).get<int>(), c.at(1).get<int>(), c.at(2).get<int>()};
        p.stroke_width = pj.value("stroke_width", 0.0);
        if (pj.contains("offset")) {
            p.dx = pj["offset"].at(0).get<double>();
            p.dy = pj["offset"].at(1).get<double>();
        }
        out[fid] = p;
    }
    return out;
}

void write_trace_csv(const std::string& path, const TuneReport& report) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "segment,step,segment_ssim,full_ssim\n";
    for (const auto& s : report.segments)
        for (const auto& row : s.trace)
            out << s.segment << "," << row.step << "," << strprintf("%.9f", row.segment_ssim)
                << "," << strprintf("%.9f", row.full_ssim) << "\n";
}

}  // namespace idsynth
