#pragma once

#include "assets.hpp"
#include "rng.hpp"
#include "ssim.hpp"

#include <map>
#include <string>
#include <vector>

namespace idsynth {

// Search ranges for the continuous overlay dimensions. Color spans the full
// RGB cube quantized to 32 levels per channel; the font set comes from the
// pack.
struct TuneSpace {
    double size_lo = 8.0, size_hi = 24.0;
    double stroke_lo = 0.0, stroke_hi = 2.0;
    double off_lo = -4.0, off_hi = 4.0;
};

struct TraceRow {
    int step = 0;
    double segment_ssim = 0;  // best so far
    double full_ssim = 0;     // best so far
};

struct SegmentReport {
    int segment = 0;
    OverlayParams best;
    double untuned_ssim = 0;
    double best_ssim = 0;
    std::vector<TraceRow> trace;
};

struct TuneReport {
    std::map<std::string, OverlayParams> best_params;  // per text field id
    std::vector<SegmentReport> segments;
    double full_before = 0;
    double full_after = 0;
    int budget = 0;
};

// Renders the flattened template plus every text field carrying a reference
// text (or a static one), with per-field overrides. No portraits.
cv::Mat render_text_layer(const TemplatePack& pack,
                          const std::map<std::string, OverlayParams>& overrides);

// Horizontal band covering a segment's text rows, padded and clamped.
cv::Rect segment_band(const TemplatePack& pack, int segment);

// Maximizes the band-restricted structural similarity against the reference
// by searching fonts, size, color, stroke, and offset with a Gaussian-process
// surrogate per font, expected improvement, and a quasi-random warmup.
// Deterministic given the rng; evaluation order is budget-independent, so a
// larger budget replays the shorter run's trials before extending them.
// A trial whose render fails scores -1 and the search continues.
SegmentReport tune_segment(const TemplatePack& pack, int segment, const cv::Mat& reference,
                           const TuneSpace& space, int budget, Rng& rng);

// Tunes every segment independently off child rng streams and composes the
// per-field parameter map.
TuneReport tune_document(const TemplatePack& pack, const cv::Mat& reference,
                         int budget_per_segment, Rng& rng);

void write_params_json(const std::string& path, const TuneReport& report);
std::map<std::string, OverlayParams> read_params_json(const std::string& path);
void write_trace_csv(const std::string& path, const TuneReport& report);

}  // namespace idsynth
