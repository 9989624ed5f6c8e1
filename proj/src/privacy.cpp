#include "privacy.hpp"

#include <cmath>
#include <stdexcept>

namespace idsynth {

namespace {

void validate(const PixelDPConfig& cfg) {
    if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("pixeldp: epsilon must be positive");
    if (!(cfg.delta > 0.0 && cfg.delta < 1.0))
        throw std::invalid_argument("pixeldp: delta must lie in (0, 1)");
    if (!(cfg.L > 0.0)) throw std::invalid_argument("pixeldp: L must be positive");
}

}  // namespace

double pixeldp_sigma(const PixelDPConfig& cfg) {
    validate(cfg);
    return std::sqrt(2.0 * std::log(1.25 / cfg.delta)) * cfg.sensitivity * cfg.L / cfg.epsilon;
}

PrivacyMode parse_privacy_mode(const std::string& s) {
    if (s == "masking") return PrivacyMode::masking;
    if (s == "pixeldp") return PrivacyMode::pixeldp;
    throw std::invalid_argument("unknown privacy mode: " + s);
}

cv::Mat mask_regions(const cv::Mat& img, const std::vector<cv::Rect>& regions) {
    if (img.empty()) throw std::invalid_argument("masking: empty image");
    if (regions.empty()) throw std::invalid_argument("masking requires regions");
    const cv::Rect canvas(0, 0, img.cols, img.rows);
    cv::Mat out = img.clone();
    for (const cv::Rect& r : regions) {
        if ((r & canvas) != r) throw std::invalid_argument("masking: region out of bounds");
        out(r).setTo(cv::Scalar::all(0));
    }
    return out;
}

cv::Mat pixeldp_perturb(const cv::Mat& img01, const PixelDPConfig& cfg, Rng& rng) {
    if (img01.depth() != CV_64F) throw std::invalid_argument("pixeldp: expected CV_64F input");
    const double sigma = pixeldp_sigma(cfg);
    cv::Mat out = img01.clone();
    for (int y = 0; y < out.rows; ++y) {
        double* row = out.ptr<double>(y);
        const int n = out.cols * out.channels();
        for (int i = 0; i < n; ++i) {
            double v = row[i] + sigma * rng.normal();
            if (cfg.clamp) v = std::min(1.0, std::max(0.0, v));
            row[i] = v;
        }
    }
    return out;
}

cv::Mat apply_privacy(const cv::Mat& img, PrivacyMode mode, const std::vector<cv::Rect>& regions,
                      const PixelDPConfig& cfg, Rng& rng) {
    if (mode == PrivacyMode::masking) return mask_regions(img, regions);
    if (img.depth() != CV_8U) throw std::invalid_argument("pixeldp: expected 8-bit input");
    cv::Mat f;
    img.convertTo(f, CV_64F, 1.0 / 255.0);
    cv::Mat noisy = pixeldp_perturb(f, cfg, rng);
    cv::Mat out;
    noisy.convertTo(out, CV_8U, 255.0);
    return out;
}

std::vector<cv::Rect> pii_regions(const TemplatePack& pack) {
    std::vector<cv::Rect> out;
    for (const FieldSpec& f : pack.fields)
        if (f.pii) out.push_back(f.bbox);
    return out;
}

}  // namespace idsynth
