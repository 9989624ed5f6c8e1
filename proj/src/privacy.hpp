#pragma once

#include <opencv2/core.hpp>
#include <string>
#include <vector>

#include "assets.hpp"
#include "rng.hpp"

namespace idsynth {

// Gaussian-mechanism settings for pixel-level perturbation. sensitivity is
// the delta_{p,2} bound of the construction; L bounds the attack norm.
struct PixelDPConfig {
    double epsilon = 1.0;
    double delta = 0.05;
    int norm_order = 2;
    double sensitivity = 1.0;
    double L = 0.1;
    bool clamp = true;
};

// sqrt(2 ln(1.25/delta)) * sensitivity * L / epsilon
double pixeldp_sigma(const PixelDPConfig& cfg);

enum class PrivacyMode { masking, pixeldp };

PrivacyMode parse_privacy_mode(const std::string& s);

// Zeroes every pixel inside the boxes, leaves the rest untouched.
cv::Mat mask_regions(const cv::Mat& img, const std::vector<cv::Rect>& regions);

// Adds i.i.d. N(0, sigma^2) per channel to a CV_64F image already scaled to
// [0, 1]; clamps back to [0, 1] when cfg.clamp is set. Row-major draw order.
cv::Mat pixeldp_perturb(const cv::Mat& img01, const PixelDPConfig& cfg, Rng& rng);

// 8-bit entry point: masking uses the regions, pixeldp ignores them and
// perturbs the whole image (normalize, noise, clamp per cfg, denormalize).
cv::Mat apply_privacy(const cv::Mat& img, PrivacyMode mode, const std::vector<cv::Rect>& regions,
                      const PixelDPConfig& cfg, Rng& rng);

// Boxes of every field the layout flags as PII; masking stays template-driven.
std::vector<cv::Rect> pii_regions(const TemplatePack& pack);

}  // namespace idsynth
