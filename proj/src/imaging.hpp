#pragma once

#include <opencv2/core.hpp>

#include <string>

namespace idsynth {

// PNG in, BGR(A) out. `channels` may be 3 or 4; the file is converted as needed.
cv::Mat load_png(const std::string& path, int channels);

void save_png(const std::string& path, const cv::Mat& image);

// Composite a BGRA image over an opaque white background, straight alpha.
cv::Mat flatten_white(const cv::Mat& bgra);

// BT.601 luma of a BGR image, CV_64F in [0, 255].
cv::Mat to_luma64(const cv::Mat& bgr);

// Scale to cover `target` preserving aspect (INTER_AREA), then center-crop.
cv::Mat fit_cover(const cv::Mat& image, const cv::Size& target);

int max_abs_diff(const cv::Mat& a, const cv::Mat& b);

inline bool images_equal(const cv::Mat& a, const cv::Mat& b) {
    return a.size() == b.size() && a.type() == b.type() && max_abs_diff(a, b) == 0;
}

}  // namespace idsynth
