#pragma once

#include <opencv2/core.hpp>

namespace idsynth {

struct SsimConfig {
    int window = 11;
    double window_stddev = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 255.0;
};

// Local structural similarity of two CV_64F luma images over every position
// where the Gaussian window fits entirely inside. Output is
// (h-window+1) x (w-window+1) CV_64F with values in [-1, 1].
cv::Mat ssim_map(const cv::Mat& luma_a, const cv::Mat& luma_b, const SsimConfig& cfg = {});

// Mean of the local map, luminance only (BT.601), inputs CV_8UC3 of equal
// size, both dimensions at least the window size.
double ssim(const cv::Mat& bgr_a, const cv::Mat& bgr_b, const SsimConfig& cfg = {});

// Same, restricted to a region of interest of both images.
double ssim_region(const cv::Mat& bgr_a, const cv::Mat& bgr_b, const cv::Rect& roi,
                   const SsimConfig& cfg = {});

}  // namespace idsynth
