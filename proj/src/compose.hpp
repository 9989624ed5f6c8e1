#pragma once

#include <opencv2/core.hpp>

#include <array>
#include <string>

#include "render.hpp"

namespace idsynth {

using Quad = std::array<cv::Point2d, 4>;  // tl, tr, br, bl

// Scene photo plus the card region it should receive. The mask, when given,
// must match the scene size; otherwise the warp's own coverage is used.
struct SceneAnnotation {
    cv::Mat scene;  // CV_8UC3
    Quad quad;
    cv::Mat mask;  // CV_8U, optional (empty = absent)
};

// Reads "<scene>.json" ({"scene": ..., "quad": [[x,y]x4], "mask": ...});
// image paths resolve relative to the json file.
SceneAnnotation load_scene_annotation(const std::string& json_path);

// 3x3 homography mapping src quad corners onto dst quad corners.
cv::Matx33d homography_from_quads(const Quad& src, const Quad& dst);

struct WarpResult {
    cv::Mat image;     // CV_8UC3, out_size
    cv::Mat validity;  // CV_8U, 255 where the source covers the pixel
};

// Inverse-mapped bilinear resampling of img under the quad homography.
WarpResult perspective_warp(const cv::Mat& img, const Quad& src_quad, const Quad& dst_quad,
                            const cv::Size& out_size);

// Multi-band blend: Laplacian pyramids of fg/bg mixed level-wise under the
// mask's Gaussian pyramid. levels=1 degenerates to a hard masked copy.
cv::Mat laplacian_blend(const cv::Mat& fg, const cv::Mat& bg, const cv::Mat& mask, int levels);

constexpr int kDefaultBlendLevels = 4;

// Warps the document onto the annotated quad and blends it into the scene.
cv::Mat insert_into_scene(const DocumentImage& doc, const SceneAnnotation& ann,
                          int levels = kDefaultBlendLevels);

}  // namespace idsynth
