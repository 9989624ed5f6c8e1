#pragma once

#include "assets.hpp"

#include <opencv2/core.hpp>

#include <array>
#include <vector>

namespace idsynth {

// Index triples into `pts`, sorted canonically so the list does not depend on
// traversal order inside the triangulator.
std::vector<std::array<int, 3>> delaunay_triangles(const std::vector<cv::Point2d>& pts,
                                                   const cv::Size& bounds);

// Piecewise-affine warp of src so that src_pts land on dst_pts. Bilinear
// sampling in double precision; pixels covered by no triangle stay (0,0,0,0).
cv::Mat warp_mesh(const cv::Mat& src, const std::vector<cv::Point2d>& src_pts,
                  const std::vector<cv::Point2d>& dst_pts,
                  const std::vector<std::array<int, 3>>& tris, const cv::Size& size);

std::vector<cv::Point2d> convex_hull(std::vector<cv::Point2d> pts);

// Inclusive test against a counterclockwise convex polygon.
bool inside_hull(const std::vector<cv::Point2d>& hull, double x, double y);

struct MorphConfig {
    double blend = 0.5;
    bool histogram_match_to_first = true;
};

// Blend-weighted landmark average, per-triangle warp of both faces onto the
// averaged geometry, cross-dissolve inside the landmark hull, then per-channel
// histogram match of the hull region back to the first face. Pixels outside
// the hull are copied from `a` untouched.
cv::Mat morph_faces(const PortraitAsset& a, const PortraitAsset& b, const MorphConfig& cfg);

}  // namespace idsynth
