#include "compose.hpp"

#include <json.hpp>
#include <opencv2/imgproc.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "common.hpp"
#include "imaging.hpp"

namespace idsynth {

namespace {

constexpr double kCoverEps = 1e-9;

double cross_z(const cv::Point2d& o, const cv::Point2d& a, const cv::Point2d& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

void check_quad(const Quad& q, const char* which) {
    double sign = 0.0;
    for (int i = 0; i < 4; ++i) {
        const double c = cross_z(q[i], q[(i + 1) % 4], q[(i + 2) % 4]);
        if (std::abs(c) < 1e-9)
            throw std::invalid_argument(std::string("degenerate quad: ") + which);
        if (sign == 0.0)
            sign = c;
        else if (sign * c < 0.0)
            throw std::invalid_argument(std::string("quad not convex: ") + which);
    }
}

// One Burt-style level: blur-free bilinear halving, as configured.
cv::Mat pyr_down(const cv::Mat& m) {
    cv::Mat out;
    cv::resize(m, out, {(m.cols + 1) / 2, (m.rows + 1) / 2}, 0, 0, cv::INTER_LINEAR);
    return out;
}

cv::Mat pyr_up(const cv::Mat& m, const cv::Size& size) {
    cv::Mat out;
    cv::resize(m, out, size, 0, 0, cv::INTER_LINEAR);
    return out;
}

}  // namespace

SceneAnnotation load_scene_annotation(const std::string& json_path) {
    namespace fs = std::filesystem;
    std::ifstream in(json_path);
    if (!in) throw std::runtime_error("cannot open scene annotation: " + json_path);
    nlohmann::json j;
    in >> j;
    const fs::path base = fs::path(json_path).parent_path();

    SceneAnnotation ann;
    ann.scene = load_png((base / j.at("scene").get<std::string>()).string(), 3);
    const auto& q = j.at("quad");
    if (q.size() != 4) throw std::invalid_argument("scene quad needs 4 points");
    for (int i = 0; i < 4; ++i)
        ann.quad[i] = {q[i].at(0).get<double>(), q[i].at(1).get<double>()};
    check_quad(ann.quad, "scene");
    for (const cv::Point2d& p : ann.quad)
        if (p.x < 0 || p.y < 0 || p.x > ann.scene.cols - 1 || p.y > ann.scene.rows - 1)
            throw std::invalid_argument("scene quad outside the image");
    if (j.contains("mask")) {
        cv::Mat m = load_png((base / j.at("mask").get<std::string>()).string(), 3);
        cv::cvtColor(m, ann.mask, cv::COLOR_BGR2GRAY);
        cv::threshold(ann.mask, ann.mask, 127, 255, cv::THRESH_BINARY);
        if (ann.mask.size() != ann.scene.size())
            throw std::invalid_argument("scene mask size differs from scene");
    }
    return ann;
}

cv::Matx33d homography_from_quads(const Quad& src, const Quad& dst) {
    check_quad(src, "source");
    check_quad(dst, "destination");
    cv::Point2f s[4], d[4];
    for (int i = 0; i < 4; ++i) {
        s[i] = cv::Point2f(float(src[i].x), float(src[i].y));
        d[i] = cv::Point2f(float(dst[i].x), float(dst[i].y));
    }
    const cv::Mat h = cv::getPerspectiveTransform(s, d);  // 8x8 linear solve
    cv::Matx33d out;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) out(r, c) = h.at<double>(r, c);
    return out;
}

WarpResult perspective_warp(const cv::Mat& img, const Quad& src_quad, const Quad& dst_quad,
                            const cv::Size& out_size) {
    if (img.type() != CV_8UC3) throw std::invalid_argument("warp expects CV_8UC3");
    const cv::Matx33d inv = homography_from_quads(src_quad, dst_quad).inv();

    WarpResult out;
    out.image = cv::Mat(out_size, CV_8UC3, cv::Scalar(0, 0, 0));
    out.validity = cv::Mat(out_size, CV_8U, cv::Scalar(0));
    const double xmax = img.cols - 1.0, ymax = img.rows - 1.0;
    for (int y = 0; y < out_size.height; ++y) {
        cv::Vec3b* row = out.image.ptr<cv::Vec3b>(y);
        uint8_t* vrow = out.validity.ptr<uint8_t>(y);
        for (int x = 0; x < out_size.width; ++x) {
            const cv::Vec3d h = inv * cv::Vec3d(x, y, 1.0);
            if (std::abs(h[2]) < 1e-12) continue;
            const double sx = h[0] / h[2], sy = h[1] / h[2];
            if (sx < -kCoverEps || sy < -kCoverEps || sx > xmax + kCoverEps ||
                sy > ymax + kCoverEps)
                continue;
            const double cx = std::min(std::max(sx, 0.0), xmax);
            const double cy = std::min(std::max(sy, 0.0), ymax);
            const int x0 = std::min(int(cx), img.cols - 2 < 0 ? 0 : img.cols - 2);
            const int y0 = std::min(int(cy), img.rows - 2 < 0 ? 0 : img.rows - 2);
            const double fx = cx - x0, fy = cy - y0;
            const cv::Vec3b p00 = img.at<cv::Vec3b>(y0, x0);
            const cv::Vec3b p01 = img.at<cv::Vec3b>(y0, std::min(x0 + 1, img.cols - 1));
            const cv::Vec3b p10 = img.at<cv::Vec3b>(std::min(y0 + 1, img.rows - 1), x0);
            const cv::Vec3b p11 =
                img.at<cv::Vec3b>(std::min(y0 + 1, img.rows - 1), std::min(x0 + 1, img.cols - 1));
            cv::Vec3b px;
            for (int c = 0; c < 3; ++c) {
                const double top = p00[c] + fx * (p01[c] - p00[c]);
                const double bot = p10[c] + fx * (p11[c] - p10[c]);
                px[c] = cv::saturate_cast<uint8_t>(std::lround(top + fy * (bot - top)));
            }
            row[x] = px;
            vrow[x] = 255;
        }
    }
    return out;
}

cv::Mat laplacian_blend(const cv::Mat& fg, const cv::Mat& bg, const cv::Mat& mask, int levels) {
    if (fg.size() != bg.size() || fg.size() != mask.size())
        throw std::invalid_argument("blend inputs must share dimensions");
    if (fg.type() != CV_8UC3 || bg.type() != CV_8UC3 || mask.type() != CV_8U)
        throw std::invalid_argument("blend expects CV_8UC3 images and a CV_8U mask");
    const int max_levels = int(std::floor(std::log2(std::min(fg.cols, fg.rows))));
    if (levels < 1 || levels > max_levels)
        throw std::invalid_argument(
            strprintf("blend levels must lie in [1, %d] for this size", max_levels));

    cv::Mat f, b, m;
    fg.convertTo(f, CV_64FC3);
    bg.convertTo(b, CV_64FC3);
    cv::Mat bin = mask > 0;
    bin.convertTo(m, CV_64F, 1.0 / 255.0);

    std::vector<cv::Mat> gf{f}, gb{b}, gm{m};
    for (int i = 1; i < levels; ++i) {
        gf.push_back(pyr_down(gf.back()));
        gb.push_back(pyr_down(gb.back()));
        gm.push_back(pyr_down(gm.back()));
    }

    // coarsest level blends the Gaussians, finer ones blend the Laplacians
    cv::Mat acc;
    for (int i = levels - 1; i >= 0; --i) {
        cv::Mat lf, lb;  // fresh buffers; writing through gf[i] would corrupt the pyramid
        if (i < levels - 1) {
            lf = gf[i] - pyr_up(gf[i + 1], gf[i].size());
            lb = gb[i] - pyr_up(gb[i + 1], gb[i].size());
        } else {
            lf = gf[i];
            lb = gb[i];
        }
        cv::Mat m3;
        cv::merge(std::vector<cv::Mat>{gm[i], gm[i], gm[i]}, m3);
        const cv::Mat mixed = lf.mul(m3) + lb.mul(cv::Scalar(1, 1, 1) - m3);
        acc = acc.empty() ? mixed : cv::Mat(pyr_up(acc, mixed.size()) + mixed);
    }
    cv::Mat out;
    acc.convertTo(out, CV_8UC3);
    return out;
}

cv::Mat insert_into_scene(const DocumentImage& doc, const SceneAnnotation& ann, int levels) {
    if (ann.scene.empty()) throw std::invalid_argument("scene annotation has no image");
    check_quad(ann.quad, "scene");
    const double w = doc.pixels.cols - 1.0, h = doc.pixels.rows - 1.0;
    const Quad corners{{{0.0, 0.0}, {w, 0.0}, {w, h}, {0.0, h}}};
    const WarpResult warped = perspective_warp(doc.pixels, corners, ann.quad, ann.scene.size());
    cv::Mat mask = ann.mask.empty() ? warped.validity : ann.mask;
    if (mask.size() != ann.scene.size())
        throw std::invalid_argument("scene mask size differs from scene");
    return laplacian_blend(warped.image, ann.scene, mask, levels);
}

}  // namespace idsynth
